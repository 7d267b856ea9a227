"""Elliptic building blocks: theta functions with characteristics, the prime
form, Dedekind eta, Eisenstein series and Weierstrass-type functions.

Conventions used throughout the package:

* the torus is C/Lambda with Lambda = 2*pi*i*(Z*tau + Z), Im(tau) > 0,
* q = exp(2*pi*i*tau),
* the genus-one theta function with real (or complex-extended) characteristics
  (alpha, beta) is

      theta[alpha; beta](z, tau)
          = sum_n exp( i*pi*(n+alpha)^2*tau + (n+alpha)*(z + 2*pi*i*beta) ),

  so that the odd function theta_1 is theta[1/2; 1/2] up to normalisation and
  the prime form K(z, tau) = theta_1(z, tau) / theta_1'(0, tau) behaves like z
  near the origin.

All series are evaluated adaptively: the summation cutoff is doubled (at most
four times) until the relative change of the result drops below the requested
tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log

import numpy as np
from scipy.special import zeta

TWO_PI_I = 2.0j * np.pi


@dataclass(frozen=True)
class SeriesBudget:
    """Truncation/accuracy budget for the various infinite series.

    Attributes
    ----------
    lattice_cutoff : int
        Initial summation cutoff for theta-type lattice sums.
    qseries_cutoff : int
        Initial truncation order for q-expansions (eta, Eisenstein series).
    rel_tol : float
        Relative tolerance used by the adaptive doubling loop.
    """

    lattice_cutoff: int = 16
    qseries_cutoff: int = 64
    rel_tol: float = 1e-12


DEFAULT_BUDGET = SeriesBudget()

_MAX_DOUBLINGS = 4


def _budget(b):
    return DEFAULT_BUDGET if b is None else b


def _check_tau(tau):
    if np.imag(tau) <= 0:
        raise ValueError(f"tau must lie in the upper half plane, got {tau}")


def nearest_lattice_point(z, tau):
    """Nearest point of Lambda = 2*pi*i*(Z*tau + Z) to z (vectorised).

    Returns (lam, m, n) with lam = 2*pi*i*(m*tau + n).  The pair (m, n) is
    obtained by rounding the real coordinates of z in the lattice basis; this
    gives the nearest point up to the usual rounding ambiguity of oblique
    lattices, which is refined by a local search over neighbouring cells.
    """
    z = np.asarray(z, dtype=complex)
    u = z / TWO_PI_I  # z = 2*pi*i*(m*tau + n) <=> u = m*tau + n
    m0 = np.rint(np.imag(u) / np.imag(tau))
    n0 = np.rint(np.real(u) - m0 * np.real(tau))
    best = None
    for dm in (-1, 0, 1):
        for dn in (-1, 0, 1):
            m = m0 + dm
            n = n0 + dn
            lam = TWO_PI_I * (m * tau + n)
            d = np.abs(z - lam)
            if best is None:
                best = (d, lam, m, n)
            else:
                take = d < best[0]
                best = (
                    np.where(take, d, best[0]),
                    np.where(take, lam, best[1]),
                    np.where(take, m, best[2]),
                    np.where(take, n, best[3]),
                )
    return best[1], best[2], best[3]


def lattice_min_distance(tau):
    """D(q): length of the shortest non-zero vector of 2*pi*i*(Z*tau + Z)."""
    _check_tau(tau)
    best = np.inf
    for m in range(-2, 3):
        for n in range(-2, 3):
            if m == 0 and n == 0:
                continue
            best = min(best, abs(TWO_PI_I * (m * tau + n)))
    return best


def theta_char_g1(alpha, beta, z, tau, b=None):
    """Genus-one theta function with characteristics [alpha; beta].

    Parameters
    ----------
    alpha, beta : scalar (real, or complex for the analytically continued
        second characteristic)
    z : scalar or ndarray (complex)
    tau : complex, Im(tau) > 0
    b : SeriesBudget, optional

    Returns a value (or array) of

        sum_n exp(i*pi*(n+alpha)^2*tau + (n+alpha)*(z + 2*pi*i*beta)).
    """
    b = _budget(b)
    _check_tau(tau)
    z = np.asarray(z, dtype=complex)
    zz = z[..., None] + TWO_PI_I * beta

    cutoff = max(4, b.lattice_cutoff)
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        n = np.arange(-cutoff, cutoff + 1, dtype=float) + alpha
        val = np.exp(1j * np.pi * n**2 * tau + n * zz).sum(axis=-1)
        if prev is not None:
            scale = np.maximum(np.abs(val), 1e-300)
            if np.max(np.abs(val - prev) / scale) < b.rel_tol:
                return val if val.shape else complex(val)
        prev = val
        cutoff *= 2
    return prev if prev.shape else complex(prev)


def theta1(z, tau, b=None):
    """Odd theta function theta[1/2; 1/2](z, tau)."""
    return theta_char_g1(0.5, 0.5, z, tau, b)


def theta1_prime0(tau, b=None):
    """z-derivative of theta1 at z = 0 (term-wise differentiated series)."""
    b = _budget(b)
    _check_tau(tau)
    cutoff = max(4, b.lattice_cutoff)
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        n = np.arange(-cutoff, cutoff + 1, dtype=float) + 0.5
        val = np.sum(n * np.exp(1j * np.pi * n**2 * tau + 1j * np.pi * n))
        if prev is not None and abs(val - prev) < b.rel_tol * abs(val):
            return complex(val)
        prev = val
        cutoff *= 2
    return complex(prev)


def prime_form_K(z, tau, b=None):
    """Prime form K(z, tau) = theta1(z, tau) / theta1'(0, tau); K ~ z at 0.

    Vanishes exactly on the lattice; raises if z is numerically on Lambda
    (relative distance below 1e-12 of the minimal lattice length), since the
    caller almost certainly divides by the result.
    """
    z = np.asarray(z, dtype=complex)
    lam, _, _ = nearest_lattice_point(z, tau)
    d = np.abs(z - lam)
    if np.any(d < 1e-12 * lattice_min_distance(tau)):
        raise ValueError("prime_form_K evaluated at (numerically) a lattice point")
    val = theta1(z, tau, b) / theta1_prime0(tau, b)
    return val if np.ndim(val) else complex(val)


def dedekind_eta(tau, b=None):
    """Dedekind eta, q^(1/24) * prod_{n>=1} (1 - q^n).

    The product is expanded with the pentagonal number theorem, so very few
    terms are needed even for moderately small Im(tau).
    """
    b = _budget(b)
    _check_tau(tau)
    q = np.exp(TWO_PI_I * tau)
    order = max(8, b.qseries_cutoff)
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        total = 1.0 + 0.0j
        m = 1
        while m * (3 * m - 1) // 2 <= order:
            total += (-1) ** m * (q ** (m * (3 * m - 1) // 2) + q ** (m * (3 * m + 1) // 2))
            m += 1
        if prev is not None and abs(total - prev) < b.rel_tol * abs(total):
            break
        prev = total
        order *= 2
    # q^(1/24) taken as exp(2*pi*i*tau/24) so that eta(tau + 1) carries the
    # standard phase exp(i*pi/12) rather than being periodic in tau
    return np.exp(TWO_PI_I * tau / 24.0) * total


def eisenstein(k, tau, b=None):
    """Eisenstein series E_k(tau) in the normalisation fixed by the
    Laurent expansion of the Weierstrass-type function P_2 (see
    weierstrass_P): P_2(tau, z) - 1/z^2 = sum_{k>=2} (k-1) E_k(tau) z^(k-2).

    Concretely E_k = -B_k/k! + (2/(k-1)!) * sum_{n>=1} sigma_{k-1}(n) q^n for
    even k >= 2 (E_2 = -1/12 + 2q + ...), and E_k = 0 for odd k.  The constant
    term is evaluated through zeta(k) to stay stable at large k.
    """
    b = _budget(b)
    _check_tau(tau)
    if k < 2:
        raise ValueError("eisenstein requires k >= 2")
    if k % 2 == 1:
        return 0.0j
    q = np.exp(TWO_PI_I * tau)
    # -B_k/k! = (-1)^(k/2) * 2 * zeta(k) / (2*pi)^k for even k
    const = (-1) ** (k // 2) * 2.0 * zeta(k) / (2.0 * np.pi) ** k

    order = max(8, b.qseries_cutoff)
    prev = None
    lgk = lgamma(k)
    for _ in range(_MAX_DOUBLINGS + 1):
        ns = np.arange(1, order + 1)
        # sigma_{k-1}(n)/(k-1)! assembled divisor-by-divisor in log space
        sig = np.zeros(order + 1)
        for d in range(1, order + 1):
            w = np.exp((k - 1) * log(d) - lgk)
            sig[d::d] += w
        qsum = 2.0 * np.sum(sig[1:] * q**ns)
        val = const + qsum
        if prev is not None and abs(val - prev) <= b.rel_tol * max(abs(val), 1e-300):
            return complex(val)
        prev = val
        order *= 2
    return complex(prev)


def weierstrass_P(m, z, tau, b=None):
    """Weierstrass-type function P_m(tau, z), m >= 2, on 2*pi*i*(Z*tau + Z).

    P_2 = wp + E_2 has Laurent expansion 1/z^2 + sum_{k>=2}(k-1) E_k z^(k-2)
    and P_{m+1} = -(1/m) d/dz P_m, i.e.

        P_m(z) = 1/z^m
               + ((-1)^m/(m-1)!) * sum_{k>=m even} (k-1) (k-2)!/(k-m)! E_k z^(k-m).

    z is reduced modulo the lattice to the representative nearest the origin
    before the Laurent series is summed.
    """
    b = _budget(b)
    _check_tau(tau)
    z = complex(z)
    lam, _, _ = nearest_lattice_point(z, tau)
    z = z - complex(lam)
    if abs(z) < 1e-12 * lattice_min_distance(tau):
        raise ValueError("weierstrass_P evaluated at a lattice point")

    total = z ** (-m)
    sign = (-1) ** m
    lgm = lgamma(m)
    k = m if m % 2 == 0 else m + 1
    tail = 0.0
    consecutive_small = 0
    while k < m + 400:
        ek = eisenstein(k, tau, b)
        coef = sign * (k - 1) * np.exp(lgamma(k - 1) - lgamma(k - m + 1) - lgm)
        term = coef * ek * z ** (k - m)
        total += term
        tail = abs(term)
        if tail < b.rel_tol * max(abs(total), 1e-300):
            consecutive_small += 1
            if consecutive_small >= 3:
                return complex(total)
        else:
            consecutive_small = 0
        k += 2
    raise RuntimeError("weierstrass_P series did not converge; |z| too close to D(q)?")


def twisted_P1(theta_mult, phi_mult, z, tau, b=None):
    """Twisted Weierstrass kernel P_1[theta; phi](z, tau) for multipliers
    theta = -exp(-2*pi*i*beta), phi = -exp(2*pi*i*alpha):

        P_1[theta; phi](z) = theta[alpha; beta](z) /
                             ( theta[alpha; beta](0) * K(z) ).

    Requires (theta, phi) != (1, 1); the characteristics are recovered on the
    principal window alpha, beta in (-1/2, 1/2].
    """
    if abs(theta_mult - 1.0) < 1e-14 and abs(phi_mult - 1.0) < 1e-14:
        raise ValueError("twisted_P1 undefined for trivial multipliers (theta, phi) = (1, 1)")
    alpha = np.angle(-phi_mult) / (2.0 * np.pi)
    beta = -np.angle(-theta_mult) / (2.0 * np.pi)
    return twisted_P1_char(alpha, beta, z, tau, b)


def twisted_P1_char(alpha, beta, z, tau, b=None):
    """P_1 kernel written directly in terms of characteristics [alpha; beta]."""
    num = theta_char_g1(alpha, beta, z, tau, b)
    den = theta_char_g1(alpha, beta, 0.0, tau, b)
    if abs(den) < 1e-300:
        raise ValueError("theta[alpha; beta](0) vanishes; kernel undefined")
    return num / den / prime_form_K(z, tau, b)


def theta_char_g2(alpha, beta, Omega, b=None):
    """Genus-two theta constant with characteristics alpha, beta in R^2:

        sum_{n in Z^2} exp( i*pi*(n+alpha).Omega.(n+alpha)
                            + (n+alpha).(2*pi*i*beta) ).

    Omega is a symmetric 2x2 period matrix with positive-definite imaginary
    part.
    """
    b = _budget(b)
    Omega = np.asarray(Omega, dtype=complex)
    if Omega.shape != (2, 2):
        raise ValueError("Omega must be 2x2")
    if not np.allclose(Omega, Omega.T, atol=1e-12):
        raise ValueError("Omega must be symmetric")
    im = np.imag(Omega)
    if np.linalg.eigvalsh(im).min() <= 0:
        raise ValueError("Im(Omega) must be positive definite")
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)

    cutoff = max(4, b.lattice_cutoff)
    prev = None
    for _ in range(_MAX_DOUBLINGS + 1):
        r = np.arange(-cutoff, cutoff + 1)
        n1, n2 = np.meshgrid(r + alpha[0], r + alpha[1], indexing="ij")
        quad = (
            Omega[0, 0] * n1**2 + 2.0 * Omega[0, 1] * n1 * n2 + Omega[1, 1] * n2**2
        )
        lin = TWO_PI_I * (beta[0] * n1 + beta[1] * n2)
        val = np.sum(np.exp(1j * np.pi * quad + lin))
        if prev is not None and abs(val - prev) <= b.rel_tol * max(abs(val), 1e-300):
            return complex(val)
        prev = val
        cutoff *= 2
    return complex(prev)

"""Genus-two Szego kernel on the self-sewn torus.

The sewn kernel is assembled from the genus-one data as

    S2(x, y) = S_kappa(x, y) + xi * h(x) . D^(theta2) . (I - T)^(-1) . hbar(y)

with half-order moment vectors h_a(x, k) = rho^((k_a - 1/2)/2) d_a(x, k) and
hbar_a(y, k) = rho^((k_a - 1/2)/2) dbar_a(y, k).  The multiplier system across
the sewing handle is checked by sewing_multiplier_residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .elliptic import DEFAULT_BUDGET
from .szego import (
    build_T,
    half_diff,
    half_diff_bar,
    principal_branch_winding,
    puncture_center,
    rho_half_powers,
    s_kappa,
    theta2_weights,
)


@dataclass(frozen=True)
class KernelEval:
    """Kernel value together with the truncation order and quadrature size."""

    value: complex
    N: int
    quad_M: int


def domain_check(tau, w, rho):
    """Check membership of (tau, w, rho) in the sewing domain

        |w - lam| > 2*|rho|^(1/2) > 0   for all lam in 2*pi*i*(Z*tau + Z).

    Returns (ok, margin, lam_worst) where margin = min |w - lam| - 2*|rho|^(1/2).
    """
    if np.imag(tau) <= 0:
        return False, -np.inf, None
    if rho == 0:
        return False, -np.inf, None
    radius = 2.0 * np.sqrt(abs(rho))
    # enumerate every lattice point that could come within reach of w
    span = abs(w) + radius + 4.0 * np.pi * (1.0 + abs(tau))
    mmax = int(np.ceil(span / (2.0 * np.pi * np.imag(tau)))) + 2
    nmax = int(np.ceil(span / (2.0 * np.pi))) + 2
    worst = None
    margin = np.inf
    for m in range(-mmax, mmax + 1):
        for n in range(-nmax, nmax + 1):
            lam = 2j * np.pi * (m * tau + n)
            d = abs(w - lam) - radius
            if d < margin:
                margin = d
                worst = lam
    return margin > 0.0, margin, worst


@lru_cache(maxsize=128)
def _resolvent_lu(N, quad_M, sew, tw, budget):
    T = build_T(N, sew, tw, quad_M, budget)
    return lu_factor(np.eye(2 * N) - T)


def h_row(x, N, sew, tw, quad_M=256, b=None):
    """Row vector h(x) over the flattened (a, k) index."""
    parts = []
    for a in (1, 2):
        d = half_diff(a, x, N, sew, tw, quad_M, b)
        parts.append(rho_half_powers(N, a, sew, tw) * d)
    return np.concatenate(parts)


def hbar_row(y, N, sew, tw, quad_M=256, b=None):
    """Row vector hbar(y) over the flattened (a, k) index."""
    parts = []
    for a in (1, 2):
        d = half_diff_bar(a, y, N, sew, tw, quad_M, b)
        parts.append(rho_half_powers(N, a, sew, tw) * d)
    return np.concatenate(parts)


def s2_eval(x, y, sew, tw, N=16, quad_M=256, b=None):
    """Genus-two Szego kernel S2(x, y) on the sewn surface (coordinate form
    in the uniformising torus variable).  Returns a KernelEval."""
    b = b or DEFAULT_BUDGET
    ok, margin, _ = domain_check(sew.tau, sew.w, sew.rho)
    if not ok:
        raise ValueError(f"(tau, w, rho) outside the sewing domain (margin {margin:g})")
    base = s_kappa(x, y, sew, tw, b)
    h = h_row(x, N, sew, tw, quad_M, b)
    hb = hbar_row(y, N, sew, tw, quad_M, b)
    lu = _resolvent_lu(N, quad_M, sew, tw, b)
    corr = tw.xi * (h * theta2_weights(N, tw)) @ lu_solve(lu, hb)
    return KernelEval(complex(base + corr), N, quad_M)


def sewing_multiplier_residual(x_loc, a, y, sew, tw, N=16, quad_M=256, b=None):
    """Residual of the multiplier relation across the sewing handle.

    A point with local coordinate x_loc in annulus a is identified with the
    point with local coordinate rho / x_loc in annulus abar; the kernel
    half-form transforms with the Jacobian factor

        dz_a^(1/2) = (-1)^abar * xi * rho^(1/2) / z_abar * dz_abar^(1/2)

    and picks up the multiplier -theta2^(a - abar).  Both signs of the
    exponent (a - abar) are tried and the smaller normalised residual is
    returned as (residual, sign_used), with sign_used the coefficient s in
    theta2^(s*(a - abar)).

    Pointwise kernel values carry the principal puncture power, whose branch
    cuts can slip a factor e^(2*pi*i*kappa) against the branch-tracked
    expansion convention; the slip is deterministic and the multiplier is
    compensated by e^(2*pi*i*kappa*m) with

        m = n(x) - n(xbar) + (-1)^a * nu,

    n the principal-power windings of the two identified points and nu the
    winding of Log(x_loc) + Log(xbar_loc) against the carried log(rho).
    """
    abar = 3 - a
    x_loc = complex(x_loc)
    xbar_loc = complex(sew.rho) / x_loc
    x = x_loc + puncture_center(a, sew)
    xbar = xbar_loc + puncture_center(abar, sew)

    lhs = s2_eval(x, y, sew, tw, N, quad_M, b).value
    rhs = s2_eval(xbar, y, sew, tw, N, quad_M, b).value
    jac = (-1.0) ** abar * tw.xi * sew.sqrt_rho / xbar_loc
    scale = max(abs(lhs * jac), abs(rhs), 1e-300)

    n_x = principal_branch_winding(a, x_loc, sew, b)
    n_xbar = principal_branch_winding(abar, xbar_loc, sew, b)
    nu_c = (np.log(x_loc) + np.log(xbar_loc) - sew.log_rho) / (2j * np.pi)
    nu = int(np.rint(nu_c.real))
    if abs(nu_c - nu) > 1e-8:
        raise RuntimeError(f"identification winding not integral: {nu_c}")
    slip = np.exp(2j * np.pi * tw.kappa * (n_x - n_xbar + (-1) ** a * nu))

    best = None
    for sign in (+1, -1):
        mult = -tw.theta2_mult ** (sign * (a - abar)) * slip
        res = abs(lhs * jac - mult * rhs) / scale
        if best is None or res < best[0]:
            best = (res, sign)
    return best


def annulus_point(a, r_frac, angle, sew):
    """Convenience: a point in annulus a at radius fraction r_frac between the
    inner radius |rho|/r_abar and the outer radius r_a, at the given angle."""
    r_out = sew.r1 if a == 1 else sew.r2
    r_in = abs(sew.rho) / (sew.r2 if a == 1 else sew.r1)
    r = r_in + r_frac * (r_out - r_in)
    return r * np.exp(1j * angle) + puncture_center(a, sew)

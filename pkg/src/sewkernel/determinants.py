"""Determinant evaluations for the sewing formalism: det(I - T) by trace-log
series or pivoted LU, the bosonic moment matrix R with det(I - R)^(-1/2)
continued from rho = 0, and finite minor expansions used as oracles."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import lgamma, log

import numpy as np

from .elliptic import DEFAULT_BUDGET, eisenstein, weierstrass_P


@dataclass(frozen=True)
class DetResult:
    """Determinant value together with the method and an error estimate."""

    value: complex
    N: int
    method: str
    est_error: float


TRACE_MAX_TERMS = 200
TRACE_REL_TOL = 1e-14


def det_I_minus(M, method="trace_log"):
    """det(I - M) for a square complex matrix M.

    method = "trace_log" uses log det(I - M) = -sum_n tr(M^n)/n, valid for
    spectral radius < 1 (checked); method = "lu" uses a pivoted LU
    factorisation.  Returns a DetResult.
    """
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    n = M.shape[0]
    if method == "lu":
        sign, logabs = np.linalg.slogdet(np.eye(n) - M)
        val = sign * np.exp(logabs)
        return DetResult(complex(val), n, "lu", float(abs(val)) * 1e-14 * n)
    if method != "trace_log":
        raise ValueError(f"unknown method {method!r}")

    radius = np.max(np.abs(np.linalg.eigvals(M))) if n else 0.0
    if radius >= 1.0:
        raise ValueError(f"trace-log series diverges: spectral radius {radius:g} >= 1")
    acc = 0.0 + 0.0j
    P = np.eye(n, dtype=complex)
    last = np.inf
    for k in range(1, TRACE_MAX_TERMS + 1):
        P = P @ M
        term = np.trace(P) / k
        acc -= term
        last = abs(term)
        if last < TRACE_REL_TOL * max(abs(acc), 1e-300):
            break
    else:
        raise RuntimeError("trace-log series did not converge within the term cap")
    val = np.exp(acc)
    return DetResult(complex(val), n, "trace_log", float(abs(val)) * max(last, 1e-16))


def _scaled_eisenstein_factor(k, l, tau, b):
    """(k+l-1)!/((k-1)!(l-1)!) * E_{k+l}(tau), assembled in log space so that
    large orders neither overflow nor underflow."""
    m = k + l
    if m % 2 == 1:
        return 0.0j
    logfac = lgamma(m) - lgamma(k) - lgamma(l)
    if m <= 60:
        return np.exp(logfac) * eisenstein(m, tau, b)
    # large order: fold the factorials into the terms of E_m
    from scipy.special import zeta

    const = (-1) ** (m // 2) * 2.0 * np.exp(logfac - m * log(2.0 * np.pi)) * zeta(m)
    q = np.exp(2j * np.pi * tau)
    total = const
    order = max(8, b.qseries_cutoff)
    lgm = lgamma(m)
    for nq in range(1, order + 1):
        s = 0.0
        for d in range(1, nq + 1):
            if nq % d == 0:
                s += np.exp((m - 1) * log(d) - lgm + logfac)
        term = 2.0 * s * q**nq
        total += term
        if abs(term) < b.rel_tol * max(abs(total), 1e-300):
            break
    return complex(total)


def moment_C_boson(k, l, tau, b=None):
    """Bosonic moment C(k, l, tau) = (-1)^(k+1) (k+l-1)!/((k-1)!(l-1)!)
    E_{k+l}(tau)."""
    b = b or DEFAULT_BUDGET
    return (-1) ** (k + 1) * _scaled_eisenstein_factor(k, l, tau, b)


def moment_D_boson(k, l, tau, z, b=None):
    """Bosonic moment D(k, l, tau, z): as moment_C but with the Weierstrass
    function P_{k+l}(tau, z) in place of E_{k+l}(tau)."""
    b = b or DEFAULT_BUDGET
    m = k + l
    logfac = lgamma(m) - lgamma(k) - lgamma(l)
    return (-1) ** (k + 1) * np.exp(logfac) * weierstrass_P(m, z, tau, b)


def build_R(N, sew, b=None):
    """2N x 2N bosonic moment matrix R, blocks indexed like build_T:

        R_ab(k, l) = -(rho^((k+l)/2) / sqrt(k*l))
                     * [[D(k,l,tau,w), C(k,l,tau)],
                        [C(k,l,tau),  D(l,k,tau,w)]]_ab.
    """
    b = b or DEFAULT_BUDGET
    tau, w = sew.tau, sew.w
    R = np.zeros((2 * N, 2 * N), dtype=complex)
    for k in range(1, N + 1):
        for l in range(1, N + 1):
            pref = -sew.rho_pow(0.5 * (k + l)) / np.sqrt(float(k * l))
            Ckl = moment_C_boson(k, l, tau, b)
            R[k - 1, l - 1] = pref * moment_D_boson(k, l, tau, w, b)
            R[k - 1, N + l - 1] = pref * Ckl
            R[N + k - 1, l - 1] = pref * Ckl
            R[N + k - 1, N + l - 1] = pref * moment_D_boson(l, k, tau, w, b)
    return R


def det_inv_sqrt_I_minus_R(N, sew, b=None, n_path=16):
    """det(I - R)^(-1/2) with the square-root branch fixed by analytic
    continuation from rho = 0 (where the value is 1) along the ray s*rho,
    s in [0, 1].

    Scaling rho by s multiplies the (k, l) entry of R by s^((k+l)/2), so the
    whole path is obtained from one matrix assembly.
    """
    R = build_R(N, sew, b)
    k = np.arange(1, N + 1, dtype=float)
    expo = 0.5 * (np.tile(k, 2)[:, None] + np.tile(k, 2)[None, :])
    n = max(4, n_path)
    while True:
        s = np.linspace(0.0, 1.0, n + 1)[1:]
        dets = [np.linalg.det(np.eye(2 * N) - sv**expo * R) for sv in s]
        args = np.unwrap(np.concatenate([[0.0], np.angle(dets)]))
        # demand a well-resolved path: successive argument steps below pi/2
        if np.max(np.abs(np.diff(args))) < 0.5 * np.pi or n >= 1024:
            break
        n *= 2
    logdet = np.log(abs(dets[-1])) + 1j * args[-1]
    return complex(np.exp(-0.5 * logdet))


def minor_expansion_det(R, max_p=12):
    """det(I + R) evaluated as the sum of principal minors,
    sum_p sum_{|m| = p} det R[m, m].  Guarded to dimensions <= max_p."""
    R = np.asarray(R, dtype=complex)
    P = R.shape[0]
    if P > max_p:
        raise ValueError(f"minor expansion guarded to dimension {max_p}, got {P}")
    total = 1.0 + 0.0j
    for p in range(1, P + 1):
        for m in combinations(range(P), p):
            idx = np.ix_(m, m)
            total += np.linalg.det(R[idx])
    return complex(total)


def minor_expansion_bordered(S, U, V, R, max_p=12):
    """Bordered minor expansion: for an n x n block S, n x P block U, P x n
    block V and P x P block R,

        det [[S, U], [V, I + R]]
            = sum_p sum_{|m| = p} det [[S, U[:, m]], [V[m, :], R[m, m]]].
    """
    S = np.asarray(S, dtype=complex)
    U = np.asarray(U, dtype=complex)
    V = np.asarray(V, dtype=complex)
    R = np.asarray(R, dtype=complex)
    P = R.shape[0]
    if P > max_p:
        raise ValueError(f"minor expansion guarded to dimension {max_p}, got {P}")
    total = np.linalg.det(S)
    for p in range(1, P + 1):
        for m in combinations(range(P), p):
            m = list(m)
            top = np.hstack([S, U[:, m]])
            bot = np.hstack([V[m, :], R[np.ix_(m, m)]])
            total += np.linalg.det(np.vstack([top, bot]))
    return complex(total)

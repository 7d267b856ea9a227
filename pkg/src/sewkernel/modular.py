"""Modular transformations of the sewing data and multiplier-system checks.

The relevant group L is generated by the lattice translations / handle twist

    A = mu(1,0,0), B = mu(0,1,0), C = mu(0,0,1),

    mu(a,b,c) = [[1,0,0,b],[a,1,b,c],[0,0,1,-a],[0,0,0,1]],

together with the SL(2,Z) generators S, T embedded in Sp(4,Z) as

    gamma1(a1,b1,c1,d1) = [[a1,0,b1,0],[0,1,0,0],[c1,0,d1,0],[0,0,0,1]].

They act on the sewing point (tau, w, rho), on the lifted logarithm

    lhat = log(-rho / K(w, tau)^2) + 2*pi*i*m

(the integer winding m records the sheet), and on the twist parameters
(alpha1, beta1, beta2, kappa).  The lifted partition function

    Zhat = exp(2*pi*i*beta2*kappa) * exp(kappa^2/2 * lhat)
           * (1/eta) * theta[a1; b1](kappa*w, tau) * det(I - T)

transforms with a character chi: Zhat(g.p, g.tw) = chi(g; tw) * Zhat(p, tw),
and det(I - T) is separately invariant; invariance_residual measures both.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .elliptic import DEFAULT_BUDGET, dedekind_eta, prime_form_K, theta_char_g1
from .determinants import det_I_minus
from .szego import SewingConfig, TwistConfig, build_T

TWO_PI_I = 2j * np.pi

_GENERATORS = ("A", "B", "C", "S", "T")


def _mu_matrix(a, b, c):
    return np.array(
        [[1, 0, 0, b], [a, 1, b, c], [0, 0, 1, -a], [0, 0, 0, 1]], dtype=int
    )


def _gamma1_matrix(a1, b1, c1, d1):
    return np.array(
        [[a1, 0, b1, 0], [0, 1, 0, 0], [c1, 0, d1, 0], [0, 0, 0, 1]], dtype=int
    )


_GEN_MATRIX = {
    "A": _mu_matrix(1, 0, 0),
    "B": _mu_matrix(0, 1, 0),
    "C": _mu_matrix(0, 0, 1),
    "S": _gamma1_matrix(0, 1, -1, 0),
    "T": _gamma1_matrix(1, 1, 0, 1),
}

# mu generators with a single non-zero parameter invert by negating it
_MU_PARAMS = {"A": (1, 0, 0), "B": (0, 1, 0), "C": (0, 0, 1)}
_SL2_PARAMS = {"S": (0, 1, -1, 0), "T": (1, 1, 0, 1)}


@dataclass(frozen=True)
class GroupElement:
    """Word in the generators A, B, C, S, T; each letter is (name, power)
    with power +1 or -1.  The word acts left-to-right on points:
    (g1 g2).p = g1.(g2.p)."""

    word: tuple

    def __post_init__(self):
        for name, power in self.word:
            if name not in _GENERATORS or power not in (1, -1):
                raise ValueError(f"bad generator letter ({name}, {power})")

    @classmethod
    def from_string(cls, text):
        """Parse e.g. 'A B^-1 S' into a GroupElement."""
        letters = []
        for tok in text.split():
            if tok.endswith("^-1"):
                letters.append((tok[:-3], -1))
            else:
                letters.append((tok, 1))
        return cls(tuple(letters))

    @property
    def matrix(self):
        M = np.eye(4, dtype=int)
        for name, power in self.word:
            G = _GEN_MATRIX[name]
            M = M @ (G if power == 1 else np.linalg.inv(G).astype(int))
        return M


@dataclass(frozen=True)
class LiftedPoint:
    """Sewing point together with the winding integer m of lhat, the carried
    branch of log(rho) and the carried anchor windings of the puncture
    branch logs (see SewingConfig.branch_n1 / branch_n2)."""

    tau: complex
    w: complex
    rho: complex
    m: int = 0
    log_rho: complex = None
    n1: int = 0
    n2: int = 0

    def __post_init__(self):
        if self.log_rho is None:
            object.__setattr__(self, "log_rho", complex(np.log(complex(self.rho))))

    def lhat(self, b=None):
        base = np.log(-self.rho / prime_form_K(self.w, self.tau, b) ** 2)
        return complex(base + TWO_PI_I * self.m)

    def sewing(self, **kw):
        return SewingConfig(
            self.tau,
            self.w,
            self.rho,
            log_rho=self.log_rho,
            branch_n1=self.n1,
            branch_n2=self.n2,
            **kw,
        )


def _path_log_K(w0, delta, tau, b, steps=400):
    """Increment of log K(w0 + s*delta, tau) continued along s in [0, 1]."""
    s = np.linspace(0.0, 1.0, steps + 1)
    vals = prime_form_K(w0 + s * delta, tau, b)
    ang = np.unwrap(np.angle(vals))
    if np.max(np.abs(np.diff(ang))) > 0.5 * np.pi:
        return _path_log_K(w0, delta, tau, b, steps * 4)
    return complex(
        np.log(abs(vals[-1])) - np.log(abs(vals[0])) + 1j * (ang[-1] - ang[0])
    )


def _round_winding(value, what):
    n = int(np.rint(np.real(value)))
    if abs(value - n) > 1e-8:
        raise RuntimeError(f"{what} winding update not integral: {value}")
    return n


def _act_point_one(name, power, p, b):
    """Action of a single generator letter on a LiftedPoint.

    For the translation generators the carried branches of log(rho) and of the
    puncture anchor logs are transported by continuing log K(w, tau) along the
    straight path of the w-translation; the net changes are 2*pi*i integers
    recorded in the winding fields.
    """
    tau, w, rho = p.tau, p.w, p.rho
    if name in _MU_PARAMS:
        a, bb, c = (power * v for v in _MU_PARAMS[name])
        delta = TWO_PI_I * (a * tau + bb)
        tau2, w2, rho2 = tau, w + delta, rho
        shift = TWO_PI_I * a**2 * tau + 2.0 * a * w + TWO_PI_I * (a * bb + c)
        if delta == 0:
            dlogK = 0.0 + 0.0j
        else:
            dlogK = _path_log_K(w, delta, tau, b)
        # log(rho) rides along the lift of lhat = log(-rho / K^2)
        nu = _round_winding((shift + 2.0 * dlogK) / TWO_PI_I, "log_rho")
        log_rho2 = p.log_rho + TWO_PI_I * nu
        # anchor logs: lambda_1 ~ log(-K(w)), lambda_2 ~ log(1/K(w))
        anc1 = np.log(-prime_form_K(w, tau, b)) + TWO_PI_I * p.n1 + dlogK
        anc2 = np.log(1.0 / prime_form_K(w, tau, b)) + TWO_PI_I * p.n2 - dlogK
        n1 = _round_winding(
            (anc1 - np.log(-prime_form_K(w2, tau2, b))) / TWO_PI_I, "anchor-1"
        )
        n2 = _round_winding(
            (anc2 - np.log(1.0 / prime_form_K(w2, tau2, b))) / TWO_PI_I, "anchor-2"
        )
    else:
        a1, b1, c1, d1 = _SL2_PARAMS[name]
        if power == -1:
            a1, b1, c1, d1 = d1, -b1, -c1, a1
        den = c1 * tau + d1
        tau2 = (a1 * tau + b1) / den
        w2 = w / den
        rho2 = rho / den**2
        shift = -c1 * w**2 / (TWO_PI_I * den)
        log_den = np.log(complex(den))
        log_rho2 = p.log_rho - 2.0 * log_den
        # the prime form obeys K(w/den, tau2) = K(w, tau) * den^-1
        # * exp(-shift/2); transport the anchor logs multiplicatively on the
        # same branch of log(den) as log(rho)
        anc1 = np.log(-prime_form_K(w, tau, b)) + TWO_PI_I * p.n1 - log_den - 0.5 * shift
        anc2 = np.log(1.0 / prime_form_K(w, tau, b)) + TWO_PI_I * p.n2 + log_den + 0.5 * shift
        n1 = _round_winding(
            (anc1 - np.log(-prime_form_K(w2, tau2, b))) / TWO_PI_I, "anchor-1"
        )
        n2 = _round_winding(
            (anc2 - np.log(1.0 / prime_form_K(w2, tau2, b))) / TWO_PI_I, "anchor-2"
        )
    target = p.lhat(b) + shift
    base2 = np.log(-rho2 / prime_form_K(w2, tau2, b) ** 2)
    m2_int = _round_winding((target - base2) / TWO_PI_I, "lhat")
    return LiftedPoint(tau2, w2, rho2, m2_int, complex(log_rho2), n1, n2)


def act_point(g, p, b=None):
    """g.p for a GroupElement g acting on a LiftedPoint p."""
    b = b or DEFAULT_BUDGET
    for name, power in reversed(g.word):
        p = _act_point_one(name, power, p, b)
    return p


def _act_twist_one(name, power, tw):
    al, be, b2, kap = tw.alpha1, tw.beta1, tw.beta2, tw.kappa
    if name in _MU_PARAMS:
        a, bb, c = (power * v for v in _MU_PARAMS[name])
        return replace(
            tw,
            alpha1=al - a * kap,
            beta1=be - bb * kap,
            beta2=b2 + a * be - bb * al - c * kap + 0.5 * (a * bb - c),
        )
    if name == "S":
        if power == 1:
            return replace(tw, alpha1=be, beta1=-al)
        return replace(tw, alpha1=-be, beta1=al)
    if name == "T":
        if power == 1:
            return replace(tw, beta1=be - al - 0.5)
        return replace(tw, beta1=be + al + 0.5)
    raise ValueError(name)


def act_twist(g, tw):
    """g.tw for a GroupElement acting on the twist parameters."""
    for name, power in reversed(g.word):
        tw = _act_twist_one(name, power, tw)
    return tw


def _chi_generator(name, tw):
    al, be, kap = tw.alpha1, tw.beta1, tw.kappa
    if name == "A":
        return 1.0 + 0.0j
    if name == "B":
        return complex(np.exp(-TWO_PI_I * al * kap))
    if name == "C":
        return complex(np.exp(-1j * np.pi * kap * (kap + 1.0)))
    if name == "S":
        return complex(np.exp(-TWO_PI_I * al * be))
    if name == "T":
        return complex(np.exp(-1j * np.pi * (al**2 + al + 1.0 / 12.0)))
    raise ValueError(name)


def chi_multiplier(g, tw):
    """Multiplier character chi(g; tw), built from the generator values by
    the cocycle rule chi(g h; tw) = chi(g; h.tw) * chi(h; tw)."""
    if not g.word:
        return 1.0 + 0.0j
    head, tail = g.word[0], GroupElement(g.word[1:])
    tw_tail = act_twist(tail, tw)
    name, power = head
    if power == 1:
        val = _chi_generator(name, tw_tail)
    else:
        # chi(g^-1; tw) = 1 / chi(g; g^-1 . tw)
        tw_inv = _act_twist_one(name, -1, tw_tail)
        val = 1.0 / _chi_generator(name, tw_inv)
    return complex(val * chi_multiplier(tail, tw))


def zhat(p, tw, N=12, quad_M=256, b=None):
    """Lifted genus-two fermionic partition function at a LiftedPoint."""
    b = b or DEFAULT_BUDGET
    sew = p.sewing()
    T = build_T(N, sew, tw, quad_M, b)
    det = det_I_minus(T).value
    val = np.exp(TWO_PI_I * tw.beta2 * tw.kappa)
    val *= np.exp(0.5 * tw.kappa**2 * p.lhat(b))
    val *= theta_char_g1(tw.alpha1, tw.beta1, tw.kappa * p.w, p.tau, b)
    val /= dedekind_eta(p.tau, b)
    return complex(val * det), complex(det)


def invariance_residual(g, p, tw, N=12, quad_M=256, b=None, chi_scale=1.0):
    """Residuals of the modular multiplier system for the group element g at
    the lifted point p with twist tw.

    Returns (full_residual, det_residual) with

        full_residual = |Zhat(g.p, g.tw) / (chi(g; tw) * Zhat(p, tw)) - 1|,
        det_residual  = |det(I - T)(g.p, g.tw) / det(I - T)(p, tw) - 1|.

    chi_scale multiplies the character (a deliberate perturbation knob for
    self-testing the sensitivity of the check).
    """
    z0, d0 = zhat(p, tw, N, quad_M, b)
    p2 = act_point(g, p, b)
    tw2 = act_twist(g, tw)
    z1, d1 = zhat(p2, tw2, N, quad_M, b)
    chi = chi_multiplier(g, tw) * chi_scale
    return abs(z1 / (chi * z0) - 1.0), abs(d1 / d0 - 1.0)

"""Shared fixtures: standard sewing/twist configurations and point helpers."""

import numpy as np
import pytest

from sewkernel import SewingConfig, TwistConfig

TAU = 0.3 + 1.1j
W = 0.5 + 2.2j
RHO = 1e-3


@pytest.fixture(scope="session")
def sew():
    return SewingConfig(TAU, W, RHO)


@pytest.fixture(scope="session")
def tw():
    return TwistConfig(alpha1=0.15, beta1=0.25, beta2=0.1, kappa=0.2)


@pytest.fixture(scope="session")
def tw_untwisted():
    """kappa = 0 configuration with theta2 = i (the two sheets coincide)."""
    return TwistConfig(alpha1=0.0, beta1=0.0, beta2=0.25, kappa=0.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260823)


def generic_point(rng, tau=TAU, scale=0.9):
    """A random point of the fundamental domain, kept away from the lattice."""
    while True:
        z = 2j * np.pi * (
            (0.1 + 0.8 * rng.random()) * tau + (0.1 + 0.8 * rng.random())
        ) * scale
        if abs(z) > 0.3:
            return z

from __future__ import annotations

import random

import pytest

from perimdef import validate_params
from perimdef.geometry import assumption_clauses


@pytest.fixture(scope="session")
def params():
    """Baseline experiment parameters (r_t=5, rho_t=10, rho_a=1, nu=0.8)."""
    return validate_params(5.0, 10.0, 1.0, 0.8)


def make_valid_params(rng: random.Random):
    """Draw a random parameter set satisfying the game assumptions.

    The annulus width is sampled above the binding clause, so validation
    succeeds by construction.
    """
    while True:
        nu = rng.uniform(0.25, 0.92)
        rho_a = rng.uniform(0.05, 2.5)
        r_t = rng.uniform(0.5, 12.0)
        first, second = assumption_clauses(r_t, 1.0, rho_a, nu)
        rho_t = max(first, second) * rng.uniform(1.01, 2.8)
        try:
            return validate_params(r_t, rho_t, rho_a, nu)
        except ValueError:
            continue


@pytest.fixture
def random_valid_params():
    return make_valid_params

import math

import numpy as np
import pytest

from polardirac.junction import junction_params
from polardirac.model import Branch, validate_params


@pytest.fixture(scope="session")
def unit_params():
    """m = |eps| = b = 1, so H = c = k = 1."""
    return validate_params(m=1.0, eps_abs=1.0, b=1.0)


@pytest.fixture(scope="session")
def k1_params():
    """Junction-consistent parameters at k = 1 in units |eps| = 1."""
    return junction_params(1.0)


def random_points(rng, branch, params, n, r_lo=0.05, r_hi=5.0, margin=1e-3, band=1e-2):
    """Uniform random (r, theta) pairs away from the poles and the singular circle."""
    from polardirac.fields import x_profile

    out = []
    while len(out) < n:
        r = rng.uniform(r_lo, r_hi)
        th = rng.uniform(margin, math.pi - margin)
        if float(x_profile(branch, r, params)) ** 2 + math.cos(th) ** 2 > band**2:
            out.append((r, th))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240)


BRANCHES = list(Branch)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)

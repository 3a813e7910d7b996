import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polardirac.junction import (
    classify_roots,
    constant_ratio,
    continuity_report,
    discr_residual,
    first_factor,
    junction_params,
    mass_spectrum_scan,
    quartic,
    solve_mass,
)
from polardirac.model import ModelParams, ParameterError


def test_unit_k():
    res = solve_mass(1.0)
    assert res.y == pytest.approx(1.514, abs=1e-3)
    assert res.mass_ratio == pytest.approx(1.646, abs=2e-3)
    assert res.classification.label == "1pos/1neg/2cplx"


def test_large_k_limit():
    assert solve_mass(100.0).mass_ratio == pytest.approx(0.5, rel=0.05)


def test_small_k_heavy():
    assert solve_mass(0.01).mass_ratio > 10


@pytest.mark.parametrize("k", [0.0, -1.0, math.inf, math.nan])
def test_invalid_k(k):
    with pytest.raises(ParameterError):
        solve_mass(k)


@given(st.floats(1e-3, 1e3))
def test_root_is_accurate(k):
    res = solve_mass(k)
    assert res.y > 0
    assert res.quartic_residual <= 1e-12


@given(st.floats(1e-3, 1e3), st.floats(1e-6, 1e3))
def test_first_factor_positive(k, y):
    assert first_factor(y, k) > 0


@given(st.floats(0.01, 10), st.floats(0.05, 10), st.floats(0.1, 3))
def test_matching_condition_factorizes(k, y, eps):
    # matching condition at b, in terms of k and y, equals the product of the two factors
    p = ModelParams(m=(y * y + 1) / 2 * eps, eps_abs=eps, b=k / eps)
    want = first_factor(y, k) * quartic(y, k) / (3 * eps * y * y * (y * y + 1) * (1 + k * y))
    scale = first_factor(y, k) * max(k * k * y**4, 3.0) / (3 * eps * y * y * (y * y + 1) * (1 + k * y))
    assert abs(discr_residual(p) - want) <= 1e-12 * scale


def test_classification_on_scan():
    for k in np.geomspace(0.1, 10, 50):
        c = classify_roots(k)
        assert (c.n_positive, c.n_negative, c.n_complex) == (1, 1, 2)


def test_mass_decreases_with_k():
    x = [row["x"] for row in mass_spectrum_scan(np.geomspace(0.1, 10, 50))]
    assert np.all(np.diff(x) < 0)


def test_constant_ratio_at_unit_k():
    res = solve_mass(1.0)
    assert res.gamma2_over_q2 == pytest.approx(93.74, rel=1e-3)
    # Gamma^2/Q^2 = 2 H^3 b^4 m e^{2Hb}/(1+Hb) recomputed in dimensional form
    p = junction_params(2.0, eps_abs=0.3)
    H = math.sqrt(p.eps_abs * (2 * p.m - p.eps_abs))
    Hb = H * p.b
    want = 2 * H**3 * p.b**4 * p.m * math.exp(2 * Hb) / (1 + Hb)
    assert p.Gamma2 / p.Q2 == pytest.approx(want, rel=1e-13)


def test_constant_ratio_vanishes_with_ky():
    assert constant_ratio(1e-8, 1.0) < 1e-20


@pytest.mark.parametrize("k", [0.3, 1.0, 4.0])
def test_continuity_at_junction(k):
    rep = continuity_report(junction_params(k, eps_abs=0.8, Q2=2.5))
    checks = rep.checks()
    assert checks["X"] and checks["phi2"] and checks["beta_principal"]
    assert abs(rep.discr) < 1e-12
    assert rep.dbeta_resolved == pytest.approx(math.pi, abs=1e-12)


def test_derivatives_jump_at_junction():
    # X' and V' are not continuous at b; V' is positive inside and negative outside
    rep = continuity_report(junction_params(1.0))
    assert rep.dX_prime_fd == pytest.approx(rep.values["X_prime_in"] - rep.values["X_prime_ex"], abs=1e-8)
    assert rep.values["V_prime_in"] > 0 > rep.values["V_prime_ex"]
    assert rep.dX_prime_ode == pytest.approx(rep.dX_prime_fd, abs=1e-8)
    assert rep.dV_prime_ode == pytest.approx(rep.dV_prime_fd, abs=1e-8)


def test_perturbed_mass_breaks_continuity():
    p = junction_params(1.0)
    rep = continuity_report(dataclasses.replace(p, m=1.01 * p.m, E=1.01 * p.m))
    assert 1e-3 < abs(rep.dX) < 1e-1
    assert abs(discr_residual(dataclasses.replace(p, m=1.01 * p.m, E=1.01 * p.m))) > 1e-3


def test_scan_rows():
    rows = mass_spectrum_scan([0.5, 2.0])
    assert len(rows) == 2
    r = rows[0]
    roots = [complex(r[f"root{i}_re"], r[f"root{i}_im"]) for i in range(1, 5)]
    assert min(abs(z - r["y"]) for z in roots) < 1e-10
    assert r["x"] == pytest.approx((r["y"] ** 2 + 1) / 2)


def test_compton_diagnostic():
    res = solve_mass(1.0)
    assert res.compton["b_over_tension_length"] == 1.0
    assert res.compton["b_over_mass_length"] == pytest.approx(res.mass_ratio)

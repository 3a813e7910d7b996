import math

import numpy as np
import pytest

from polardirac.model import Branch, PolarPoint
from polardirac.verify import (
    EQUATIONS,
    ExcludedPointError,
    FAMILIES,
    convergence_order,
    default_grid,
    residual_general_polar,
    residual_polar_dirac,
    residual_reduced,
    residual_suite,
)

from conftest import BRANCHES

IN, EX = Branch.INTERIOR, Branch.EXTERIOR


def test_polar_interior_example(k1_params):
    assert np.max(np.abs(residual_polar_dirac(IN, PolarPoint(1.0, 1.0), k1_params, 1e-4))) <= 1e-6


def test_polar_exterior_example(unit_params):
    assert np.max(np.abs(residual_polar_dirac(EX, PolarPoint(2.0, 2.0), unit_params, 1e-4))) <= 1e-6


def test_sin_beta_mutation_trips_a_and_c(k1_params):
    res = np.abs(residual_polar_dirac(IN, PolarPoint(1.0, 1.0), k1_params, 1e-4, mutate="sin_beta"))
    assert res[0] > 0.1 and res[2] > 0.1


def test_reduced_examples(k1_params):
    p = k1_params
    H = math.sqrt(p.eps_abs * (2 * p.m - p.eps_abs))
    assert np.max(np.abs(residual_reduced(IN, PolarPoint(0.5 / p.m, 1.0), p, 1e-4))) <= 1e-6
    assert np.max(np.abs(residual_reduced(EX, PolarPoint(3.0 / H, 2.0), p, 1e-4))) <= 1e-6


def test_reduced_excludes_x_zero(k1_params):
    with pytest.raises(ExcludedPointError):
        residual_reduced(IN, PolarPoint(1.5 / k1_params.m, 1.0), k1_params, 1e-4)


@pytest.mark.parametrize("branch", BRANCHES)
def test_covariant_random_points(branch, k1_params, rng):
    for _ in range(10):
        pt = PolarPoint(rng.uniform(0.3, 3.0), rng.uniform(0.1, math.pi - 0.1))
        assert np.max(np.abs(residual_general_polar(branch, pt, k1_params, 1e-4))) <= 1e-5


def test_angular_momentum_mutation(k1_params):
    res = np.abs(residual_general_polar(EX, PolarPoint(1.2, 1.0), k1_params, 1e-4, mutate="L_sign"))
    assert res.max() > 0.1


def test_unknown_mutation(k1_params):
    with pytest.raises(ValueError):
        residual_polar_dirac(IN, PolarPoint(1.0, 1.0), k1_params, 1e-4, mutate="E_sign")


def test_order_of_a_smooth_error():
    est = convergence_order(lambda h: 3.0 * h**2 + h**4, (4e-3, 2e-3, 1e-3))
    assert est.order == pytest.approx(2.0, abs=0.1)


def test_order_of_mutated_residual_difference(k1_params):
    # the FD error of a mutated residual is still second order
    pt = PolarPoint(1.0, 1.0)
    ref = residual_polar_dirac(IN, pt, k1_params, 1e-6, mutate="sin_beta")[0]
    est = convergence_order(
        lambda h: residual_polar_dirac(IN, pt, k1_params, h, mutate="sin_beta")[0] - ref, (4e-2, 2e-2, 1e-2)
    )
    assert est.order == pytest.approx(2.0, abs=0.1)


def test_exact_zero_is_saturated():
    est = convergence_order(lambda h: 0.0, (1e-2, 1e-3, 1e-4))
    assert est.saturated and est.order is None


def test_two_steps_rejected():
    with pytest.raises(ValueError):
        convergence_order(lambda h: h * h, (1e-2, 1e-3))


def test_regularised_terms_near_pole(k1_params):
    res = residual_polar_dirac(EX, PolarPoint(1.3, 1e-3), k1_params, 1e-4)
    assert np.all(np.isfinite(res)) and np.max(np.abs(res)) < 1e-6


def test_families_cover_equations():
    assert sum(len(v) for v in FAMILIES.values()) == len(EQUATIONS) == 16


def test_small_suite_report(k1_params):
    pts = default_grid(EX, k1_params, 4, 4)
    rep = residual_suite(EX, k1_params, pts, [1e-3, 1e-4], order_h=[4e-3, 2e-3, 1e-3])
    assert rep.failures(1e-6, 1e-4) == []
    rows = rep.to_rows()
    assert len(rows) == 16 and {"max_h=0.001", "max_h=0.0001", "order"} <= set(rows[0])
    assert rep.orders["dep1_t"].saturated


def test_suite_flags_mutation(k1_params):
    pts = default_grid(IN, k1_params, 4, 4)
    rep = residual_suite(IN, k1_params, pts, [1e-4], families=["polar"], mutate="m_sign")
    assert set(rep.failures(1e-6, 1e-4)) == {"a", "b", "c", "d"}

import math

import numpy as np
import pytest

from polardirac.fields import field_sample
from polardirac.geometry import (
    CLIFFORD,
    ETA,
    PH,
    RR,
    TH,
    T,
    bilinears_from_polar,
    connection_field,
    curvature_flatness,
    frame_generators,
    frame_lorentz,
    kinematic_errors,
    kinematic_vectors,
    levi_civita,
    metric_at,
    orthonormality_error,
    reconstruct_spinor,
    spherical_reference_connection,
    spinor_bilinears,
    spinor_lift,
    tensorial_connection_at,
    tetrad_at,
    trace_vectors,
)
from polardirac.model import Branch, DomainError, PolarPoint
from polardirac.verify import convergence_order

from conftest import BRANCHES, random_points

IN, EX = Branch.INTERIOR, Branch.EXTERIOR


@pytest.mark.parametrize("branch", BRANCHES)
def test_frame_and_kinematics_at_random_points(branch, k1_params, rng):
    for r, th in random_points(rng, branch, k1_params, 100):
        s = field_sample(branch, PolarPoint(r, th), k1_params)
        met = metric_at(r, th)
        assert orthonormality_error(tetrad_at(s), met) <= 1e-12
        errs = kinematic_errors(kinematic_vectors(s, k1_params), met)
        assert max(abs(e) for e in errs) <= 1e-12


def test_equatorial_interior_frame(k1_params):
    s = field_sample(IN, PolarPoint(0.4, math.pi / 2), k1_params)
    assert s.X > 0
    assert abs(tetrad_at(s)[3, RR]) < 1e-15


def test_kinematic_vectors_are_frame_legs(k1_params):
    # u_mu and s_mu are the lowered legs e_0 and e_3
    s = field_sample(EX, PolarPoint(2.0, 0.9), k1_params)
    e = tetrad_at(s)
    g = metric_at(2.0, 0.9).g
    kin = kinematic_vectors(s, k1_params)
    assert np.allclose(g @ e[0], kin.u, atol=1e-15)
    assert np.allclose(g @ e[3], kin.s, atol=1e-15)
    assert kin.P[T] == k1_params.E and kin.P[PH] == -0.5


def test_metric_christoffels_match_fd():
    r, th, h = 1.7, 0.8, 1e-6
    met = metric_at(r, th)
    dg = np.zeros((4, 4, 4))
    dg[RR] = (metric_at(r + h, th).g - metric_at(r - h, th).g) / (2 * h)
    dg[TH] = (metric_at(r, th + h).g - metric_at(r, th - h).g) / (2 * h)
    # Gamma^l_{mn} = g^{lk} (d_m g_kn + d_n g_km - d_k g_mn) / 2
    want = 0.5 * np.einsum("lk,mkn->lmn", met.g_inv, dg + dg.transpose(2, 1, 0)) - 0.5 * np.einsum(
        "lk,kmn->lmn", met.g_inv, dg
    )
    assert np.allclose(met.christoffel, want, atol=1e-8)


def test_levi_civita_normalisation():
    met = metric_at(2.0, 0.5)
    eps = levi_civita(met)
    assert eps[T, RR, TH, PH] == pytest.approx(4 * math.sin(0.5))
    assert eps[RR, T, TH, PH] == -eps[T, RR, TH, PH]


def test_interior_connection_has_no_tension_terms(k1_params):
    R = tensorial_connection_at(IN, PolarPoint(0.8, 1.0), k1_params).R
    for idx in [(RR, T, T), (PH, RR, T), (TH, T, T), (PH, TH, T)]:
        assert R[idx] == 0.0


@pytest.mark.parametrize("branch", BRANCHES)
def test_connection_structure(branch, k1_params):
    r, th = 1.3, 0.7
    R = tensorial_connection_at(branch, PolarPoint(r, th), k1_params).R
    assert R[RR, PH, PH] + r * math.sin(th) ** 2 == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(R, -R.transpose(1, 0, 2))


def test_alpha_derivative_component_against_fd(k1_params):
    r, th = 1.3, 0.7
    R = tensorial_connection_at(EX, PolarPoint(r, th), k1_params).R
    for h in (1e-3, 5e-4):
        a = [math.asinh(field_sample(EX, PolarPoint(r, t), k1_params).alpha_pair.sin_value) for t in (th - h, th + h)]
        fd = r * math.sin(th) * (a[1] - a[0]) / (2 * h)
        assert abs(R[T, PH, TH] - fd) < 2 * h * h


def test_spherical_reference_traces():
    r, th = 1.5, 0.6
    conn = spherical_reference_connection(PolarPoint(r, th))
    R_mu, B_mu = trace_vectors(conn)
    # R_mu = d_mu ln(r^2 sin) for the bare spherical frame
    assert R_mu[RR] == pytest.approx(2 / r)
    assert R_mu[TH] == pytest.approx(math.cos(th) / math.sin(th))
    assert R_mu[T] == 0 and R_mu[PH] == 0
    assert np.allclose(B_mu, 0.0, atol=1e-15)


def test_interior_equatorial_traces_finite(k1_params):
    conn = tensorial_connection_at(IN, PolarPoint(0.6, math.pi / 2), k1_params)
    R_mu, B_mu = trace_vectors(conn)
    assert np.all(np.isfinite(R_mu)) and np.all(np.isfinite(B_mu))


def test_flatness_example(k1_params):
    f = connection_field(IN, k1_params)
    a = curvature_flatness(f, PolarPoint(1.0, 1.0), 1e-3)
    b = curvature_flatness(f, PolarPoint(1.0, 1.0), 5e-4)
    assert a < 1e-4
    assert a / b == pytest.approx(4.0, rel=0.05)


def test_flatness_of_spherical_frame():
    f = lambda r, th: spherical_reference_connection(PolarPoint(r, th))
    est = convergence_order(lambda h: curvature_flatness(f, PolarPoint(1.2, 0.9), h), (4e-3, 2e-3, 1e-3))
    assert est.residuals[-1] < 1e-5
    assert est.order == pytest.approx(2.0, abs=0.2)


@pytest.mark.parametrize("branch", BRANCHES)
def test_flatness_order_at_random_points(branch, k1_params, rng):
    f = connection_field(branch, k1_params)
    for r, th in random_points(rng, branch, k1_params, 20, r_lo=0.2, r_hi=3.0, margin=0.2, band=0.1):
        est = convergence_order(lambda h: curvature_flatness(f, PolarPoint(r, th), h), (4e-3, 2e-3, 1e-3))
        assert est.order == pytest.approx(2.0, abs=0.2)


def test_flatness_stencil_outside_domain(k1_params):
    with pytest.raises(DomainError):
        curvature_flatness(connection_field(IN, k1_params), PolarPoint(1e-4, 1.0), 1e-3)


def test_clifford_identities():
    assert CLIFFORD.anticommutator_error() == 0.0
    assert CLIFFORD.pi_relation_error() < 1e-15
    p = CLIFFORD.pi
    assert np.allclose(p, np.diag([-1, -1, 1, 1]))
    for g in CLIFFORD.gamma:
        assert np.allclose(p @ g + g @ p, 0)


def test_spinor_lift_covariance(rng):
    from polardirac.geometry import boost_generator, rotation_generator
    from scipy.linalg import expm

    G = rotation_generator(1, 0.3) + boost_generator(2, -0.7) + rotation_generator(3, 1.1)
    S = spinor_lift(G)
    Lam = expm(G)
    Si = np.linalg.inv(S)
    for a in range(4):
        lhs = Si @ CLIFFORD.gamma[a] @ S
        rhs = np.einsum("b,bij->ij", Lam[a], CLIFFORD.gamma)
        assert np.allclose(lhs, rhs, atol=1e-13)


def test_frame_generators_reproduce_tetrad(k1_params):
    from scipy.linalg import expm

    s = field_sample(EX, PolarPoint(2.2, 2.1), k1_params)
    Lam = np.eye(4)
    for G in frame_generators(s, azimuth=0.4):
        Lam = Lam @ expm(G)
    assert np.allclose(Lam, frame_lorentz(s, azimuth=0.4), atol=1e-13)


def _relerr(got, want, phi2):
    return np.max(np.abs(got - want)) / max(np.max(np.abs(want)), 2 * phi2)


@pytest.mark.parametrize("branch", BRANCHES)
def test_spinor_reproduces_bilinears(branch, k1_params, rng):
    for r, th in random_points(rng, branch, k1_params, 25):
        az = rng.uniform(0, 2 * math.pi)
        s = field_sample(branch, PolarPoint(r, th), k1_params)
        want = bilinears_from_polar(s, kinematic_vectors(s, k1_params), azimuth=az)
        got = spinor_bilinears(reconstruct_spinor(s, azimuth=az))
        assert _relerr(got.as_vector(), want.as_vector(), s.phi2) <= 1e-10
        assert want.Phi**2 + want.Theta**2 == pytest.approx(4 * s.phi2**2, rel=1e-12)
        assert want.U @ ETA @ want.U == pytest.approx(4 * s.phi2**2, rel=1e-12)
        assert want.S @ ETA @ want.S == pytest.approx(-4 * s.phi2**2, rel=1e-12)


def test_equatorial_exterior_bilinears(k1_params):
    s = field_sample(EX, PolarPoint(3.0, math.pi / 2), k1_params)
    assert s.X > 0
    b = bilinears_from_polar(s, kinematic_vectors(s, k1_params))
    assert abs(b.Theta) < 1e-15 * s.phi2 and b.Phi == pytest.approx(2 * s.phi2)


def test_bilinears_on_x_zero_sphere(k1_params):
    r0 = 1.5 / k1_params.m
    s = field_sample(IN, PolarPoint(r0, 0.8), k1_params)
    b = bilinears_from_polar(s, kinematic_vectors(s, k1_params))
    assert abs(b.Phi) < 1e-15 and abs(b.Theta) == pytest.approx(2 * s.phi2)


def test_beta_shift_flips_scalars(k1_params):
    s = field_sample(IN, PolarPoint(0.7, 1.2), k1_params)
    a = spinor_bilinears(reconstruct_spinor(s))
    b = spinor_bilinears(reconstruct_spinor(s, beta=s.beta_resolved + math.pi))
    assert b.Phi == pytest.approx(-a.Phi) and b.Theta == pytest.approx(-a.Theta)
    assert np.allclose(b.U, a.U) and np.allclose(b.S, a.S)


def test_reference_spinor_on_equator():
    from polardirac.fields import AnglePair, FieldSample

    s = FieldSample(
        r=1.0, theta=math.pi / 2, branch=IN, X=1.0, Z=1.0, zeta=0.0, V=0.0,
        beta_pair=AnglePair(0.0, 1.0), beta_principal=0.0, beta_resolved=0.0,
        alpha_pair=AnglePair(0.0, 1.0), rho_pair=AnglePair(1.0, 0.0), phi2=0.25,
    )
    b = spinor_bilinears(reconstruct_spinor(s))
    assert b.Phi == pytest.approx(0.5) and abs(b.Theta) < 1e-15

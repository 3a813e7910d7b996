"""Flat spherical geometry, tetrads, tensorial connection and spinor bilinears.

Coordinates are ordered (t, r, theta, phi) with signature (+, -, -, -).
Tensorial-connection arrays ``R[l, n, k]`` hold all-lower coordinate
components, antisymmetric in the first two slots.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.linalg import expm

from .fields import FieldSample, angle_derivatives, field_sample
from .model import Branch, DomainError, ModelParams, PolarPoint

T, RR, TH, PH = 0, 1, 2, 3
ETA = np.diag([1.0, -1.0, -1.0, -1.0])


def _perm_sign(p) -> int:
    sign, p = 1, list(p)
    for i in range(len(p)):
        while p[i] != i:
            j = p[i]
            p[i], p[j] = p[j], p[i]
            sign = -sign
    return sign


_LEVI = np.zeros((4, 4, 4, 4))
for _p in itertools.permutations(range(4)):
    _LEVI[_p] = _perm_sign(_p)


# --------------------------------------------------------------------------
# metric
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricData:
    g: np.ndarray  # (4, 4) lower
    g_inv: np.ndarray
    christoffel: np.ndarray  # Gamma^l_{mn} as [l, m, n]
    sqrt_g: float


def metric_at(r: float, theta: float) -> MetricData:
    s, c = math.sin(theta), math.cos(theta)
    g = np.diag([1.0, -1.0, -r * r, -(r * s) ** 2])
    G = np.zeros((4, 4, 4))
    G[RR, TH, TH] = -r
    G[RR, PH, PH] = -r * s * s
    G[TH, RR, TH] = G[TH, TH, RR] = 1.0 / r
    G[TH, PH, PH] = -s * c
    G[PH, RR, PH] = G[PH, PH, RR] = 1.0 / r
    G[PH, TH, PH] = G[PH, PH, TH] = c / s
    return MetricData(g=g, g_inv=np.diag(1.0 / np.diag(g)), christoffel=G, sqrt_g=r * r * s)


def levi_civita(metric: MetricData) -> np.ndarray:
    """Lower-index Levi-Civita tensor with eps_{t r theta phi} = +sqrt|g|."""
    return metric.sqrt_g * _LEVI


# --------------------------------------------------------------------------
# frame and kinematics
# --------------------------------------------------------------------------

def tetrad_at(sample: FieldSample) -> np.ndarray:
    """Frame vectors ``e[a, mu]`` (upper coordinate index)."""
    r, s = sample.r, math.sin(sample.theta)
    sha, cha = sample.alpha_pair.sin_value, sample.alpha_pair.cos_value
    sr, cr = sample.rho_pair.sin_value, sample.rho_pair.cos_value
    e = np.zeros((4, 4))
    e[0, T], e[2, T] = cha, -sha
    e[1, RR], e[3, RR] = sr, -cr
    e[1, TH], e[3, TH] = -cr / r, -sr / r
    e[0, PH], e[2, PH] = -sha / (r * s), cha / (r * s)
    return e


def orthonormality_error(e: np.ndarray, metric: MetricData) -> float:
    return float(np.abs(e @ metric.g @ e.T - ETA).max())


@dataclass(frozen=True)
class KinematicVectors:
    u: np.ndarray  # velocity covector u_mu
    s: np.ndarray  # spin covector s_mu
    P: np.ndarray  # P_mu


def kinematic_vectors(sample: FieldSample, params: ModelParams, L: float | None = None) -> KinematicVectors:
    """Velocity, spin and momentum covectors.  ``L`` overrides P_phi (mutation tests)."""
    r, st = sample.r, math.sin(sample.theta)
    sha, cha = sample.alpha_pair.sin_value, sample.alpha_pair.cos_value
    sr, cr = sample.rho_pair.sin_value, sample.rho_pair.cos_value
    u = np.array([cha, 0.0, 0.0, r * st * sha])
    s = np.array([0.0, cr, r * sr, 0.0])
    P = np.array([params.E, 0.0, 0.0, params.L if L is None else L])
    return KinematicVectors(u=u, s=s, P=P)


def kinematic_errors(kin: KinematicVectors, metric: MetricData) -> tuple[float, float, float]:
    """(u.u - 1, s.s + 1, u.s)."""
    gi = metric.g_inv
    return (
        float(kin.u @ gi @ kin.u - 1.0),
        float(kin.s @ gi @ kin.s + 1.0),
        float(kin.u @ gi @ kin.s),
    )


# --------------------------------------------------------------------------
# tensorial connection
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TensorialConnection:
    r: float
    theta: float
    R: np.ndarray  # R_{l n k}

    def raised_first(self) -> np.ndarray:
        """R^l_{n k}."""
        return np.einsum("la,ank->lnk", metric_at(self.r, self.theta).g_inv, self.R)


def _assemble(r, theta, eps, sha, cha, sr, cr, d) -> np.ndarray:
    st, ct = math.sin(theta), math.cos(theta)
    R = np.zeros((4, 4, 4))

    def put(a, b, k, v):
        R[a, b, k] = v
        R[b, a, k] = -v

    put(RR, PH, PH, -r * st * st)
    put(TH, PH, PH, -r * r * ct * st)
    put(RR, T, T, -2.0 * eps * sha * sr)
    put(PH, RR, T, 2.0 * eps * r * st * cha * sr)
    put(TH, T, T, 2.0 * eps * r * sha * cr)
    put(PH, TH, T, -2.0 * eps * r * r * st * cha * cr)
    put(T, PH, TH, r * st * d["dth_alpha"])
    put(T, PH, RR, r * st * d["dr_alpha"])
    put(RR, TH, TH, -r * (1.0 + d["dth_rho"]))
    put(TH, RR, RR, r * d["dr_rho"])
    return R


def tensorial_connection_at(branch: Branch, point: PolarPoint, params: ModelParams) -> TensorialConnection:
    """Coordinate components of the tensorial connection for the closed-form solution.

    Derivatives of alpha and rho are exact (chain rule through X(r)).
    """
    branch = Branch.parse(branch)
    smp = field_sample(branch, point, params)
    d = angle_derivatives(branch, point.r, point.theta, params)
    R = _assemble(
        point.r,
        point.theta,
        params.eps(branch),
        smp.alpha_pair.sin_value,
        smp.alpha_pair.cos_value,
        smp.rho_pair.sin_value,
        smp.rho_pair.cos_value,
        d,
    )
    return TensorialConnection(point.r, point.theta, R)


def spherical_reference_connection(point: PolarPoint) -> TensorialConnection:
    """Connection of the plain spherical orthonormal frame (alpha = 0, rho = pi/2, eps = 0)."""
    zero = {"dth_alpha": 0.0, "dr_alpha": 0.0, "dth_rho": 0.0, "dr_rho": 0.0}
    return TensorialConnection(
        point.r, point.theta, _assemble(point.r, point.theta, 0.0, 0.0, 1.0, 1.0, 0.0, zero)
    )


def trace_vectors(conn: TensorialConnection, metric: MetricData | None = None) -> tuple[np.ndarray, np.ndarray]:
    """R_mu = R_{mu a}^a and B_mu = (1/2) eps_{mu a n i} R^{a n i}."""
    if metric is None:
        metric = metric_at(conn.r, conn.theta)
    gi = metric.g_inv
    R_mu = np.einsum("mab,ab->m", conn.R, gi)
    R_up = np.einsum("ai,bj,ck,ijk->abc", gi, gi, gi, conn.R)
    B_mu = 0.5 * np.einsum("mabc,abc->m", levi_civita(metric), R_up)
    return R_mu, B_mu


ConnectionField = Callable[[float, float], TensorialConnection]


def connection_field(branch: Branch, params: ModelParams) -> ConnectionField:
    branch = Branch.parse(branch)
    return lambda r, th: tensorial_connection_at(branch, PolarPoint(r, th), params)


def curvature_tensor(field: ConnectionField, point: PolarPoint, h: float) -> np.ndarray:
    """Riemann tensor ``Riem[l, n, mu, k]`` rebuilt from the tensorial connection.

    Riem^l_{n mu k} = -(D_mu R^l_{nk} - D_k R^l_{n mu} + R^l_{j mu} R^j_{nk} - R^l_{jk} R^j_{n mu})
    with D the Levi-Civita derivative acting on l and n; its action on the
    derivative slot cancels under the antisymmetrization.  Partials in r and
    theta are central differences with step ``h``; t and phi partials vanish.
    """
    r, th = point.r, point.theta
    if r - h <= 0 or th - h <= 0 or th + h >= math.pi:
        raise DomainError(f"stencil of size h={h} leaves the domain at (r={r}, theta={th})")
    A = field(r, th).raised_first()
    dA = np.zeros((4, 4, 4, 4))
    dA[RR] = (field(r + h, th).raised_first() - field(r - h, th).raised_first()) / (2 * h)
    dA[TH] = (field(r, th + h).raised_first() - field(r, th - h).raised_first()) / (2 * h)
    G = metric_at(r, th).christoffel
    nab = dA + np.einsum("lmj,jnk->mlnk", G, A) - np.einsum("jmn,ljk->mlnk", G, A)
    quad = np.einsum("ljm,jnk->lnmk", A, A)
    return -(
        np.einsum("mlnk->lnmk", nab)
        - np.einsum("klnm->lnmk", nab)
        + quad
        - np.einsum("lnmk->lnkm", quad)
    )


def curvature_flatness(field: ConnectionField, point: PolarPoint, h: float) -> float:
    """Largest absolute Riemann component; tends to zero as O(h^2) for a flat frame."""
    return float(np.abs(curvature_tensor(field, point, h)).max())


# --------------------------------------------------------------------------
# Clifford algebra and spinors
# --------------------------------------------------------------------------

class CliffordAlgebra:
    """Chiral representation with pi = i g0 g1 g2 g3 = diag(-1, -1, 1, 1)."""

    def __init__(self) -> None:
        I2, Z2 = np.eye(2), np.zeros((2, 2))
        paulis = [
            np.array([[0, 1], [1, 0]], dtype=complex),
            np.array([[0, -1j], [1j, 0]], dtype=complex),
            np.array([[1, 0], [0, -1]], dtype=complex),
        ]
        self.gamma = np.array(
            [np.block([[Z2, I2], [I2, Z2]]).astype(complex)]
            + [np.block([[Z2, p], [-p, Z2]]) for p in paulis]
        )
        self.gamma_lower = np.einsum("ab,bij->aij", ETA, self.gamma)
        g = self.gamma
        self.sigma = np.array([[(g[a] @ g[b] - g[b] @ g[a]) / 4 for b in range(4)] for a in range(4)])
        self.pi = 1j * g[0] @ g[1] @ g[2] @ g[3]
        self.levi = _LEVI.copy()

    def anticommutator_error(self) -> float:
        gl = self.gamma_lower
        err = 0.0
        for a in range(4):
            for b in range(4):
                ac = gl[a] @ gl[b] + gl[b] @ gl[a]
                err = max(err, float(np.abs(ac - 2 * ETA[a, b] * np.eye(4)).max()))
        return err

    def pi_relation_error(self) -> float:
        """Residual of 2i sigma_ab = eps_abcd pi sigma^cd."""
        sig_low = np.einsum("ac,bd,cdij->abij", ETA, ETA, self.sigma)
        rhs = np.einsum("abcd,jk,cdki->abji", self.levi, self.pi, self.sigma)
        return float(np.abs(2j * sig_low - rhs).max())

    def bar(self, psi: np.ndarray) -> np.ndarray:
        return psi.conj() @ self.gamma[0]


CLIFFORD = CliffordAlgebra()


def rotation_generator(axis: int, angle: float) -> np.ndarray:
    """Mixed-index generator G with expm(G) the rotation by ``angle`` about spatial ``axis`` (1..3)."""
    i, j = [k for k in (1, 2, 3) if k != axis]
    if axis == 2:  # keep right-handed orientation (z, x) for the y axis
        i, j = 3, 1
    G = np.zeros((4, 4))
    G[i, j], G[j, i] = -angle, angle
    return G


def boost_generator(axis: int, rapidity: float) -> np.ndarray:
    G = np.zeros((4, 4))
    G[0, axis] = G[axis, 0] = rapidity
    return G


def spinor_lift(G: np.ndarray, clifford: CliffordAlgebra = CLIFFORD) -> np.ndarray:
    """Spin-1/2 matrix S with S^-1 gamma^a S = Lambda^a_b gamma^b for Lambda = expm(G)."""
    omega = ETA @ G  # omega_{ab}
    return expm(0.5 * np.einsum("ab,abij->ij", omega, clifford.sigma))


def cartesian_coframe(r: float, theta: float, azimuth: float = 0.0) -> np.ndarray:
    """E[A, mu] = d x^A / d x^mu for Cartesian x^A = (t, x, y, z)."""
    st, ct = math.sin(theta), math.cos(theta)
    sp, cp = math.sin(azimuth), math.cos(azimuth)
    E = np.zeros((4, 4))
    E[0, T] = 1.0
    E[1, 1:] = [st * cp, r * ct * cp, -r * st * sp]
    E[2, 1:] = [st * sp, r * ct * sp, r * st * cp]
    E[3, 1:] = [ct, -r * st, 0.0]
    return E


def frame_generators(sample: FieldSample, azimuth: float = 0.0) -> list[np.ndarray]:
    """Generators whose ordered product of exponentials maps the tetrad onto Cartesian axes.

    Rz(azimuth) Ry(theta) carries (x, y, z) onto the spherical triad
    (e_theta, e_phi, e_r); a boost of rapidity -alpha along that y axis and a
    rotation by rho + pi about it yield the tetrad.
    """
    alpha = math.asinh(sample.alpha_pair.sin_value)
    rho = sample.rho_pair.angle()
    return [
        rotation_generator(3, azimuth),
        rotation_generator(2, sample.theta),
        boost_generator(2, -alpha),
        rotation_generator(2, rho + math.pi),
    ]


def frame_lorentz(sample: FieldSample, azimuth: float = 0.0) -> np.ndarray:
    """Lambda^A_a = E^A_mu e_a^mu (tetrad components in the Cartesian frame)."""
    return cartesian_coframe(sample.r, sample.theta, azimuth) @ tetrad_at(sample).T


@dataclass(frozen=True)
class BilinearSet:
    Phi: float
    Theta: float
    U: np.ndarray  # Cartesian-frame components U^A
    S: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate([[self.Phi, self.Theta], self.U, self.S])


def bilinears_from_polar(
    sample: FieldSample, kin: KinematicVectors, azimuth: float = 0.0
) -> BilinearSet:
    """Theta = 2phi^2 sin b, Phi = 2phi^2 cos b, U^A = 2phi^2 u^A, S^A = 2phi^2 s^A."""
    met = metric_at(sample.r, sample.theta)
    E = cartesian_coframe(sample.r, sample.theta, azimuth)
    w = 2.0 * sample.phi2
    return BilinearSet(
        Phi=w * sample.beta_pair.cos_value,
        Theta=w * sample.beta_pair.sin_value,
        U=w * E @ met.g_inv @ kin.u,
        S=w * E @ met.g_inv @ kin.s,
    )


def reconstruct_spinor(
    sample: FieldSample,
    azimuth: float = 0.0,
    beta: float | None = None,
    clifford: CliffordAlgebra = CLIFFORD,
) -> np.ndarray:
    """psi = phi exp(-i beta pi / 2) S (1, 0, 1, 0)^T in the Cartesian frame."""
    S = np.eye(4, dtype=complex)
    for G in frame_generators(sample, azimuth):
        S = S @ spinor_lift(G, clifford)
    b = sample.beta_resolved if beta is None else beta
    phase = np.diag(np.exp(-0.5j * b * np.diag(clifford.pi)))
    return math.sqrt(sample.phi2) * phase @ S @ np.array([1, 0, 1, 0], dtype=complex)


def spinor_bilinears(psi: np.ndarray, clifford: CliffordAlgebra = CLIFFORD) -> BilinearSet:
    bar = clifford.bar(psi)
    g, p = clifford.gamma, clifford.pi
    return BilinearSet(
        Phi=float((bar @ psi).real),
        Theta=float((1j * bar @ p @ psi).real),
        U=np.array([(bar @ g[a] @ psi).real for a in range(4)]),
        S=np.array([(bar @ g[a] @ p @ psi).real for a in range(4)]),
    )

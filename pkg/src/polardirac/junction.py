"""Matching the interior and exterior solutions at r = b.

With k = b|eps|, x = m/|eps| and y = sqrt(2x - 1), continuity of X at b
factorizes into

    (k y^3 + 4 y^2 + k y + 1) (k^2 y^4 + k^2 y^2 - 3 k y - 3) = 0.

The first factor has only positive coefficients, so the admissible mass
comes from the unique positive root of the second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .fields import (
    module_squared,
    v_derivative,
    v_potential,
    x_derivative,
    x_profile,
    yt_angle,
    z_profile,
)
from .model import Branch, ModelParams, ParameterError
from .oracle import riccati_rhs

__all__ = [
    "JunctionResult",
    "ContinuityReport",
    "quartic",
    "quartic_coefficients",
    "first_factor",
    "classify_roots",
    "solve_mass",
    "constant_ratio",
    "junction_params",
    "discr_residual",
    "continuity_report",
    "mass_spectrum_scan",
    "SCAN_COLUMNS",
]

NEWTON_TOL = 1e-14


def quartic_coefficients(k: float) -> np.ndarray:
    """Coefficients of k^2 y^4 + k^2 y^2 - 3 k y - 3, highest power first."""
    return np.array([k * k, 0.0, k * k, -3.0 * k, -3.0])


def quartic(y, k: float):
    return k * k * y**4 + k * k * y**2 - 3.0 * k * y - 3.0


def _dquartic(y, k: float):
    return 4.0 * k * k * y**3 + 2.0 * k * k * y - 3.0 * k


def first_factor(y, k: float):
    return k * y**3 + 4.0 * y**2 + k * y + 1.0


@dataclass(frozen=True)
class RootClassification:
    roots: tuple[complex, ...]
    n_positive: int
    n_negative: int
    n_complex: int

    @property
    def label(self) -> str:
        return f"{self.n_positive}pos/{self.n_negative}neg/{self.n_complex}cplx"


def classify_roots(k: float, imag_tol: float = 1e-10) -> RootClassification:
    """All four roots of the quartic factor (companion-matrix eigenvalues)."""
    roots = np.roots(quartic_coefficients(k))
    roots = tuple(sorted((complex(z) for z in roots), key=lambda z: (abs(z.imag) > imag_tol, -z.real)))
    real = [z.real for z in roots if abs(z.imag) <= imag_tol * max(1.0, abs(z))]
    return RootClassification(
        roots=roots,
        n_positive=sum(1 for v in real if v > 0),
        n_negative=sum(1 for v in real if v < 0),
        n_complex=len(roots) - len(real),
    )


def _positive_root(k: float) -> float:
    # p(0) = -3 < 0: grow the upper bracket until the sign changes
    lo, hi = 0.0, 1.0
    while quartic(hi, k) <= 0:
        lo, hi = hi, 2.0 * hi
        if hi > 1e200:
            raise ArithmeticError(f"no sign change found for k={k!r}")
    y = 0.5 * (lo + hi)
    for _ in range(200):
        fy = quartic(y, k)
        if fy == 0:
            return y
        if fy < 0:
            lo = y
        else:
            hi = y
        dfy = _dquartic(y, k)
        step = fy / dfy if dfy != 0 else math.inf
        y_new = y - step
        if not (lo < y_new < hi):
            y_new = 0.5 * (lo + hi)
        if abs(y_new - y) <= NEWTON_TOL * max(1.0, abs(y_new)):
            return y_new
        y = y_new
    return y


@dataclass(frozen=True)
class JunctionResult:
    """Mass quantization for one k.

    ``mass_ratio`` is m/|eps| = (y^2 + 1)/2 and ``gamma2_over_q2`` the
    constant ratio that makes phi^2 continuous at b.
    """

    k: float
    y: float
    mass_ratio: float
    gamma2_over_q2: float
    classification: RootClassification
    quartic_residual: float
    compton: dict = field(default_factory=dict)


def constant_ratio(k: float, y: float) -> float:
    """Gamma^2/Q^2 = 2 H^3 b^4 m e^{2Hb}/(1+Hb), in terms of Hb = ky and mb = k x."""
    x = 0.5 * (y * y + 1.0)
    ky = k * y
    return 2.0 * ky**3 * (k * x) * math.exp(2.0 * ky) / (1.0 + ky)


def solve_mass(k: float) -> JunctionResult:
    """Unique positive root y of the quartic factor, by bracketing and safeguarded Newton."""
    if not (k > 0 and math.isfinite(k)):
        raise ParameterError(f"k = b|eps| must be positive, got {k!r}")
    y = _positive_root(k)
    x = 0.5 * (y * y + 1.0)
    scale = max(k * k * y**4, k * k * y * y, 3 * k * y, 3.0)
    return JunctionResult(
        k=k,
        y=y,
        mass_ratio=x,
        gamma2_over_q2=constant_ratio(k, y),
        classification=classify_roots(k),
        quartic_residual=abs(quartic(y, k)) / scale,
        # b in units of the tension's Compton length 1/|eps|, and of the particle's 1/m
        compton={"b_over_tension_length": k, "b_over_mass_length": k * x},
    )


def junction_params(k: float, eps_abs: float = 1.0, Q2: float = 1.0) -> ModelParams:
    """Junction-consistent parameters for given k, with b = k/|eps| and Gamma2 fixed by Q2."""
    res = solve_mass(k)
    return ModelParams(
        m=res.mass_ratio * eps_abs,
        eps_abs=eps_abs,
        b=k / eps_abs,
        Q2=Q2,
        Gamma2=res.gamma2_over_q2 * Q2,
    )


def discr_residual(params: ModelParams) -> float:
    """Left minus right side of the matching condition for X at r = b, written in m, |eps|, b."""
    m, ea, b = params.m, params.eps_abs, params.b
    q = 2.0 * m - ea
    Hb = b * math.sqrt(ea * q)
    lhs = (2 * b * b * q * (m - ea) - 2 * Hb - 1) / (q * (Hb + 1))
    rhs = (9 - 4 * m * m * b * b) / (6 * m)
    return lhs - rhs


@dataclass(frozen=True)
class ContinuityReport:
    b: float
    dX: float
    dphi2_rel: float
    dbeta_principal: float
    dbeta_resolved: float
    dX_prime_fd: float
    dV_prime_fd: float
    dX_prime_ode: float
    dV_prime_ode: float
    discr: float
    values: dict

    def checks(self, tol: float = 1e-10, fd_tol: float = 1e-6) -> dict[str, bool]:
        return {
            "X": abs(self.dX) <= tol,
            "phi2": self.dphi2_rel <= tol,
            "beta_principal": self.dbeta_principal <= tol,
            "X_prime": abs(self.dX_prime_fd) <= fd_tol,
            "V_prime": abs(self.dV_prime_fd) <= fd_tol,
        }


def _fd(f, x: float, h: float) -> float:
    return (f(x + h) - f(x - h)) / (2 * h)


def continuity_report(params: ModelParams, n_theta: int = 50, h: float = 1e-5) -> ContinuityReport:
    """Interior-minus-exterior jumps of the solution and its radial derivatives at b.

    Both closed forms are smooth on either side of b, so each one-branch
    derivative is a central difference of its own formula.  The ODE columns
    evaluate the two first-order systems at the common value of X.
    """
    b = params.b
    IN, EX = Branch.INTERIOR, Branch.EXTERIOR
    th = np.linspace(0.0, math.pi, n_theta + 2)[1:-1]
    p_in = np.asarray(module_squared(IN, b, th, params))
    p_ex = np.asarray(module_squared(EX, b, th, params))
    Xin, Xex = x_profile(IN, b, params), x_profile(EX, b, params)
    _, pr_in, res_in = yt_angle(IN, np.full_like(th, Xin), th)
    _, pr_ex, res_ex = yt_angle(EX, np.full_like(th, Xex), th)
    dres = np.angle(np.exp(1j * (np.asarray(res_in) - np.asarray(res_ex))))
    hb = h * b
    dxp_fd = _fd(lambda r: x_profile(IN, r, params), b, hb) - _fd(lambda r: x_profile(EX, r, params), b, hb)
    dvp_fd = _fd(lambda r: v_potential(IN, r, params), b, hb) - _fd(lambda r: v_potential(EX, r, params), b, hb)
    # systems evaluated at the shared Z = exp(asinh X)
    Z = z_profile(IN, b, params)[0]
    zin = riccati_rhs(IN, params)(b, Z)
    zex = riccati_rhs(EX, params)(b, Z)
    dxp_ode = 0.5 * (zin - zex) * (1 + 1 / Z**2)
    ee_ex = params.eps(EX) + params.E
    vex = (ee_ex - params.m) * Z - (ee_ex + params.m) / Z
    dvp_ode = v_derivative(IN, b, params) - vex
    return ContinuityReport(
        b=b,
        dX=Xin - Xex,
        dphi2_rel=float(np.max(np.abs(p_in - p_ex) / np.maximum(np.abs(p_in), np.abs(p_ex)))),
        dbeta_principal=float(np.max(np.abs(np.asarray(pr_in) - np.asarray(pr_ex)))),
        dbeta_resolved=float(np.max(np.abs(dres))),
        dX_prime_fd=dxp_fd,
        dV_prime_fd=dvp_fd,
        dX_prime_ode=dxp_ode,
        dV_prime_ode=dvp_ode,
        discr=discr_residual(params),
        values={
            "X_in": Xin,
            "X_ex": Xex,
            "X_prime_in": x_derivative(IN, b, params),
            "X_prime_ex": x_derivative(EX, b, params),
            "V_prime_in": v_derivative(IN, b, params),
            "V_prime_ex": v_derivative(EX, b, params),
        },
    )


SCAN_COLUMNS = (
    ["k", "y", "x"]
    + [f"root{i}_{part}" for i in range(1, 5) for part in ("re", "im")]
    + ["classification"]
)


def mass_spectrum_scan(k_grid) -> list[dict[str, object]]:
    """One row per k with the admissible root, mass ratio and all quartic roots."""
    rows = []
    for k in k_grid:
        res = solve_mass(float(k))
        row: dict[str, object] = {"k": res.k, "y": res.y, "x": res.mass_ratio}
        for i, z in enumerate(res.classification.roots, 1):
            row[f"root{i}_re"] = z.real
            row[f"root{i}_im"] = z.imag
        row["classification"] = res.classification.label
        rows.append(row)
    return rows

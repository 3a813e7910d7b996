"""Finite-difference residuals of the polar Dirac equations.

Three equivalent forms are checked for the closed-form solutions:

* the spherical polar system (a)-(d) in alpha, rho, beta and ln(phi^2 r^2 sin),
* the reduced system (A)-(D) in zeta = asinh X and nu = ln(phi^2 r^2 sin),
* the covariant vector pair built from the tensorial-connection traces.

All derivatives of the field values are central differences with steps
h_r = h D max(r, 1/m) and h_theta = h min(D, sin), where
D = min(1, sqrt(X^2 + cos^2)) shrinks the stencil near the singular circle
X = 0, cos = 0 and sin keeps it inside (0, pi) near the poles.  Angle derivatives use the pair
formula d(angle) = cos d(sin) - sin d(cos), so no branch cut is ever crossed.
Only ln(phi^2) is differenced inside nu = ln(phi^2 r^2 sin); the geometric
part is differentiated exactly, which keeps the 1/sin terms out of the stencil.
The interior Yvon-Takabayashi pair is the exterior one rotated by pi, which
in the reduced system is the same as flipping the sign of the mass terms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .fields import angular_frame, module_squared, x_profile, yt_angle
from .geometry import (
    kinematic_vectors,
    levi_civita,
    metric_at,
    tensorial_connection_at,
    trace_vectors,
)
from .fields import field_sample
from .model import Branch, DomainError, GridSpec, ModelParams, PolarPoint, make_grid

__all__ = [
    "MUTATIONS",
    "ExcludedPointError",
    "OrderEstimate",
    "ResidualReport",
    "FAMILIES",
    "EQUATIONS",
    "residual_polar_dirac",
    "residual_reduced",
    "residual_general_polar",
    "convergence_order",
    "residual_suite",
    "default_grid",
]

MUTATIONS = ("m_sign", "L_sign", "sin_beta")
FAMILIES = {
    "polar": ("a", "b", "c", "d"),
    "reduced": ("A", "B", "C", "D"),
    "covariant": tuple(f"dep{i}_{c}" for i in (1, 2) for c in ("t", "r", "theta", "phi")),
}
EQUATIONS = tuple(e for eqs in FAMILIES.values() for e in eqs)

ROUNDING_FLOOR = 1e-11
REDUCED_BAND = 1e-3


class ExcludedPointError(DomainError):
    """Point inside an exclusion band of a residual family."""


def _check_mutation(mutate: str | None) -> None:
    if mutate is not None and mutate not in MUTATIONS:
        raise ValueError(f"unknown mutation {mutate!r}; choose from {MUTATIONS}")


def _steps(branch: Branch, point: PolarPoint, params: ModelParams, h: float) -> tuple[float, float]:
    # near the singular circle the fields vary on the scale D = sqrt(X^2 + cos^2),
    # near the poles on the scale sin(theta)
    local = min(1.0, math.hypot(x_profile(branch, point.r, params), math.cos(point.theta)))
    hr = h * local * max(point.r, 1.0 / params.m)
    h = h * min(local, math.sin(point.theta))
    if point.r - hr <= 0 or point.theta - h <= 0 or point.theta + h >= math.pi:
        raise DomainError(f"stencil h={h} leaves the domain at (r={point.r}, theta={point.theta})")
    return hr, h


class _Fields:
    """Raw field values at arbitrary (r, theta), with optional mutation."""

    def __init__(self, branch: Branch, params: ModelParams, mutate: str | None) -> None:
        self.branch, self.params = branch, params
        self.flip_sb = mutate == "sin_beta"

    def __call__(self, r: float, th: float) -> dict[str, float]:
        X = x_profile(self.branch, r, self.params)
        (sr, cr), (sha, cha) = angular_frame(X, th)
        (sb, cb), _, _ = yt_angle(self.branch, X, th)
        if self.flip_sb:
            sb = -sb
        phi2 = module_squared(self.branch, r, th, self.params)
        return dict(
            X=X, sr=sr, cr=cr, sha=sha, cha=cha, sb=sb, cb=cb,
            alpha=math.asinh(sha), zeta=math.asinh(X),
            lnphi2=math.log(phi2),
        )


def _diff(f: Callable[[float, float], dict], r, th, hr, ht):
    """Centre values plus central-difference helpers in r and theta."""
    c = f(r, th)
    rp, rm, tp, tm = f(r + hr, th), f(r - hr, th), f(r, th + ht), f(r, th - ht)

    def d(key):
        return (rp[key] - rm[key]) / (2 * hr), (tp[key] - tm[key]) / (2 * ht)

    def dang(s, co):
        dr = (c[co] * (rp[s] - rm[s]) - c[s] * (rp[co] - rm[co])) / (2 * hr)
        dt = (c[co] * (tp[s] - tm[s]) - c[s] * (tp[co] - tm[co])) / (2 * ht)
        return dr, dt

    return c, d, dang


def _dnu(d, r: float, th: float) -> tuple[float, float]:
    # nu = ln(phi^2) + ln(r^2 sin); the geometric part is differentiated exactly
    drl, dtl = d("lnphi2")
    return drl + 2.0 / r, dtl + math.cos(th) / math.sin(th)


def _constants(branch: Branch, params: ModelParams, mutate: str | None):
    m = -params.m if mutate == "m_sign" else params.m
    L = -params.L if mutate == "L_sign" else params.L
    return params.eps(branch) + params.E, m, L


def residual_polar_dirac(
    branch: Branch, point: PolarPoint, params: ModelParams, h: float, mutate: str | None = None
) -> np.ndarray:
    """Residuals of the four spherical polar Dirac equations (a)-(d)."""
    branch = Branch.parse(branch)
    _check_mutation(mutate)
    hr, ht = _steps(branch, point, params, h)
    r, th = point.r, point.theta
    c, d, dang = _diff(_Fields(branch, params, mutate), r, th, hr, ht)
    ee, m, L = _constants(branch, params, mutate)
    st = math.sin(th)
    dra, dta = d("alpha")
    drr, dtr = dang("sr", "cr")
    drb, dtb = dang("sb", "cb")
    drn, dtn = _dnu(d, r, th)
    K1 = 2 * ee * r * c["cha"] - 2 * L * c["sha"] / st - 2 * m * r * c["cb"]
    K2 = 2 * ee * r * c["sha"] - 2 * L * c["cha"] / st
    return np.array([
        r * drb + dta - K1 * c["cr"],
        dtb - r * dra - K1 * c["sr"],
        r * drn + 2 * m * r * c["sb"] * c["cr"] + dtr - K2 * c["sr"],
        dtn + 2 * m * r * c["sb"] * c["sr"] - r * drr + K2 * c["cr"],
    ])


def residual_reduced(
    branch: Branch, point: PolarPoint, params: ModelParams, h: float, mutate: str | None = None
) -> np.ndarray:
    """Residuals of the reduced system (A)-(D) in zeta and nu.

    The mass enters with the branch orientation (+m outside, -m inside).
    Points with |X| < 1e-3 are excluded because coth(zeta) diverges there.
    """
    branch = Branch.parse(branch)
    _check_mutation(mutate)
    hr, ht = _steps(branch, point, params, h)
    r, th = point.r, point.theta
    if abs(x_profile(branch, r, params)) < REDUCED_BAND:
        raise ExcludedPointError(f"zeta = 0 band at r={r}")
    c, d, _ = _diff(_Fields(branch, params, mutate), r, th, hr, ht)
    ee, m, L = _constants(branch, params, mutate)
    m *= branch.orientation
    z = c["zeta"]
    sz, cz = math.sinh(z), math.cosh(z)
    st, ct = math.sin(th), math.cos(th)
    drz, dtz = d("zeta")
    drn, dtn = _dnu(d, r, th)
    common = 2 * ee * r * cz + 2 * L - 2 * m * r * sz
    K = 2 * ee * r * st + 2 * L * cz / st
    return np.array([
        r * drz + (math.tan(th) * math.tanh(z) * dtz - 1) + common,
        r * drz - (ct / st / math.tanh(z) * dtz + 1) + common,
        (sz * sz + ct * ct) * r * drn + 2 * m * r * ct * ct * cz - (dtz * ct * st + sz * cz) + K * sz * st,
        (sz * sz + ct * ct) * dtn - 2 * m * r * sz * ct * st + ct * st * r * drz + K * cz * ct,
    ])


def residual_general_polar(
    branch: Branch, point: PolarPoint, params: ModelParams, h: float, mutate: str | None = None
) -> np.ndarray:
    """Eight components of the covariant polar equations.

    dep1_mu = B_mu - 2 P^i (u_i s_mu - u_mu s_i) + d_mu beta + 2 s_mu m cos(beta)
    dep2_mu = R_mu - 2 eps_{mu p n a} P^p u^n s^a + 2 s_mu m sin(beta) + d_mu ln(phi^2)
    """
    branch = Branch.parse(branch)
    _check_mutation(mutate)
    hr, ht = _steps(branch, point, params, h)
    r, th = point.r, point.theta
    c, d, dang = _diff(_Fields(branch, params, mutate), r, th, hr, ht)
    _, m, L = _constants(branch, params, mutate)
    met = metric_at(r, th)
    R_mu, B_mu = trace_vectors(tensorial_connection_at(branch, point, params), met)
    kin = kinematic_vectors(field_sample(branch, point, params), params, L=L)
    gi = met.g_inv
    P_up, u_up, s_up = gi @ kin.P, gi @ kin.u, gi @ kin.s
    u, s = kin.u, kin.s
    drb, dtb = dang("sb", "cb")
    drl, dtl = d("lnphi2")
    dbeta = np.array([0.0, drb, dtb, 0.0])
    dln = np.array([0.0, drl, dtl, 0.0])
    dep1 = B_mu - 2 * ((P_up @ u) * s - (P_up @ s) * u) + dbeta + 2 * s * m * c["cb"]
    dep2 = (
        R_mu
        - 2 * np.einsum("mpna,p,n,a->m", levi_civita(met), P_up, u_up, s_up)
        + 2 * s * m * c["sb"]
        + dln
    )
    return np.concatenate([dep1, dep2])


_RESIDUALS = {
    "polar": residual_polar_dirac,
    "reduced": residual_reduced,
    "covariant": residual_general_polar,
}


@dataclass(frozen=True)
class OrderEstimate:
    order: float | None
    saturated: bool
    h: tuple[float, ...]
    residuals: tuple[float, ...]


def convergence_order(
    residual_fn: Callable[[float], float], h_list: Sequence[float], floor: float = ROUNDING_FLOOR
) -> OrderEstimate:
    """Least-squares slope of log|residual| against log h.

    Residuals at or below ``floor`` are dropped; fewer than three usable
    values gives a saturated estimate with ``order=None``.
    """
    h_list = tuple(float(h) for h in h_list)
    if len(h_list) < 3:
        raise ValueError("convergence order needs at least 3 step sizes")
    res = tuple(abs(float(residual_fn(h))) for h in h_list)
    use = [(h, e) for h, e in zip(h_list, res) if e > floor]
    if len(use) < 3:
        return OrderEstimate(None, True, h_list, res)
    x = np.log([u[0] for u in use])
    y = np.log([u[1] for u in use])
    slope = float(np.polyfit(x, y, 1)[0])
    return OrderEstimate(slope, False, h_list, res)


@dataclass
class ResidualReport:
    """Grid maxima of every equation's residual at each step size."""

    branch: Branch
    h_values: tuple[float, ...]
    max_residual: dict[str, np.ndarray]
    orders: dict[str, OrderEstimate]
    n_points: int
    excluded: dict[str, int] = field(default_factory=dict)
    mutate: str | None = None

    def max_at(self, h: float) -> dict[str, float]:
        i = self.h_values.index(h)
        return {eq: float(v[i]) for eq, v in self.max_residual.items()}

    def failures(self, tol: float, h: float, order_target: float = 2.0, order_tol: float = 0.2) -> list[str]:
        """Equations that miss ``tol`` at step ``h`` or whose order misses the target."""
        bad = [eq for eq, v in self.max_at(h).items() if not v <= tol]
        for eq, est in self.orders.items():
            if not est.saturated and abs(est.order - order_target) > order_tol and eq not in bad:
                bad.append(eq)
        return bad

    def to_rows(self) -> list[dict[str, object]]:
        rows = []
        for eq, vals in self.max_residual.items():
            est = self.orders.get(eq)
            row: dict[str, object] = {"branch": self.branch.value, "equation": eq}
            for h, v in zip(self.h_values, vals):
                row[f"max_h={h:g}"] = float(v)
            row["order"] = "saturated" if est is None or est.saturated else est.order
            rows.append(row)
        return rows


def residual_suite(
    branch: Branch,
    params: ModelParams,
    points: Iterable[PolarPoint],
    h_list: Sequence[float],
    families: Sequence[str] = tuple(FAMILIES),
    mutate: str | None = None,
    order_h: Sequence[float] | None = None,
) -> ResidualReport:
    """Evaluate residual families over ``points`` at every step in ``h_list``.

    Orders are fitted on the grid maxima at the steps ``order_h`` (default
    ``h_list``); they are only reported when at least 3 steps are available.
    """
    branch = Branch.parse(branch)
    points = list(points)
    all_h = tuple(dict.fromkeys(list(h_list) + list(order_h or [])))
    maxima: dict[str, np.ndarray] = {}
    excluded: dict[str, int] = {}
    for fam in families:
        fn = _RESIDUALS[fam]
        best = np.zeros((len(FAMILIES[fam]), len(all_h)))
        skipped = 0
        for pt in points:
            try:
                vals = np.array([np.abs(fn(branch, pt, params, h, mutate)) for h in all_h]).T
            except ExcludedPointError:
                skipped += 1
                continue
            best = np.maximum(best, vals)
        excluded[fam] = skipped
        for i, eq in enumerate(FAMILIES[fam]):
            maxima[eq] = best[i]
    orders: dict[str, OrderEstimate] = {}
    fit_h = tuple(order_h) if order_h is not None else tuple(h_list)
    if len(fit_h) >= 3:
        idx = [all_h.index(h) for h in fit_h]
        for eq, vals in maxima.items():
            lookup = dict(zip(fit_h, vals[idx]))
            orders[eq] = convergence_order(lambda h: lookup[h], fit_h)
    shown = tuple(h_list)
    idx = [all_h.index(h) for h in shown]
    return ResidualReport(
        branch=branch,
        h_values=shown,
        max_residual={eq: v[idx] for eq, v in maxima.items()},
        orders=orders,
        n_points=len(points),
        excluded=excluded,
        mutate=mutate,
    )


def default_grid(branch: Branch, params: ModelParams, n_r: int = 20, n_theta: int = 20) -> list[PolarPoint]:
    """Verification grid with the standard 1e-3 pole band.

    Interior: 2mr in [0.2, 6] (crosses the zero of X at 2mr = 3).
    Exterior: Hr in [0.3, 6] (starting just inside b when b is of order 1/H).
    """
    branch = Branch.parse(branch)
    if branch is Branch.INTERIOR:
        r_min, r_max = 0.1 / params.m, 3.0 / params.m
    else:
        params.require(branch)
        H = math.sqrt(params.eps_abs * (2 * params.m - params.eps_abs))
        r_min, r_max = 0.3 / H, 6.0 / H
    spec = GridSpec(r_min, r_max, n_r, n_theta, theta_margin=1e-3, branch=branch)
    return make_grid(spec, params)

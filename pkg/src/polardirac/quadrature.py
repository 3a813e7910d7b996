"""Square-integrability of the matched solution.

The theta integral of phi^2 sin(theta) is done in closed form,

    int_0^pi sqrt(X^2 + cos^2) sin dtheta = sqrt(1 + X^2) + X^2 asinh(1/|X|),

and the radial integral with composite Gauss-Legendre panels split at b
and at the zeros of X.  Beyond ``r_max`` an analytic bound replaces the
quadrature.  Integrals are reported in units of Q^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .fields import x_profile
from .model import Branch, ModelParams, derived_scales

__all__ = [
    "NormResult",
    "theta_integral",
    "theta_integral_numeric",
    "theta_factor",
    "gauss_legendre",
    "exterior_x_zeros",
    "exterior_tail_bound",
    "norm_integral",
    "separated_upper_bound",
    "NonJunctionWarning",
]

JUNCTION_TOL = 1e-8


class NonJunctionWarning(UserWarning):
    """Parameters do not satisfy the matching conditions; the density jumps at b."""


def theta_integral(X):
    """Closed-form angular integral of sqrt(X^2 + cos^2 theta) sin(theta)."""
    X = np.abs(np.asarray(X, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(X > 0, X * X * np.arcsinh(1.0 / np.where(X > 0, X, 1.0)), 0.0)
    out = np.sqrt(1.0 + X * X) + tail
    return float(out) if out.ndim == 0 else out


def theta_integral_numeric(X: float, tol: float = 1e-13) -> float:
    """Adaptive quadrature of the same integral (independent check)."""
    val, _ = integrate.quad(
        lambda t: math.hypot(X, math.cos(t)) * math.sin(t), 0.0, math.pi,
        epsabs=tol, epsrel=tol, limit=200, points=[math.pi / 2],
    )
    return val


def theta_factor(L: float = -0.5) -> float:
    """int_0^pi sin(theta)^(-2L) dtheta; infinite for L >= 1/2."""
    p = -2.0 * L
    if p <= -1.0:
        return math.inf
    return math.sqrt(math.pi) * math.exp(special.gammaln((p + 1) / 2) - special.gammaln(p / 2 + 1))


@lru_cache(maxsize=None)
def _leggauss(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(n)


def gauss_legendre(f, breakpoints, n_panels: int, order: int = 16) -> float:
    """Composite Gauss-Legendre rule: every interval between breakpoints is cut into ``n_panels``."""
    x, w = _leggauss(order)
    nodes, weights = [], []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        edges = np.linspace(a, b, n_panels + 1)
        half = 0.5 * np.diff(edges)
        mid = 0.5 * (edges[1:] + edges[:-1])
        nodes.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
        weights.append((half[:, None] * w[None, :]).ravel())
    nodes, weights = np.concatenate(nodes), np.concatenate(weights)
    return float(np.sum(weights * f(nodes)))


def exterior_x_zeros(params: ModelParams) -> list[float]:
    """Radii where the exterior X vanishes: 2(m-|eps|)R^2 - 2|eps|R - |eps| = 0."""
    H = derived_scales(params).H
    a, ea = 2.0 * (params.m - params.eps_abs), params.eps_abs
    roots = np.roots([a, -2.0 * ea, -ea]) if a != 0 else np.array([-0.5])
    return sorted(float(R.real) / H for R in roots if abs(R.imag) < 1e-14 and R.real > 0)


def _density_in(params: ModelParams):
    # 2 pi r^2 * Q^2 Rt * theta_integral(X), divided by Q^2
    def f(r):
        return 2 * math.pi * r * r * 2 * params.m * r * theta_integral(x_profile(Branch.INTERIOR, r, params))
    return f


def _density_ex(params: ModelParams):
    H = derived_scales(params).H
    g = params.Gamma2 / params.Q2

    def f(r):
        R = H * r
        return 2 * math.pi * r * r * g * (1 + R) * R**-3 * np.exp(-2 * R) * theta_integral(
            x_profile(Branch.EXTERIOR, r, params)
        )
    return f


def _xmax_beyond(params: ModelParams, r_max: float) -> float:
    s = derived_scales(params)
    return (abs(params.m - params.eps_abs) + params.eps_abs / (s.H * r_max)) / s.H


def _tail_integral(R_max: float) -> float:
    """int_{R_max}^inf (1 + 1/R) e^{-2R} dR."""
    return float(special.exp1(2 * R_max) + 0.5 * math.exp(-2 * R_max))


def exterior_tail_bound(params: ModelParams, r_max: float) -> float:
    """Bound on the exterior norm integral beyond r_max, in units of Q^2.

    Uses theta_integral(X) <= 2(1 + |X|) and |X| <= (|m-|eps|| + |eps|/R)/H.
    """
    H = derived_scales(params).H
    g = params.Gamma2 / params.Q2
    return 4 * math.pi * g * (1 + _xmax_beyond(params, r_max)) * _tail_integral(H * r_max) / H**3


@dataclass(frozen=True)
class NormResult:
    """Norm integral split at b (all values divided by Q^2)."""

    I_interior: float
    I_exterior: float
    I_total: float
    tail_bound: float
    upper_bound: float
    refinement_error: float
    r_max: float
    n_panels: int

    @property
    def Q2_normalizing(self) -> float:
        """Q^2 that makes the total integral equal to one."""
        return 1.0 / self.I_total


def _junction_warning(params: ModelParams) -> None:
    from .junction import constant_ratio, discr_residual

    k = params.b * params.eps_abs
    y = math.sqrt(2 * params.m / params.eps_abs - 1)
    ratio = constant_ratio(k, y)
    if abs(discr_residual(params)) > JUNCTION_TOL or abs(params.Gamma2 / params.Q2 - ratio) > JUNCTION_TOL * ratio:
        warnings.warn(
            "parameters are not junction-consistent; phi^2 is discontinuous at r=b",
            NonJunctionWarning,
            stacklevel=3,
        )


def _refine(f, breaks, tol, n_panels, order, max_levels):
    prev = gauss_legendre(f, breaks, n_panels, order)
    err = math.inf
    for _ in range(max_levels):
        n_panels *= 2
        cur = gauss_legendre(f, breaks, n_panels, order)
        err = abs(cur - prev)
        prev = cur
        if err <= tol * abs(cur):
            break
    return prev, err, n_panels


def _breaks(params: ModelParams, r_max: float) -> tuple[list[float], list[float]]:
    b = params.b
    r0 = 1.5 / params.m  # interior X = 0
    inner = [0.0] + ([r0] if 0 < r0 < b else []) + [b]
    outer = [b] + [r for r in exterior_x_zeros(params) if b < r < r_max] + [r_max]
    return inner, outer


def norm_integral(
    params: ModelParams,
    r_max: float | None = None,
    tol: float = 1e-12,
    n_panels: int = 4,
    order: int = 16,
    max_levels: int = 12,
) -> NormResult:
    """Norm integral of the interior (r < b) plus exterior (r > b) solution.

    Panels are doubled until the relative change drops below ``tol``; the
    last change is reported as ``refinement_error``.
    """
    params.require(Branch.EXTERIOR)
    _junction_warning(params)
    H = derived_scales(params).H
    if r_max is None:
        r_max = params.b + 30.0 / H
    if r_max <= params.b:
        raise ValueError("r_max must exceed the junction radius")
    inner, outer = _breaks(params, r_max)
    I_in, e_in, n1 = _refine(_density_in(params), inner, tol, n_panels, order, max_levels)
    I_ex, e_ex, n2 = _refine(_density_ex(params), outer, tol, n_panels, order, max_levels)
    tail = exterior_tail_bound(params, r_max)
    return NormResult(
        I_interior=I_in,
        I_exterior=I_ex,
        I_total=I_in + I_ex,
        tail_bound=tail,
        upper_bound=separated_upper_bound(params, r_max=r_max, tol=tol),
        refinement_error=e_in + e_ex,
        r_max=r_max,
        n_panels=max(n1, n2),
    )


def separated_upper_bound(
    params: ModelParams, L: float | None = None, r_max: float | None = None, tol: float = 1e-12
) -> float:
    """Separated bound 2 pi [int sin^{-2L}] [int cosh(zeta) e^V dr], using cos^2 <= 1.

    For L = -1/2 the angular factor is 2.  The exterior radial integral
    beyond ``r_max`` is replaced by its analytic bound.
    """
    L = params.L if L is None else L
    H = derived_scales(params).H
    r_max = params.b + 30.0 / H if r_max is None else r_max
    g = params.Gamma2 / params.Q2

    def cosh_zeta(branch, r):
        X = x_profile(branch, r, params)
        return np.sqrt(1 + X * X)

    def f_in(r):
        return cosh_zeta(Branch.INTERIOR, r) * 2 * params.m * r**3

    def f_ex(r):
        R = H * r
        return cosh_zeta(Branch.EXTERIOR, r) * g / H**2 * np.exp(-2 * R) * (1 + R) / R

    inner, outer = _breaks(params, r_max)
    rad_in = _refine(f_in, inner, tol, 4, 16, 12)[0]
    rad_ex = _refine(f_ex, outer, tol, 4, 16, 12)[0]
    rad_tail = (1 + _xmax_beyond(params, r_max)) * g / H**3 * _tail_integral(H * r_max)
    return 2 * math.pi * theta_factor(L) * (rad_in + rad_ex + rad_tail)

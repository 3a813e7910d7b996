"""Independent integration of the radial Riccati systems.

Used as ground truth for the closed forms in :mod:`polardirac.fields`.
With L = -1/2, E = m the systems reduce to

    exterior  Z' =  |eps| Z^2 + 2Z/r - (2m - |eps|),   V' = -|eps| Z - (2m - |eps|)/Z
    interior  Z' = -2m Z^2 + 2Z/r,                      V' = 2m Z

The regular interior solution is stable when integrated outward and the
decaying exterior solution when integrated inward; in the opposite
directions neighbouring solutions separate from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson

from .model import Branch, ModelParams

__all__ = [
    "OdeTrajectory",
    "RiccatiBlowUp",
    "riccati_rhs",
    "v_rhs",
    "integrate_riccati",
    "richardson_error",
    "integrate_v",
    "cole_hopf",
    "cole_hopf_roundtrip",
    "linearized_z",
    "linear_ode_residual",
]

BLOWUP_FACTOR = 1e8


class RiccatiBlowUp(ArithmeticError):
    """The trajectory left Z > 0 or diverged; ``last_r`` is the last good radius."""

    def __init__(self, message: str, last_r: float) -> None:
        super().__init__(message)
        self.last_r = last_r


@dataclass(frozen=True)
class OdeTrajectory:
    branch: Branch
    r: np.ndarray
    Z: np.ndarray
    step: float
    order: int = 4


def _coeffs(branch: Branch, params: ModelParams) -> tuple[float, float, float]:
    # Z' + a Z^2 + (2L-1) Z/r + c = 0 ; V' = a Z - c/Z
    branch = Branch.parse(branch)
    ee = params.eps(branch) + params.E
    sm = branch.orientation * params.m
    return ee - sm, 2.0 * params.L - 1.0, ee + sm


def riccati_rhs(branch: Branch, params: ModelParams) -> Callable[[float, float], float]:
    a, l2, c = _coeffs(branch, params)
    return lambda r, Z: -(a * Z * Z + l2 * Z / r + c)


def v_rhs(branch: Branch, params: ModelParams) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    a, _, c = _coeffs(branch, params)
    return lambda r, Z: a * Z - c / Z


def integrate_riccati(
    branch: Branch,
    r0: float,
    Z0: float,
    r1: float,
    n_steps: int,
    params: ModelParams,
) -> OdeTrajectory:
    """Classical fixed-step RK4 from (r0, Z0) to r1 (forward or backward)."""
    branch = Branch.parse(branch)
    params.require(branch)
    if r0 <= 0 or r1 <= 0:
        raise ValueError("integration interval must lie in r > 0")
    if not Z0 > 0:
        raise ValueError("initial Z must be positive")
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    f = riccati_rhs(branch, params)
    h = (r1 - r0) / n_steps
    rs = r0 + h * np.arange(n_steps + 1)
    rs[-1] = r1
    Zs = np.empty(n_steps + 1)
    Zs[0] = z = Z0
    limit = BLOWUP_FACTOR * max(1.0, Z0)
    for i in range(n_steps):
        r = rs[i]
        k1 = f(r, z)
        k2 = f(r + h / 2, z + h * k1 / 2)
        k3 = f(r + h / 2, z + h * k2 / 2)
        k4 = f(r + h, z + h * k3)
        z_new = z + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6
        if not (math.isfinite(z_new) and 0 < z_new < limit) or rs[i + 1] <= 0:
            raise RiccatiBlowUp(f"Z left (0, {limit:g}) after r={r:.6g}", float(r))
        Zs[i + 1] = z = z_new
    return OdeTrajectory(branch=branch, r=rs, Z=Zs, step=h)


def richardson_error(branch: Branch, r0: float, Z0: float, r1: float, n_steps: int, params: ModelParams) -> float:
    """Endpoint error estimate from a halved-step rerun, (Z_h - Z_{h/2}) * 16/15."""
    coarse = integrate_riccati(branch, r0, Z0, r1, n_steps, params).Z[-1]
    fine = integrate_riccati(branch, r0, Z0, r1, 2 * n_steps, params).Z[-1]
    return float(abs(coarse - fine) * 16.0 / 15.0)


def integrate_v(traj: OdeTrajectory, params: ModelParams, V0: float = 0.0) -> np.ndarray:
    """Cumulative Simpson quadrature of V' along a uniform trajectory (either direction)."""
    dv = v_rhs(traj.branch, params)(traj.r, traj.Z)
    if len(traj.r) < 3:
        return V0 + np.concatenate([[0.0], np.cumsum(0.5 * np.diff(traj.r) * (dv[1:] + dv[:-1]))])
    if traj.step < 0:
        return V0 - cumulative_simpson(dv, x=-traj.r, initial=0.0)
    return V0 + cumulative_simpson(dv, x=traj.r, initial=0.0)


def cole_hopf(branch: Branch, z: float, dz: float, params: ModelParams) -> float:
    """Exterior Z = -z'/(z|eps|); interior Z = z'/(2mz)."""
    if z == 0:
        raise ZeroDivisionError("Cole-Hopf transform undefined at z = 0")
    if Branch.parse(branch) is Branch.EXTERIOR:
        return -dz / (z * params.eps_abs)
    return dz / (2.0 * params.m * z)


def linearized_z(branch: Branch, r: float, params: ModelParams, K: float = 1.0) -> tuple[float, float, float]:
    """(z, z', z'') of the decaying / regular solution of the linearized equation.

    Exterior z = K e^-R (R+1); interior z = K r^3.
    """
    if Branch.parse(branch) is Branch.INTERIOR:
        return K * r**3, 3 * K * r**2, 6 * K * r
    H = math.sqrt(params.eps_abs * (2 * params.m - params.eps_abs))
    R = H * r
    e = math.exp(-R)
    return K * e * (R + 1), -K * H * R * e, -K * H * H * (1 - R) * e


def linear_ode_residual(branch: Branch, r: float, params: ModelParams, K: float = 1.0) -> float:
    """z'' - 2z'/r - |eps|(2m-|eps|) z (zero tension term on the interior)."""
    z, dz, d2z = linearized_z(branch, r, params, K)
    k2 = 0.0 if Branch.parse(branch) is Branch.INTERIOR else params.eps_abs * (2 * params.m - params.eps_abs)
    return d2z - 2 * dz / r - k2 * z


def cole_hopf_roundtrip(
    branch: Branch,
    z_function: Callable[[float], float],
    r: float,
    params: ModelParams,
    dz_function: Callable[[float], float] | None = None,
    h: float = 1e-5,
) -> float:
    """Apply the Cole-Hopf map to ``z_function`` at r.

    Without ``dz_function`` the derivative is a fourth-order central difference.
    """
    z = z_function(r)
    if dz_function is not None:
        dz = dz_function(r)
    else:
        dz = (-z_function(r + 2 * h) + 8 * z_function(r + h) - 8 * z_function(r - h) + z_function(r - 2 * h)) / (12 * h)
    return cole_hopf(branch, z, dz, params)

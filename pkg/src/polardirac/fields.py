"""Closed-form interior and exterior solutions in polar form.

Both branches share the angular ansatz

    sin(rho)   =  X sin(theta) / D        cos(rho)   = -sqrt(X^2+1) cos(theta) / D
    sinh(alpha) = -sin(theta) / D         cosh(alpha) =  sqrt(X^2+1) / D

with D = sqrt(X^2 + cos^2 theta).  The Yvon-Takabayashi pair is
(sin b, cos b) = s * (-cos(theta), X) / D with s = +1 outside and s = -1
inside, so the two branches differ by b -> b + pi.

Radial profiles (R = H r, Rt = 2 m r):

    exterior  Z = c R/(R+1),   V = ln(Gamma^2/H^2) - 2R - ln R + ln(1+R)
    interior  Z = 3/Rt,        V = ln(2 m Q^2) + 3 ln r

and X = sinh(ln Z), phi^2 = exp(V) D / r^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import (
    Branch,
    DomainError,
    ModelParams,
    PolarPoint,
    SingularPointError,
    derived_scales,
)

__all__ = [
    "Branch",
    "AnglePair",
    "FieldSample",
    "SINGULAR_TOL",
    "x_profile",
    "x_derivative",
    "z_profile",
    "z_derivative",
    "angular_frame",
    "yt_angle",
    "v_potential",
    "v_derivative",
    "module_squared",
    "module_squared_exterior_explicit",
    "interior_origin_density",
    "field_sample",
    "angle_derivatives",
]

# D = sqrt(X^2 + cos^2) below this is treated as the singular locus
SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class AnglePair:
    """Trigonometric (or hyperbolic) pair of an angle."""

    sin_value: float
    cos_value: float

    def angle(self) -> float:
        return math.atan2(self.sin_value, self.cos_value)


@dataclass(frozen=True)
class FieldSample:
    r: float
    theta: float
    branch: Branch
    X: float
    Z: float
    zeta: float
    V: float
    beta_pair: AnglePair
    beta_principal: float
    beta_resolved: float
    alpha_pair: AnglePair  # (sinh, cosh)
    rho_pair: AnglePair
    phi2: float


def _radius(r):
    r = np.asarray(r, dtype=float)
    if np.any(~(r > 0)):
        raise DomainError("fields are defined for r > 0 only")
    return r


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def z_profile(branch: Branch, r, params: ModelParams):
    """Return ``(Z, zeta)`` with Z = exp(zeta) > 0."""
    branch = Branch.parse(branch)
    r = _radius(r)
    if branch is Branch.INTERIOR:
        Z = 3.0 / (2.0 * params.m * r)
    else:
        params.require(branch)
        s = derived_scales(params)
        R = s.H * r
        Z = s.c * R / (R + 1.0)
    return _scalar(Z), _scalar(np.log(Z))


def z_derivative(branch: Branch, r, params: ModelParams):
    """dZ/dr of the closed form."""
    branch = Branch.parse(branch)
    r = _radius(r)
    if branch is Branch.INTERIOR:
        dZ = -3.0 / (2.0 * params.m * r**2)
    else:
        params.require(branch)
        s = derived_scales(params)
        dZ = s.c * s.H / (s.H * r + 1.0) ** 2
    return _scalar(dZ)


def x_profile(branch: Branch, r, params: ModelParams):
    """X(r) from the closed forms.

    Exterior: [2R^2(m-|eps|) - |eps|(2R+1)] / (2HR(R+1)); interior: (9-Rt^2)/(6 Rt).
    """
    branch = Branch.parse(branch)
    r = _radius(r)
    if branch is Branch.INTERIOR:
        Rt = 2.0 * params.m * r
        X = (9.0 - Rt**2) / (6.0 * Rt)
    else:
        params.require(branch)
        s = derived_scales(params)
        R = s.H * r
        ea = params.eps_abs
        X = (2.0 * R**2 * (params.m - ea) - ea * (2.0 * R + 1.0)) / (2.0 * s.H * R * (R + 1.0))
    return _scalar(X)


def x_derivative(branch: Branch, r, params: ModelParams):
    """dX/dr, using X = (Z - 1/Z)/2."""
    Z, _ = z_profile(branch, r, params)
    dZ = z_derivative(branch, r, params)
    return _scalar(0.5 * dZ * (1.0 + 1.0 / np.asarray(Z) ** 2))


def _denominator(X, theta):
    X = np.asarray(X, dtype=float)
    D = np.hypot(X, np.cos(theta))
    if np.any(D < SINGULAR_TOL):
        raise SingularPointError("ansatz singular point: X = 0 and cos(theta) = 0")
    return D


def angular_frame(X, theta):
    """Return ``(rho_pair, alpha_pair)`` as ``((sin, cos), (sinh, cosh))`` tuples."""
    D = _denominator(X, theta)
    W = np.sqrt(1.0 + np.asarray(X) ** 2)
    st, ct = np.sin(theta), np.cos(theta)
    rho = (_scalar(X * st / D), _scalar(-W * ct / D))
    alpha = (_scalar(-st / D), _scalar(W / D))
    return rho, alpha


def yt_angle(branch: Branch, X, theta):
    """Yvon-Takabayashi angle.

    Returns ``((sin b, cos b), principal, resolved)`` where ``principal`` is
    -arctan(cos(theta)/X), and ``resolved`` is the atan2 angle of
    the pair (differs from ``principal`` by pi on the interior branch where X > 0).
    """
    branch = Branch.parse(branch)
    D = _denominator(X, theta)
    X = np.asarray(X, dtype=float)
    ct = np.cos(theta)
    sgn = branch.orientation
    sb, cb = -sgn * ct / D, sgn * X / D
    with np.errstate(divide="ignore"):
        principal = -np.arctan(ct / X)
    resolved = np.arctan2(sb, cb)
    return (_scalar(sb), _scalar(cb)), _scalar(principal), _scalar(resolved)


def v_potential(branch: Branch, r, params: ModelParams):
    """Radial log-amplitude V with integration constants fixed by Q2 / Gamma2."""
    branch = Branch.parse(branch)
    r = _radius(r)
    if branch is Branch.INTERIOR:
        V = math.log(2.0 * params.m * params.Q2) + 3.0 * np.log(r)
    else:
        params.require(branch)
        H = derived_scales(params).H
        R = H * r
        V = math.log(params.Gamma2 / H**2) - 2.0 * R - np.log(R) + np.log1p(R)
    return _scalar(V)


def v_derivative(branch: Branch, r, params: ModelParams):
    """dV/dr from the first-order relation V' = (eps+E+s m) Z - (eps+E-s m)/Z."""
    branch = Branch.parse(branch)
    Z, _ = z_profile(branch, r, params)
    Z = np.asarray(Z)
    ee = params.eps(branch) + params.E
    sm = branch.orientation * params.m
    return _scalar((ee - sm) * Z - (ee + sm) / Z)


def module_squared(branch: Branch, r, theta, params: ModelParams):
    """phi^2 from the compact closed forms.

    Interior: Q^2 Rt sqrt(X^2 + cos^2); exterior: Gamma^2 (1+R) R^-3 e^-2R sqrt(X^2 + cos^2).
    """
    branch = Branch.parse(branch)
    r = _radius(r)
    X = np.asarray(x_profile(branch, r, params))
    D = np.hypot(X, np.cos(theta))
    if branch is Branch.INTERIOR:
        out = params.Q2 * 2.0 * params.m * r * D
    else:
        R = derived_scales(params).H * r
        out = params.Gamma2 * (1.0 + R) * R**-3 * np.exp(-2.0 * R) * D
    return _scalar(out)


def module_squared_exterior_explicit(r, theta, params: ModelParams):
    """Exterior phi^2 written directly in r, m, |eps| (expanded form)."""
    params.require(Branch.EXTERIOR)
    r = _radius(r)
    m, ea = params.m, params.eps_abs
    q = 2.0 * m - ea
    Hr = r * np.sqrt(ea * q)
    A = 2.0 * r**2 * q * (m - ea) - 2.0 * Hr - 1.0
    B = 2.0 * r * q * (Hr + 1.0) * np.cos(theta)
    pref = (1.0 + Hr) / (2.0 * r**4 * np.sqrt(ea**3 * q**5) * (Hr + 1.0))
    return _scalar(params.Gamma2 * np.exp(-2.0 * Hr) * pref * np.sqrt(A**2 + B**2))


def interior_origin_density(params: ModelParams) -> float:
    """Limit of the interior phi^2 at r -> 0, equal to 1.5 Q^2 for every theta."""
    return 1.5 * params.Q2


def angle_derivatives(branch: Branch, r, theta, params: ModelParams) -> dict:
    """Exact partial derivatives of alpha, rho, beta, zeta and ln(phi^2).

    Keys are ``'dr_alpha'``, ``'dth_alpha'`` and so on.  Uses
    tanh(alpha) = -sin/W and rho = atan2(X sin, -W cos) with W = sqrt(1+X^2).
    """
    branch = Branch.parse(branch)
    X = np.asarray(x_profile(branch, r, params))
    Xp = np.asarray(x_derivative(branch, r, params))
    D2 = _denominator(X, theta) ** 2
    W = np.sqrt(1.0 + X**2)
    st, ct = np.sin(theta), np.cos(theta)
    out = {
        "dr_alpha": st * X * Xp / (W * D2),
        "dth_alpha": -ct * W / D2,
        "dr_rho": -Xp * st * ct / (W * D2),
        "dth_rho": -W * X / D2,
        "dr_beta": ct * Xp / D2,
        "dth_beta": X * st / D2,
        "dr_zeta": Xp / W,
        "dr_lnphi2": np.asarray(v_derivative(branch, r, params)) + X * Xp / D2 - 2.0 / np.asarray(r),
        "dth_lnphi2": -ct * st / D2,
    }
    return {k: _scalar(v) for k, v in out.items()}


def field_sample(branch: Branch, point: PolarPoint, params: ModelParams) -> FieldSample:
    """All polar-form field values at one point."""
    branch = Branch.parse(branch)
    params.require(branch)
    r, th = point.r, point.theta
    X = x_profile(branch, r, params)
    Z, zeta = z_profile(branch, r, params)
    (sr, cr), (sha, cha) = angular_frame(X, th)
    (sb, cb), principal, resolved = yt_angle(branch, X, th)
    return FieldSample(
        r=r,
        theta=th,
        branch=branch,
        X=X,
        Z=Z,
        zeta=zeta,
        V=v_potential(branch, r, params),
        beta_pair=AnglePair(sb, cb),
        beta_principal=principal,
        beta_resolved=resolved,
        alpha_pair=AnglePair(sha, cha),
        rho_pair=AnglePair(sr, cr),
        phi2=module_squared(branch, r, th, params),
    )

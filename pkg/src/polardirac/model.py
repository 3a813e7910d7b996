"""Physical configuration: parameters, derived scales, polar grids, config files.

Natural units (c = hbar = 1).  Lengths are measured in units of 1/m unless
an explicit tension is supplied.  The exterior branch carries a signed
tension eps = -|eps| (attractive); the interior branch has eps = 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "Branch",
    "ParameterError",
    "SingularPointError",
    "DomainError",
    "ModelParams",
    "DerivedScales",
    "PolarPoint",
    "GridSpec",
    "validate_params",
    "derived_scales",
    "make_grid",
    "parse_config",
    "load_config",
]

DEFAULT_POLE_MARGIN = 1e-3
ENERGY_REL_TOL = 1e-12


class ParameterError(ValueError):
    """Raised for parameter sets outside the solutions' domain."""


class SingularPointError(ValueError):
    """Raised on the locus X = 0, cos(theta) = 0 where the ansatz is undefined."""


class DomainError(ValueError):
    """Raised when a point or a finite-difference stencil leaves the valid domain."""


class Branch(enum.Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"

    @classmethod
    def parse(cls, value: "str | Branch") -> "Branch":
        if isinstance(value, Branch):
            return value
        key = str(value).strip().lower()
        for b in cls:
            if b.value == key or b.value[:2] == key:
                return b
        raise ParameterError(f"unknown branch {value!r}; use 'interior' or 'exterior'")

    @property
    def orientation(self) -> int:
        """Sign of the Yvon-Takabayashi pair: +1 exterior, -1 interior."""
        return 1 if self is Branch.EXTERIOR else -1


@dataclass(frozen=True)
class ModelParams:
    """Validated physical constants.

    Build through :func:`validate_params`; the constructor also validates.

    Attributes
    ----------
    m : rest mass (1/length).
    eps_abs : tension magnitude |eps| used by the exterior branch.
    b : junction radius.
    Q2, Gamma2 : interior / exterior normalization constants.
    E, L : energy and angular-momentum constants (fixed to m and -1/2).
    """

    m: float = 1.0
    eps_abs: float = 0.0
    b: float = 1.0
    Q2: float = 1.0
    Gamma2: float = 1.0
    E: float = field(default=float("nan"))
    L: float = -0.5

    def __post_init__(self) -> None:
        if math.isnan(self.E):
            object.__setattr__(self, "E", float(self.m))
        _check(self)

    def eps(self, branch: Branch) -> float:
        """Signed tension for ``branch``."""
        return 0.0 if Branch.parse(branch) is Branch.INTERIOR else -self.eps_abs

    def require(self, branch: Branch) -> None:
        if Branch.parse(branch) is Branch.EXTERIOR and not (0.0 < self.eps_abs < 2.0 * self.m):
            raise ParameterError(
                "exterior branch requires 0 < |eps| < 2m "
                f"(got |eps|={self.eps_abs!r}, m={self.m!r})"
            )


def _check(p: ModelParams) -> None:
    vals = dict(m=p.m, eps_abs=p.eps_abs, b=p.b, Q2=p.Q2, Gamma2=p.Gamma2, E=p.E, L=p.L)
    for name, v in vals.items():
        if not np.isfinite(v):
            raise ParameterError(f"{name} must be finite, got {v!r}")
    if p.m <= 0:
        raise ParameterError(f"mass must be positive, got m={p.m!r}")
    if p.b <= 0:
        raise ParameterError(f"junction radius must be positive, got b={p.b!r}")
    if p.Q2 <= 0 or p.Gamma2 <= 0:
        raise ParameterError("normalization constants Q2 and Gamma2 must be positive")
    if p.eps_abs < 0:
        raise ParameterError(
            "eps_abs is a magnitude; positive (repulsive) tension is not supported"
        )
    if p.eps_abs >= 2.0 * p.m:
        raise ParameterError(
            f"exterior solution requires |eps|<2m (got |eps|={p.eps_abs!r}, 2m={2 * p.m!r})"
        )
    if p.L != -0.5:
        raise ParameterError(
            f"L={p.L!r} rejected: only L=-1/2 gives an integrable angular factor"
        )
    if abs(p.E - p.m) > ENERGY_REL_TOL * p.m:
        raise ParameterError(f"E={p.E!r} rejected: solutions are built for E=m={p.m!r}")


def validate_params(**raw: float) -> ModelParams:
    """Build :class:`ModelParams` from raw keyword values.

    Raises :class:`ParameterError` with a message naming the violated restriction.
    """
    try:
        values = {k: float(v) for k, v in raw.items()}
    except (TypeError, ValueError) as exc:
        raise ParameterError(str(exc)) from None
    unknown = set(values) - {"m", "eps_abs", "b", "Q2", "Gamma2", "E", "L"}
    if unknown:
        raise ParameterError(f"unknown parameter(s): {sorted(unknown)}")
    return ModelParams(**values)


@dataclass(frozen=True)
class DerivedScales:
    H: float
    c: float
    k: float
    m: float

    def R(self, r):
        return np.asarray(r) * self.H

    def Rt(self, r):
        return 2.0 * self.m * np.asarray(r)


def derived_scales(p: ModelParams) -> DerivedScales:
    """H = sqrt(|eps|(2m-|eps|)), c = H/|eps|, k = b|eps|.

    With |eps| = 0 (interior-only configuration) H = k = 0 and c is infinite.
    """
    H = math.sqrt(p.eps_abs * (2.0 * p.m - p.eps_abs))
    c = math.sqrt(2.0 * p.m / p.eps_abs - 1.0) if p.eps_abs > 0 else math.inf
    return DerivedScales(H=H, c=c, k=p.b * p.eps_abs, m=p.m)


@dataclass(frozen=True)
class PolarPoint:
    r: float
    theta: float

    def __post_init__(self) -> None:
        if not (self.r > 0 and np.isfinite(self.r)):
            raise DomainError(f"radius must be positive, got r={self.r!r}")
        if not (0.0 < self.theta < math.pi):
            raise DomainError(f"theta must lie in (0, pi), got {self.theta!r}")


@dataclass(frozen=True)
class GridSpec:
    r_min: float
    r_max: float
    n_r: int
    n_theta: int
    theta_margin: float = DEFAULT_POLE_MARGIN
    branch: Branch = Branch.INTERIOR
    # points closer than this to the singular locus (X=0, cos=0) are dropped
    singular_band: float = 1e-3

    def __post_init__(self) -> None:
        if not self.r_min > 0:
            raise DomainError("grid r_min must be > 0 (fields are evaluated at r > 0)")
        if not self.r_max >= self.r_min:
            raise DomainError("grid r_max must be >= r_min")
        if not (0.0 < self.theta_margin < math.pi / 2):
            raise DomainError("theta_margin must lie in (0, pi/2) to exclude the poles")
        if self.n_r < 1 or self.n_theta < 1:
            raise DomainError("empty grid")
        object.__setattr__(self, "branch", Branch.parse(self.branch))

    def radii(self) -> np.ndarray:
        return np.linspace(self.r_min, self.r_max, self.n_r)

    def thetas(self) -> np.ndarray:
        return np.linspace(self.theta_margin, math.pi - self.theta_margin, self.n_theta)


def make_grid(spec: GridSpec, params: ModelParams | None = None) -> list[PolarPoint]:
    """Tensor-product grid, r-major.

    When ``params`` is given, points within ``spec.singular_band`` of the
    singular locus of ``spec.branch`` are left out.
    """
    points = [PolarPoint(float(r), float(t)) for r in spec.radii() for t in spec.thetas()]
    if params is not None:
        from .fields import x_profile

        band2 = spec.singular_band**2
        points = [
            pt
            for pt in points
            if float(x_profile(spec.branch, pt.r, params)) ** 2 + math.cos(pt.theta) ** 2 >= band2
        ]
    if not points:
        raise DomainError("grid is empty after exclusions")
    return points


_PARAM_KEYS = {"m", "eps_abs", "b", "Q2", "Gamma2", "E", "L"}
_GRID_KEYS = {"r_min", "r_max", "n_r", "n_theta", "theta_margin", "branch", "singular_band"}


def parse_config(text: str) -> tuple[ModelParams, GridSpec | None]:
    """Parse ``key=value`` lines (``#`` comments) into params and an optional grid.

    Unknown keys are rejected.
    """
    pvals: dict[str, float] = {}
    gvals: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParameterError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key in _PARAM_KEYS:
            try:
                pvals[key] = float(value)
            except ValueError:
                raise ParameterError(f"line {lineno}: {key} is not a number: {value!r}") from None
        elif key.startswith("grid.") and key[5:] in _GRID_KEYS:
            gkey = key[5:]
            try:
                if gkey == "branch":
                    gvals[gkey] = Branch.parse(value)
                elif gkey in ("n_r", "n_theta"):
                    gvals[gkey] = int(value)
                else:
                    gvals[gkey] = float(value)
            except ValueError:
                raise ParameterError(f"line {lineno}: bad value for {key}: {value!r}") from None
        else:
            raise ParameterError(f"line {lineno}: unknown key {key!r}")
    params = validate_params(**pvals)
    grid = None
    if gvals:
        missing = {"r_min", "r_max", "n_r", "n_theta"} - set(gvals)
        if missing:
            raise ParameterError(f"incomplete grid section, missing {sorted('grid.' + k for k in missing)}")
        try:
            grid = GridSpec(**gvals)  # type: ignore[arg-type]
        except DomainError as exc:
            raise ParameterError(str(exc)) from None
    return params, grid


def load_config(path: str | Path) -> tuple[ModelParams, GridSpec | None]:
    return parse_config(Path(path).read_text(encoding="utf-8"))

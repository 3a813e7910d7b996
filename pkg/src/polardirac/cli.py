"""Command-line front end: ``polardirac {junction,scan,fields,verify,integrate}``.

Exit codes: 0 success, 1 verification failure, 2 usage or configuration error.
CSV output uses a header row and 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .fields import field_sample
from .junction import SCAN_COLUMNS, continuity_report, junction_params, mass_spectrum_scan, solve_mass
from .model import (
    Branch,
    DomainError,
    GridSpec,
    ModelParams,
    ParameterError,
    PolarPoint,
    SingularPointError,
    load_config,
    make_grid,
    validate_params,
)
from .quadrature import norm_integral
from .verify import MUTATIONS, default_grid, residual_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
FIELD_COLUMNS = (
    "r", "theta", "X", "Z", "beta_sin", "beta_cos", "beta_resolved",
    "alpha_sinh", "alpha_cosh", "rho_sin", "rho_cos", "phi2", "V",
)


class UsageError(Exception):
    pass


def _fmt(v: object) -> str:
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    return str(v)


def write_csv(rows: Sequence[dict], columns: Sequence[str], out) -> None:
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in columns])


def _emit_csv(rows, columns, path: str | None) -> None:
    if path is None or path == "-":
        write_csv(rows, columns, sys.stdout)
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            write_csv(rows, columns, fh)


def _print_kv(pairs: Iterable[tuple[str, object]], out=None) -> None:
    out = out or sys.stdout
    for k, v in pairs:
        print(f"{k}={_fmt(v)}", file=out)


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be a positive number, got {text!r}")
    return v


def _float_list(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad list {text!r}") from None
    if not vals or any(not v > 0 for v in vals):
        raise argparse.ArgumentTypeError("list entries must be positive")
    return vals


def _scan_spec(text: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("scan spec is K_MIN:K_MAX:N")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad scan spec {text!r}") from None
    if not (0 < lo <= hi) or n < 1:
        raise argparse.ArgumentTypeError("scan needs 0 < K_MIN <= K_MAX and N >= 1")
    return lo, hi, n


def _k_grid(lo: float, hi: float, n: int, linear: bool = False) -> np.ndarray:
    if n == 1:
        return np.array([lo])
    return np.linspace(lo, hi, n) if linear else np.geomspace(lo, hi, n)


# ---------------------------------------------------------------------------
# parameter assembly
# ---------------------------------------------------------------------------

def _add_param_args(p: argparse.ArgumentParser, with_k: bool = True) -> None:
    g = p.add_argument_group("physical parameters")
    g.add_argument("--config", help="key=value parameter file")
    if with_k:
        g.add_argument("--k", type=_positive, help="junction parameter b|eps|; fixes m, b and Gamma2")
    g.add_argument("--m", type=float)
    g.add_argument("--eps-abs", type=float, dest="eps_abs")
    g.add_argument("--b", type=float)
    g.add_argument("--Q2", type=float)
    g.add_argument("--Gamma2", type=float)


def _params_from(args) -> tuple[ModelParams, GridSpec | None, bool]:
    """Returns (params, grid from config, junction_consistent)."""
    raw: dict[str, float] = {}
    grid = None
    if getattr(args, "config", None):
        p0, grid = load_config(args.config)
        raw = dict(m=p0.m, eps_abs=p0.eps_abs, b=p0.b, Q2=p0.Q2, Gamma2=p0.Gamma2)
    k = getattr(args, "k", None)
    explicit = {n: getattr(args, n, None) for n in ("m", "eps_abs", "b", "Q2", "Gamma2")}
    if k is not None:
        if any(explicit[n] is not None for n in ("m", "b", "Gamma2")):
            raise UsageError("--k fixes m, b and Gamma2; do not combine with --m/--b/--Gamma2")
        ea = explicit["eps_abs"] or raw.get("eps_abs") or 1.0
        q2 = explicit["Q2"] or raw.get("Q2") or 1.0
        return junction_params(k, eps_abs=ea, Q2=q2), grid, True
    raw.update({n: v for n, v in explicit.items() if v is not None})
    return validate_params(**raw), grid, False


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_junction(args) -> int:
    if args.scan is not None:
        rows = mass_spectrum_scan(_k_grid(*args.scan))
        _emit_csv(rows, SCAN_COLUMNS, args.out)
        return EXIT_OK
    if args.k is not None:
        k = args.k
    elif args.b is not None and args.eps_abs is not None:
        k = _positive(str(args.b)) * _positive(str(args.eps_abs))
    else:
        raise UsageError("junction needs --k, or both --b and --eps-abs, or --scan")
    res = solve_mass(k)
    _print_kv([
        ("k", res.k),
        ("y", res.y),
        ("mass_ratio", res.mass_ratio),
        ("gamma2_over_q2", res.gamma2_over_q2),
        ("quartic_residual", res.quartic_residual),
        ("roots", res.classification.label),
        ("b_over_tension_length", res.compton["b_over_tension_length"]),
        ("b_over_mass_length", res.compton["b_over_mass_length"]),
    ])
    if args.out:
        _emit_csv(mass_spectrum_scan([k]), SCAN_COLUMNS, args.out)
    if args.continuity:
        rep = continuity_report(junction_params(k))
        _print_kv([
            ("dX", rep.dX), ("dphi2_rel", rep.dphi2_rel), ("dbeta_principal", rep.dbeta_principal),
            ("dbeta_resolved", rep.dbeta_resolved), ("dX_prime", rep.dX_prime_fd),
            ("dV_prime", rep.dV_prime_fd), ("discr", rep.discr),
        ])
        for name, ok in rep.checks().items():
            print(f"continuity_{name}={'pass' if ok else 'FAIL'}")
    return EXIT_OK


def cmd_scan(args) -> int:
    rows = mass_spectrum_scan(_k_grid(args.k_min, args.k_max, args.n, args.linear))
    _emit_csv(rows, SCAN_COLUMNS, args.out)
    return EXIT_OK


def _sample_row(s) -> dict:
    return {
        "r": s.r, "theta": s.theta, "X": s.X, "Z": s.Z,
        "beta_sin": s.beta_pair.sin_value, "beta_cos": s.beta_pair.cos_value,
        "beta_resolved": s.beta_resolved,
        "alpha_sinh": s.alpha_pair.sin_value, "alpha_cosh": s.alpha_pair.cos_value,
        "rho_sin": s.rho_pair.sin_value, "rho_cos": s.rho_pair.cos_value,
        "phi2": s.phi2, "V": s.V,
    }


def cmd_fields(args) -> int:
    params, cfg_grid, _ = _params_from(args)
    mode = args.branch or (cfg_grid.branch.value if cfg_grid else "interior")
    if mode not in ("interior", "exterior", "piecewise"):
        raise UsageError(f"unknown branch {mode!r}")
    base = dict(
        r_min=cfg_grid.r_min if cfg_grid else 0.1 / params.m,
        r_max=cfg_grid.r_max if cfg_grid else 3.0 / params.m,
        n_r=cfg_grid.n_r if cfg_grid else 10,
        n_theta=cfg_grid.n_theta if cfg_grid else 10,
        theta_margin=cfg_grid.theta_margin if cfg_grid else 1e-3,
    )
    for key in base:
        val = getattr(args, key, None)
        if val is not None:
            base[key] = val
    spec = GridSpec(**base, branch=Branch.INTERIOR if mode == "piecewise" else Branch.parse(mode))
    rows, skipped = [], 0
    for pt in make_grid(spec):
        if mode == "piecewise":
            branch = Branch.INTERIOR if pt.r <= params.b else Branch.EXTERIOR
        else:
            branch = spec.branch
        try:
            rows.append(_sample_row(field_sample(branch, pt, params)))
        except SingularPointError:
            skipped += 1
    _emit_csv(rows, FIELD_COLUMNS, args.out)
    print(f"rows={len(rows)} skipped_singular={skipped}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    params, _, _ = _params_from(args)
    branches = list(Branch) if args.branch == "both" else [Branch.parse(args.branch)]
    ok = True
    csv_rows = []
    for br in branches:
        pts = default_grid(br, params, args.n_r, args.n_theta)
        rep = residual_suite(br, params, pts, args.h, mutate=args.mutate, order_h=args.order_h)
        bad = rep.failures(args.tol, args.h[-1])
        print(f"[{br.value}] points={rep.n_points} excluded={rep.excluded} mutate={args.mutate}")
        for row in rep.to_rows():
            csv_rows.append(row)
            vals = " ".join(f"{k}={_fmt(v)}" for k, v in row.items() if k.startswith("max_h"))
            order = row["order"]
            order_txt = order if isinstance(order, str) else f"{order:.3f}"
            flag = "FAIL" if row["equation"] in bad else "ok"
            print(f"  {row['equation']:<11} {vals} order={order_txt} {flag}")
        if bad:
            ok = False
            print(f"[{br.value}] FAIL first={bad[0]} failing={','.join(bad)}")
        else:
            print(f"[{br.value}] pass")
    if args.out:
        cols = list(dict.fromkeys(k for row in csv_rows for k in row))
        _emit_csv(csv_rows, cols, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_integrate(args) -> int:
    params, _, consistent = _params_from(args)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = norm_integral(params, r_max=args.rmax, tol=args.tol)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    limit = args.assert_below
    if limit is None and consistent and args.k == 1.0:
        limit = 17 * math.pi
    _print_kv([
        ("I_interior_over_Q2", res.I_interior),
        ("I_exterior_over_Q2", res.I_exterior),
        ("I_total_over_Q2", res.I_total),
        ("I_total_over_piQ2", res.I_total / math.pi),
        ("tail_bound", res.tail_bound),
        ("refinement_error", res.refinement_error),
        ("separated_upper_bound", res.upper_bound),
        ("r_max", res.r_max),
        ("Q2_normalizing", res.Q2_normalizing),
    ])
    if args.out:
        row = {
            "m": params.m, "eps_abs": params.eps_abs, "b": params.b,
            "I_interior": res.I_interior, "I_exterior": res.I_exterior, "I_total": res.I_total,
            "tail_bound": res.tail_bound, "upper_bound": res.upper_bound, "r_max": res.r_max,
        }
        _emit_csv([row], list(row), args.out)
    if limit is not None:
        passed = res.I_total < limit
        print(f"below_{_fmt(limit)}={'pass' if passed else 'FAIL'}")
        if not passed:
            return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polardirac", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("junction", help="mass quantization at the junction radius")
    p.add_argument("--k", type=_positive)
    p.add_argument("--b", type=float)
    p.add_argument("--eps-abs", type=float, dest="eps_abs")
    p.add_argument("--scan", type=_scan_spec, metavar="K_MIN:K_MAX:N", help="log-spaced k scan as CSV")
    p.add_argument("--continuity", action="store_true", help="also report jumps at r=b")
    p.add_argument("--out", help="CSV output path ('-' for stdout)")
    p.set_defaults(func=cmd_junction)

    p = sub.add_parser("scan", help="mass spectrum table over k")
    p.add_argument("--k-min", type=_positive, default=0.1)
    p.add_argument("--k-max", type=_positive, default=10.0)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--linear", action="store_true", help="linear instead of log spacing")
    p.add_argument("--out")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("fields", help="CSV of field samples on a polar grid")
    _add_param_args(p)
    p.add_argument("--branch", choices=["interior", "exterior", "piecewise"])
    p.add_argument("--r-min", type=_positive, dest="r_min")
    p.add_argument("--r-max", type=_positive, dest="r_max")
    p.add_argument("--n-r", type=int, dest="n_r")
    p.add_argument("--n-theta", type=int, dest="n_theta")
    p.add_argument("--theta-margin", type=_positive, dest="theta_margin")
    p.add_argument("--out")
    p.set_defaults(func=cmd_fields)

    p = sub.add_parser("verify", help="finite-difference residuals of the field equations")
    _add_param_args(p)
    p.add_argument("--branch", choices=["both", "interior", "exterior"], default="both")
    p.add_argument("--h", type=_float_list, default=[1e-4], help="reported step sizes; tolerance applies to the last")
    p.add_argument("--order-h", type=_float_list, default=[4e-3, 2e-3, 1e-3], dest="order_h")
    p.add_argument("--tol", type=_positive, default=1e-6)
    p.add_argument("--n-r", type=int, default=20, dest="n_r")
    p.add_argument("--n-theta", type=int, default=20, dest="n_theta")
    p.add_argument("--mutate", choices=MUTATIONS)
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("integrate", help="norm integral of the matched solution")
    _add_param_args(p)
    p.add_argument("--rmax", type=_positive)
    p.add_argument("--tol", type=_positive, default=1e-12)
    p.add_argument("--assert-below", type=_positive, dest="assert_below")
    p.add_argument("--out")
    p.set_defaults(func=cmd_integrate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("fields", "verify", "integrate") and not any(
        getattr(args, n, None) is not None for n in ("config", "k", "m", "eps_abs", "b")
    ):
        args.k = 1.0
    try:
        return args.func(args)
    except (UsageError, ParameterError, DomainError) as exc:
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())

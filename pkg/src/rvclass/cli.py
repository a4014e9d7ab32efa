"""
Command-line front end.

    rvclass classify --catalog power --param rho=2
    rvclass classify --samples data.txt
    rvclass trace --catalog x_over_log --quantity orders
    rvclass catalog

Settings come from built-in defaults, then an optional ``--config`` file of
``key=value`` lines, then flags.  Exit codes: 0 success, 2 usage or parse
errors, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from . import catalog
from .classifier import (
    DEFAULT_GEOMETRIC_GRID,
    DEFAULT_LINEAR_GRID,
    ClassifierConfig,
    full_report,
)
from .logfn import EvaluationError, GridSpec, LogFunction, empirical_tail, load_samples, load_table

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Grid, tolerance and output settings; unset fields keep the target's defaults."""

    grid: str | None = None
    y_start: float | None = None
    growth: float | None = None
    windows: int | None = None
    points: int | None = None
    tol_converge: float | None = None
    tol_stable: float | None = None
    diverge_threshold: float | None = None
    W: int | None = None
    t_grid: tuple | None = None
    output: str | None = None

    def __post_init__(self):
        if self.grid not in (None, "linear", "geometric"):
            raise UsageError(f"grid must be 'linear' or 'geometric', got {self.grid!r}")
        for name in ("tol_converge", "tol_stable", "diverge_threshold", "growth"):
            v = getattr(self, name)
            if v is not None and not v > 0:
                raise UsageError(f"{name} must be positive")
        if self.windows is not None and self.windows < 2:
            raise UsageError("windows must be at least 2")
        if self.W is not None and self.W < 2:
            raise UsageError("W must be at least 2")
        if self.points is not None and self.points < 4:
            raise UsageError("points must be at least 4")
        if self.t_grid is not None and (not self.t_grid or any(not t >= 1 for t in self.t_grid)):
            raise UsageError("t_grid entries must be >= 1")

    def merged(self, other: "RunConfig") -> "RunConfig":
        """Fields set in ``other`` win."""
        updates = {f.name: getattr(other, f.name) for f in fields(other) if getattr(other, f.name) is not None}
        return replace(self, **updates)

    def apply(self, base: ClassifierConfig) -> ClassifierConfig:
        grid = base.grid
        if self.grid is not None and self.grid != grid.mode:
            grid = DEFAULT_GEOMETRIC_GRID if self.grid == "geometric" else DEFAULT_LINEAR_GRID
        updates = {
            "y_start": self.y_start, "y_growth": self.growth,
            "window_count": self.windows, "points_per_window": self.points,
        }
        updates = {k: v for k, v in updates.items() if v is not None}
        try:
            grid = replace(grid, **updates)
            tol_updates = {
                "tol_converge": self.tol_converge, "tol_stable": self.tol_stable,
                "diverge_threshold": self.diverge_threshold, "decision_windows": self.W,
            }
            tols = replace(base.tols, **{k: v for k, v in tol_updates.items() if v is not None})
            cfg = replace(base, grid=grid, tols=tols)
            if self.t_grid is not None:
                cfg = replace(cfg, t_grid=tuple(self.t_grid))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        return cfg


_CONVERTERS = {
    "grid": str, "y_start": float, "growth": float, "windows": int, "points": int,
    "tol_converge": float, "tol_stable": float, "diverge_threshold": float, "W": int,
    "t_grid": lambda v: tuple(float(t) for t in v.split(",")), "output": str,
}


def _convert(key: str, value: str):
    try:
        return _CONVERTERS[key](value)
    except KeyError:
        raise UsageError(f"unknown setting {key!r}") from None
    except ValueError:
        raise UsageError(f"bad value for {key}: {value!r}") from None


def read_config_file(path) -> RunConfig:
    """Parse ``key=value`` lines; blank lines and '#' comments are ignored."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, value = (part.strip() for part in line.split("=", 1))
            values[key] = _convert(key, value)
    return RunConfig(**values)


def _flags_config(args) -> RunConfig:
    values = {}
    for key in _CONVERTERS:
        v = getattr(args, key, None)
        if v is not None:
            values[key] = _convert(key, v) if key == "t_grid" else v
    return RunConfig(**values)


def _parse_params(pairs) -> dict:
    params = {}
    for pair in pairs or []:
        key, sep, value = pair.partition("=")
        if not sep or not key:
            raise UsageError(f"--param expects key=value, got {pair!r}")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--param {key}: not a number: {value!r}") from None
    return params


def file_config(U: LogFunction, t_grid) -> ClassifierConfig:
    """Grids inside the finite domain of a tabulated or sampled function."""
    y_hi = U.y_max - math.log(max(t_grid))
    if not y_hi > U.y_min:
        raise UsageError("data range too short for the t grid")
    lo = 0.5 * (U.y_min + y_hi)
    span = U.y_max - U.y_min
    probes = tuple(math.exp(U.y_min + f * span) for f in (0.0, 0.1, 0.2))
    return ClassifierConfig(
        grid=GridSpec.linear(lo, y_hi, windows=8, points=256),
        s_grid=GridSpec.linear(0.4 * span, 0.8 * span, windows=8, points=256),
        t_grid=tuple(t_grid),
        x_probes=probes,
    )


def resolve_target(args, run: RunConfig):
    """Return (label, LogFunction, ClassifierConfig, empirical flag)."""
    t_grid = run.t_grid or ClassifierConfig().t_grid
    if args.catalog is not None:
        params = _parse_params(args.param)
        U, _ = catalog.example(args.catalog, params)
        base = catalog.recommended_config(args.catalog, params)
        label = args.catalog
        if params:
            label += "(" + ",".join(f"{k}={v:g}" for k, v in sorted(params.items())) + ")"
        return label, U, run.apply(base), False
    if args.param:
        raise UsageError("--param only applies to --catalog targets")
    if args.table is not None:
        U = load_table(args.table)
        return str(args.table), U, run.apply(file_config(U, t_grid)), False
    U = empirical_tail(load_samples(args.samples), label=str(args.samples))
    return str(args.samples), U, run.apply(file_config(U, t_grid)), True


def _run_config(args) -> RunConfig:
    run = RunConfig()
    if args.config is not None:
        run = run.merged(read_config_file(args.config))
    return run.merged(_flags_config(args))


def _emit(text: str, run: RunConfig):
    if run.output:
        with open(run.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_classify(args) -> int:
    run = _run_config(args)
    label, U, cfg, empirical = resolve_target(args, run)
    report = full_report(U, cfg, empirical=empirical)
    if "orders" in report.errors:
        print(f"error: {report.errors['orders']}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(json.dumps(report.to_json_dict(label), indent=2) + "\n", run)
    if report.errors:
        for name, msg in report.errors.items():
            print(f"error: {name}: {msg}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _trace_rows(U: LogFunction, cfg: ClassifierConfig, quantity: str):
    kind, _, arg = quantity.partition(":")
    if kind == "orders" and not arg:
        ys = cfg.grid.points()
        return "y", ys, U(ys) / ys
    if kind == "ratio" and arg:
        try:
            t = float(arg)
        except ValueError:
            raise UsageError(f"bad t in {quantity!r}") from None
        if not t > 0:
            raise UsageError("t must be positive")
        ys = cfg.grid.points()
        return "s", ys, U(ys + math.log(t)) - U(ys)
    if kind == "scaled" and arg:
        try:
            r, x = (float(v) for v in arg.split(","))
        except ValueError:
            raise UsageError(f"scaled expects r,x in {quantity!r}") from None
        if not x > 0:
            raise UsageError("x must be positive")
        ss = cfg.s_grid.points()
        y = math.log(x)
        return "s", ss, r * ss + U(y + ss) - U(y)
    raise UsageError(f"unknown quantity {quantity!r}; use orders, ratio:T or scaled:R,X")


def cmd_trace(args) -> int:
    run = _run_config(args)
    _, U, cfg, _ = resolve_target(args, run)
    head, xs, vals = _trace_rows(U, cfg, args.quantity)
    lines = [f"{head},value"] + [f"{a!r},{b!r}" for a, b in zip(xs.tolist(), np.asarray(vals).tolist())]
    _emit("\n".join(lines) + "\n", run)
    return EXIT_OK


def cmd_catalog(args) -> int:
    sys.stdout.write(catalog.catalog_listing())
    return EXIT_OK


def _add_target_options(p: argparse.ArgumentParser):
    target = p.add_mutually_exclusive_group(required=True)
    target.add_argument("--catalog", metavar="NAME", help="catalog entry name")
    target.add_argument("--table", metavar="FILE", help='two-column "x U(x)" table')
    target.add_argument("--samples", metavar="FILE", help="one sample per line")
    p.add_argument("--param", action="append", metavar="K=V", help="catalog parameter (repeatable)")
    p.add_argument("--grid", choices=("linear", "geometric"))
    p.add_argument("--config", metavar="FILE", help="key=value settings file")
    p.add_argument("--y-start", dest="y_start", type=float)
    p.add_argument("--growth", type=float, help="window width (linear) or ratio (geometric)")
    p.add_argument("--windows", type=int)
    p.add_argument("--points", type=int, help="points per window")
    p.add_argument("--tol-converge", dest="tol_converge", type=float)
    p.add_argument("--tol-stable", dest="tol_stable", type=float)
    p.add_argument("--diverge-threshold", dest="diverge_threshold", type=float)
    p.add_argument("--decision-windows", dest="W", type=int)
    p.add_argument("--t-grid", dest="t_grid", metavar="T1,T2,...")
    p.add_argument("--output", metavar="FILE")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rvclass", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("classify", help="classify a function, JSON report")
    _add_target_options(p)
    p.add_argument("--json", action="store_true", help="JSON output (the default)")
    p.set_defaults(func=cmd_classify)
    p = sub.add_parser("trace", help="CSV trajectory of a limit quantity")
    _add_target_options(p)
    p.add_argument("--quantity", default="orders", help="orders | ratio:T | scaled:R,X")
    p.set_defaults(func=cmd_trace)
    p = sub.add_parser("catalog", help="list catalog entries")
    p.set_defaults(func=cmd_catalog)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except EvaluationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # reader went away (e.g. piped into head); not an error
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

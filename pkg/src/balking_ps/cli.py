"""Command-line front end: ``balking-ps <command> ...``.

Commands emit CSV (default) or JSON.  Floats are written with ``repr``,
the shortest string that round-trips, so identical inputs give identical
bytes.  Exit codes: 0 success, 1 a validation criterion failed, 2 bad
arguments, 3 a numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass

import mpmath
import numpy as np
import scipy

from . import __version__
from .asymptotics import (
    approx_fixed_rho,
    approx_light_traffic,
    approx_unconditional,
    heavy_density,
)
from .errors import ConvergenceError, DomainError, TruncationError
from .master_ode import integrate_density, integrate_tail, integrate_unconditional, oracle_moments
from .simulate import SimConfig, simulate
from .spectral import (
    ModelParams,
    mean_sojourn,
    second_moment,
    spectral_density,
    spectral_mean,
    spectral_second_moment,
    spectral_tail,
    t_switch,
    unconditional_spectral,
)
from .transform import laplace_transform

EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 1, 2, 3


class UsageError(Exception):
    pass


@dataclass
class RunSpec:
    command: str
    rho: float | None = None
    n: int | str | None = None
    t: list | None = None
    method: str = "auto"
    fmt: str = "csv"
    output: str | None = None
    seed: int = 0
    reps: int = 100_000
    tol: float = 1e-10
    discipline: str = "PS"
    quick: bool = False
    only: list | None = None


# --- parsing helpers ------------------------------------------------------------


def parse_grid(text: str) -> list[float]:
    """``"2"`` or ``"start:stop:count"`` (both ends included)."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            values = [float(parts[0])]
        elif len(parts) == 3:
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise UsageError("grid count must be >= 1")
            if count == 1:
                if start != stop:
                    raise UsageError("a one-point grid needs start == stop")
                values = [start]
            else:
                values = [float(v) for v in np.linspace(start, stop, count)]
        else:
            raise UsageError(f"bad grid {text!r}; use a number or start:stop:count")
    except ValueError:
        raise UsageError(f"bad grid {text!r}; use a number or start:stop:count") from None
    if any(not math.isfinite(v) for v in values):
        raise UsageError("grid values must be finite")
    if any(b <= a for a, b in zip(values, values[1:])):
        raise UsageError("grid must be strictly increasing")
    return values


def parse_n(text: str):
    if text == "mix":
        return "mix"
    try:
        n = int(text)
    except ValueError:
        raise UsageError(f"--n must be a non-negative integer or 'mix', got {text!r}") from None
    if n < 0:
        raise UsageError("--n must be >= 0")
    return n


def parse_only(text: str) -> list[int]:
    out = []
    for piece in text.split(","):
        if "-" in piece:
            lo, hi = piece.split("-", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(piece))
    if any(k < 1 or k > 10 for k in out):
        raise UsageError("--only selects criteria between 1 and 10")
    return sorted(set(out))


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True, default=_json_default)
    return "" if value is None else str(value)


def _json_default(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit(spec: RunSpec, fields: list[str], records: list[dict], stream) -> None:
    if spec.fmt == "json":
        meta = {
            "command": spec.command,
            "inputs": {k: v for k, v in vars(spec).items() if k not in ("command", "output", "fmt")},
            "versions": {"balking_ps": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "mpmath": mpmath.__version__},
            "seed": spec.seed,
        }
        text = json.dumps({"meta": meta, "records": records}, indent=2, sort_keys=False, default=_json_default)
        stream.write(text + "\n")
        return
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    for rec in records:
        writer.writerow([_fmt(rec.get(f)) for f in fields])
    stream.write(buf.getvalue())


# --- commands -------------------------------------------------------------------


def _need(spec, *names):
    for name in names:
        if getattr(spec, name) is None:
            raise UsageError(f"--{name} is required for '{spec.command}'")


def _params(spec):
    try:
        return ModelParams(spec.rho, tol=spec.tol)
    except DomainError as exc:
        raise UsageError(str(exc)) from None


def _check_times(spec, strict_positive=False):
    if any(t < 0 for t in spec.t) or (strict_positive and any(t <= 0 for t in spec.t)):
        raise UsageError("times must be > 0" if strict_positive else "times must be >= 0")


def _curve(spec, tail: bool):
    _need(spec, "rho", "n", "t")
    _check_times(spec)
    p = _params(spec)
    method = spec.method
    rows = []
    if method == "simulate":
        n0 = "stationary" if spec.n == "mix" else spec.n
        if not tail:
            raise UsageError("simulation estimates tails only; use 'tail' or 'simulate'")
        out = simulate(SimConfig(spec.rho, n0, spec.reps, seed=spec.seed, t_points=tuple(spec.t)))
        for t, v, h in zip(out.t_points, out.tail_hat, out.half_width):
            rows.append((float(t), float(v), "simulation", float(h)))
    elif spec.n == "mix":
        rows = _mixed_curve(spec, p, tail)
    elif method == "ode":
        fn = integrate_tail if tail else integrate_density
        rows = [(t, r.value, r.method, r.err_est) for t, r in zip(spec.t, fn(p, spec.n, spec.t))]
    elif method == "spectral":
        fn = spectral_tail if tail else spectral_density
        rows = [(t, *_unpack(fn(p, spec.n, t))) for t in spec.t]
    elif method == "auto":
        cut = t_switch(spec.n)
        early = [t for t in spec.t if t < cut]
        fn_ode = integrate_tail if tail else integrate_density
        fn_spec = spectral_tail if tail else spectral_density
        if early:
            rows += [(t, r.value, r.method, r.err_est) for t, r in zip(early, fn_ode(p, spec.n, early))]
        rows += [(t, *_unpack(fn_spec(p, spec.n, t))) for t in spec.t if t >= cut]
    elif method == "asymptotic":
        if tail:
            raise UsageError("asymptotic formulas are for the density; use 'density'")
        _check_times(spec, strict_positive=True)
        rows = [(t, *_unpack(_asymptotic(p, spec.n, t))) for t in spec.t]
    else:
        raise UsageError(f"unknown method {method!r}")
    return [
        {"rho": spec.rho, "n": spec.n, "t": float(t), "value": float(v), "method": m, "err_est": float(e)}
        for t, v, m, e in rows
    ]


def _unpack(result):
    return result.value, result.method, result.err_est


def _mixed_curve(spec, p, tail):
    if spec.method == "ode" or tail:
        if spec.method not in ("ode", "auto"):
            raise UsageError("the mixed tail is available from the ode method only")
        values = integrate_unconditional(p, spec.t, tail=tail)
        return [(t, v, "ode", 0.0) for t, v in zip(spec.t, values)]
    if spec.method == "spectral":
        return [(t, *_unpack(unconditional_spectral(p, t))) for t in spec.t]
    if spec.method == "asymptotic":
        _check_times(spec, strict_positive=True)
        return [(t, *_unpack(approx_unconditional(p, t))) for t in spec.t]
    cut = t_switch(0)
    early = [t for t in spec.t if t < cut]
    rows = [(t, v, "ode", 0.0) for t, v in zip(early, integrate_unconditional(p, early))] if early else []
    return rows + [(t, *_unpack(unconditional_spectral(p, t))) for t in spec.t if t >= cut]


def _asymptotic(p, n, t):
    """Pick the regime from rho: light traffic, heavy traffic, or fixed rho."""
    if p.rho <= 0.1:
        return approx_light_traffic(p, n, t)
    if p.rho >= 10.0:
        return heavy_density(p, n, t)
    if n < 1:
        raise UsageError("fixed-rho asymptotics need n >= 1")
    return approx_fixed_rho(p, n, t)


def cmd_density(spec):
    return ["rho", "n", "t", "value", "method", "err_est"], _curve(spec, tail=False)


def cmd_tail(spec):
    return ["rho", "n", "t", "value", "method", "err_est"], _curve(spec, tail=True)


def cmd_moments(spec):
    _need(spec, "rho", "n")
    if spec.n == "mix":
        raise UsageError("moments need an integer --n")
    p = _params(spec)
    if spec.method == "spectral":
        mean, second = spectral_mean(p, spec.n), spectral_second_moment(p, spec.n)
    elif spec.method == "ode":
        mean, second = oracle_moments(p, spec.n)
    elif spec.method == "auto":
        mean, second = mean_sojourn(p, spec.n), second_moment(p, spec.n)
    else:
        raise UsageError("moments support --method auto, spectral or ode")
    method = "closed form" if spec.method == "auto" else spec.method
    record = {"rho": spec.rho, "n": spec.n, "mean": float(mean), "second_moment": float(second), "method": method}
    return ["rho", "n", "mean", "second_moment", "method"], [record]


def cmd_transform(spec):
    _need(spec, "rho", "n", "t")
    if spec.n == "mix":
        raise UsageError("the transform needs an integer --n")
    p = _params(spec)
    records = []
    for theta in spec.t:
        point = laplace_transform(p, spec.n, theta)
        records.append({"rho": spec.rho, "n": spec.n, "theta": theta, "value": point.value, "r": point.r})
    return ["rho", "n", "theta", "value", "r"], records


def cmd_asymptotic(spec):
    _need(spec, "rho", "n", "t")
    _check_times(spec, strict_positive=True)
    p = _params(spec)
    records = []
    for t in spec.t:
        res = approx_unconditional(p, t) if spec.n == "mix" else _asymptotic(p, spec.n, t)
        coords = res.extras.get("coords", {})
        records.append(
            {"rho": spec.rho, "n": spec.n, "t": t, "regime": res.regime, "value": res.value,
             "err_est": res.err_est, "coords": coords, "warning": res.warning}
        )
    return ["rho", "n", "t", "regime", "value", "err_est", "coords", "warning"], records


SIM_FIELDS = [
    "rho", "n", "discipline", "t", "tail_hat", "half_width", "reps_used", "seed", "mean", "mean_se",
    "second_moment", "second_se", "truncated", "zero_fraction", "zero_half_width", "warning",
]


def cmd_simulate(spec):
    _need(spec, "rho", "n")
    t_points = tuple(spec.t or (1.0, 2.0, 4.0))
    n0 = "stationary" if spec.n == "mix" else spec.n
    try:
        cfg = SimConfig(spec.rho, n0, spec.reps, seed=spec.seed, discipline=spec.discipline, t_points=t_points)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    out = simulate(cfg)
    common = {k: getattr(out, k) for k in ("reps_used", "seed", "mean", "mean_se", "second_moment", "second_se",
                                            "truncated", "zero_fraction", "zero_half_width", "warning")}
    records = [
        {"rho": spec.rho, "n": spec.n, "discipline": spec.discipline, "t": float(t), "tail_hat": float(v),
         "half_width": float(h), **common}
        for t, v, h in zip(out.t_points, out.tail_hat, out.half_width)
    ]
    return SIM_FIELDS, records


COMMANDS = {
    "density": cmd_density,
    "tail": cmd_tail,
    "moments": cmd_moments,
    "transform": cmd_transform,
    "asymptotic": cmd_asymptotic,
    "simulate": cmd_simulate,
}


def run(spec: RunSpec, stream=None) -> int:
    """Execute one command and write its artifact; returns the exit status."""
    stream = stream or sys.stdout
    if spec.command == "validate":
        from .acceptance import DEFAULT_SEED, render, run_all

        results = run_all(spec.only, seed=spec.seed if spec.seed else DEFAULT_SEED, quick=spec.quick)
        stream.write(render(results))
        return 0 if all(r.passed for r in results) else EXIT_FAILED
    fields, records = COMMANDS[spec.command](spec)
    if spec.output:
        with open(spec.output, "w", encoding="utf-8", newline="") as fh:
            emit(spec, fields, records, fh)
    else:
        emit(spec, fields, records, stream)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="balking-ps",
        description="Sojourn times in the M/M/1 processor-sharing queue with balking b_n = 1/(n+1).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, t_help="time: a value or start:stop:count", n=True):
        p.add_argument("--rho", type=float, required=True, help="traffic intensity (> 0)")
        if n:
            p.add_argument("--n", type=str, required=True, help="others found on arrival, or 'mix' for Poisson(rho)")
        p.add_argument("--t", type=str, help=t_help)
        p.add_argument("--format", dest="fmt", choices=("csv", "json"), default="csv")
        p.add_argument("--output", "-o", help="write here instead of standard output")
        p.add_argument("--tol", type=float, default=1e-10, help="series tolerance")

    methods = ("auto", "spectral", "ode", "asymptotic", "simulate")
    for name, helptext in (("density", "density p_n(t)"), ("tail", "tail Prob[sojourn > t]")):
        p = sub.add_parser(name, help=helptext)
        common(p)
        p.add_argument("--method", choices=methods, default="auto")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--reps", type=int, default=100_000)

    p = sub.add_parser("moments", help="first and second moments of the sojourn time")
    common(p)
    p.add_argument("--method", choices=("auto", "spectral", "ode"), default="auto")

    p = sub.add_parser("transform", help="Laplace transform of the density")
    common(p, t_help="theta: a value or start:stop:count")

    p = sub.add_parser("asymptotic", help="regime-selected asymptotic approximation")
    common(p)

    p = sub.add_parser("simulate", help="Monte-Carlo tail estimates")
    common(p, t_help="tail grid (default 1,2,4)")
    p.add_argument("--discipline", choices=("PS", "ROS"), default="PS")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=100_000)

    p = sub.add_parser("validate", help="run the acceptance checks and print a table")
    p.add_argument("--quick", action="store_true", help="fewer simulation replications")
    p.add_argument("--seed", type=int, default=0, help="simulation seed (0 picks the built-in default)")
    p.add_argument("--only", type=str, help="criteria to run, e.g. 1-3,5")
    return parser


def spec_from_args(args) -> RunSpec:
    spec = RunSpec(command=args.command)
    for name in ("rho", "method", "fmt", "output", "seed", "reps", "tol", "discipline", "quick"):
        if hasattr(args, name):
            setattr(spec, name, getattr(args, name))
    if getattr(args, "n", None) is not None:
        spec.n = parse_n(args.n)
    if getattr(args, "t", None) is not None:
        spec.t = parse_grid(args.t)
    if getattr(args, "only", None):
        spec.only = parse_only(args.only)
    if spec.command == "simulate" or spec.method == "simulate":
        if spec.reps < 1:
            raise UsageError("--reps must be positive")
    return spec


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return run(spec_from_args(args))
    except (UsageError, DomainError) as exc:
        print(f"balking-ps: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, TruncationError, ArithmeticError) as exc:
        print(f"balking-ps: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())

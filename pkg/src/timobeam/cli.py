"""Command-line entry point for runs, convergence studies, and demos.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import abstract_scheme, benchmarks, reporting, timestepper
from .basis import evaluate
from .galerkin import PivotError
from .legendre import QuadratureConvergenceError

__all__ = ["RunConfig", "parse_config", "main", "console_entry"]

MODES = ("run", "temporal-study", "spatial-study", "abstract-demo", "machine-precision")

# Benchmark defaults: (n_steps, n_funcs, total_time), as used in the final
# configuration of each experiment.
TEST_DEFAULTS = {1: (256, 35, 1.0), 2: (256, 45, 1.0), 3: (1024, 15, 4.0)}
SPATIAL_GRIDS = {1: [20, 25, 30, 35, 40], 2: [29, 35, 40, 45], 3: [7, 9, 11, 13, 15]}
TEMPORAL_GRID = [64, 128, 256, 512]
MACHINE_PRECISION_DEFAULTS = (64, 8, 1.0)


class UsageError(ValueError):
    """Bad flags or configuration; maps to exit code 1."""


@dataclass
class RunConfig:
    mode: str = "run"
    test: int | None = None
    n: int | None = None
    n_funcs: int | None = None
    total_time: float | None = None
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    delta: float = 1.0
    a1: float = 1.0
    a2: float = 1.0
    tol: float = 1e-12
    out: str = "."
    fmt: str = "csv"
    parallel: bool = False
    record_trajectory: bool = False
    grid: list[int] | None = None
    dim: int = 20
    seed: int = 20250811


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="timobeam", description=__doc__)
    parser.add_argument("--mode", choices=MODES, default=None)
    parser.add_argument("--test", type=int, default=None)
    parser.add_argument("--config", type=str, default=None, help="JSON config file")
    parser.add_argument("--n", type=int, default=None, help="number of time steps")
    parser.add_argument("--N", type=int, default=None, dest="n_funcs",
                        help="number of trial functions")
    parser.add_argument("--T", type=float, default=None, dest="total_time")
    for name in ("alpha", "beta", "gamma", "delta", "a1", "a2"):
        parser.add_argument(f"--{name}", type=float, default=None)
    parser.add_argument("--tol", type=float, default=None, help="quadrature tolerance")
    parser.add_argument("--out", type=str, default=None, help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default=None, dest="fmt")
    parser.add_argument("--parallel", choices=("on", "off"), default=None)
    parser.add_argument("--record-trajectory", action="store_true", default=None,
                        dest="record_trajectory")
    parser.add_argument("--grid", type=str, default=None,
                        help="comma-separated n or N values for study modes")
    parser.add_argument("--dim", type=int, default=None, help="abstract-demo dimension")
    parser.add_argument("--seed", type=int, default=None, help="abstract-demo seed")
    return parser


def parse_config(argv: list[str]) -> RunConfig:
    """Resolve flags over config-file values over defaults, then validate."""
    args = _build_parser().parse_args(argv)
    file_values: dict = {}
    if args.config is not None:
        try:
            with open(args.config) as handle:
                file_values = json.load(handle)
        except OSError as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file {args.config} is not valid JSON: {exc}") from exc

    config = RunConfig()
    renames = {"N": "n_funcs", "T": "total_time", "format": "fmt"}
    valid = {f.name for f in fields(RunConfig)}
    for key, value in file_values.items():
        name = renames.get(key, key)
        if name not in valid:
            raise UsageError(f"unknown config key {key!r}")
        if name == "parallel" and isinstance(value, str):
            value = value == "on"
        setattr(config, name, value)

    for name in ("mode", "test", "n", "n_funcs", "total_time", "alpha", "beta",
                 "gamma", "delta", "a1", "a2", "tol", "out", "fmt",
                 "record_trajectory", "dim", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(config, name, value)
    if args.parallel is not None:
        config.parallel = args.parallel == "on"
    if args.grid is not None:
        try:
            config.grid = [int(part) for part in args.grid.split(",")]
        except ValueError as exc:
            raise UsageError(f"--grid expects comma-separated integers: {exc}") from exc
    if args.out is None and "out" not in file_values:
        config.out = os.environ.get("TIMOSHENKO_OUT_DIR", ".")

    if config.mode not in MODES:
        raise UsageError(f"unknown mode {config.mode!r}")
    if config.mode in ("run", "temporal-study", "spatial-study"):
        if config.test not in benchmarks.BENCHMARK_IDS:
            raise UsageError(
                f"--test must be one of {benchmarks.BENCHMARK_IDS} for mode {config.mode}"
            )
    if config.fmt not in ("csv", "json"):
        raise UsageError(f"unknown format {config.fmt!r}")
    _resolve_params(config)  # validate overrides eagerly
    return config


def _resolve_params(config: RunConfig) -> timestepper.SchemeParameters:
    if config.mode == "machine-precision":
        defaults = MACHINE_PRECISION_DEFAULTS
    else:
        defaults = TEST_DEFAULTS.get(config.test, MACHINE_PRECISION_DEFAULTS)
    n = config.n if config.n is not None else defaults[0]
    n_funcs = config.n_funcs if config.n_funcs is not None else defaults[1]
    total_time = config.total_time if config.total_time is not None else defaults[2]
    try:
        return timestepper.SchemeParameters(
            alpha=config.alpha, beta=config.beta, gamma=config.gamma,
            delta=config.delta, a1=config.a1, a2=config.a2, length=2.0,
            total_time=total_time, n_steps=n, n_funcs=n_funcs,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _make_problem(config: RunConfig, params: timestepper.SchemeParameters):
    if config.mode == "machine-precision":
        return benchmarks.make_machine_precision_case(params)
    return benchmarks.make_benchmark(config.test, params)


def _max_errors(records) -> tuple[float, float]:
    measured = [r for r in records if r.k >= 2]
    return max(r.E1 for r in measured), max(r.E2 for r in measured)


def _run_single(config: RunConfig) -> int:
    params = _resolve_params(config)
    problem = _make_problem(config, params)
    started = time.perf_counter()
    result = timestepper.run(
        problem, params, quad_tol=config.tol, parallel=config.parallel,
        record_trajectory=config.record_trajectory,
    )
    elapsed = time.perf_counter() - started
    reporting.ensure_directory(config.out)
    base = reporting.run_basename(problem.id, params.n_steps, params.n_funcs)
    errors_path = os.path.join(config.out, f"{base}_errors.{config.fmt}")
    reporting.write_run(result.records, config.fmt, errors_path)
    profile_path = os.path.join(config.out, f"{base}_profile.csv")
    x = np.linspace(0.0, params.length, reporting.PROFILE_POINTS)
    reporting.write_profile(
        profile_path,
        x,
        problem.exact_u(x, params.total_time),
        evaluate(result.final_state.u_curr, x),
        problem.exact_v(x, params.total_time),
        evaluate(result.final_state.v_curr, x),
    )
    max_e1, max_e2 = _max_errors(result.records)
    print(
        f"test={problem.id} n={params.n_steps} N={params.n_funcs}: "
        f"max_E1={max_e1:.6e} max_E2={max_e2:.6e} wall={elapsed:.2f}s -> {errors_path}"
    )
    return 0


def _study_runs(config: RunConfig, grid: list[tuple[int, int]]):
    """Run (n_steps, n_funcs) experiments, optionally in parallel, in grid order."""

    def one(pair):
        n, n_funcs = pair
        sub = RunConfig(**{f.name: getattr(config, f.name) for f in fields(RunConfig)})
        sub.n, sub.n_funcs = n, n_funcs
        params = _resolve_params(sub)
        problem = _make_problem(sub, params)
        result = timestepper.run(problem, params, quad_tol=config.tol)
        measured = [r for r in result.records if r.k >= 2]
        return {
            "E1": max(r.E1 for r in measured),
            "E2": max(r.E2 for r in measured),
            "dE1": max((r.dE1 for r in measured if r.dE1 is not None), default=math.nan),
            "dE2": max((r.dE2 for r in measured if r.dE2 is not None), default=math.nan),
        }

    if config.parallel:
        with ThreadPoolExecutor(max_workers=min(4, len(grid))) as pool:
            return list(pool.map(one, grid))
    return [one(pair) for pair in grid]


def _run_temporal_study(config: RunConfig) -> int:
    params = _resolve_params(config)
    grid_n = config.grid or TEMPORAL_GRID
    n_funcs = params.n_funcs if config.n_funcs is not None else 40
    rows = _study_runs(config, [(n, n_funcs) for n in grid_n])
    control = _study_runs(config, [(grid_n[-1], n_funcs + 10)])[0]
    errors = [max(row["E1"], row["E2"]) for row in rows]
    d_errors = [max(row["dE1"], row["dE2"]) for row in rows]
    study = reporting.estimate_temporal_order(
        grid_n, errors, d_errors, control_error=max(control["E1"], control["E2"]),
        total_time=params.total_time,
    )
    study.per_solution_errors = {
        "E1": [row["E1"] for row in rows], "E2": [row["E2"] for row in rows],
        "dE1": [row["dE1"] for row in rows], "dE2": [row["dE2"] for row in rows],
    }
    reporting.ensure_directory(config.out)
    dest = os.path.join(config.out, f"test{config.test}_temporal_study.csv")
    reporting.write_study(study, dest)
    print(f"temporal study, test {config.test}, N={n_funcs}:")
    for i, n in enumerate(grid_n):
        order = f" order={study.orders[i - 1]:.3f}" if i else ""
        print(f"  n={n:5d} max_error={errors[i]:.6e}{order}")
    print(f"  median order: {study.summary:.3f} "
          f"(derivative: {study.derivative_summary:.3f})")
    for flag in study.flags:
        print(f"  WARNING: {flag}")
    print(f"  -> {dest}")
    return 0


def _run_spatial_study(config: RunConfig) -> int:
    params = _resolve_params(config)
    grid_funcs = config.grid or SPATIAL_GRIDS[config.test]
    n = params.n_steps
    rows = _study_runs(config, [(n, nf) for nf in grid_funcs])
    errors = [max(row["E1"], row["E2"]) for row in rows]
    study = reporting.estimate_spatial_decay(grid_funcs, errors)
    study.per_solution_errors = {
        "E1": [row["E1"] for row in rows], "E2": [row["E2"] for row in rows],
    }
    reporting.ensure_directory(config.out)
    dest = os.path.join(config.out, f"test{config.test}_spatial_study.csv")
    reporting.write_study(study, dest)
    print(f"spatial study, test {config.test}, n={n}:")
    for nf, err in zip(grid_funcs, errors):
        print(f"  N={nf:4d} max_error={err:.6e}")
    print(f"  log-log decay slope: {study.summary:.2f}")
    for flag in study.flags:
        print(f"  NOTE: {flag}")
    print(f"  -> {dest}")
    return 0


def _run_abstract_demo(config: RunConfig) -> int:
    rng = np.random.default_rng(config.seed)
    triple = abstract_scheme.random_triple(config.dim, rng)
    data = [rng.standard_normal(config.dim) for _ in range(4)]
    g1, g2 = rng.standard_normal(config.dim), rng.standard_normal(config.dim)
    f1 = lambda t: np.sin(t) * g1
    f2 = lambda t: np.cos(t) * g2
    names = abstract_scheme.MonitorValues._fields
    maxima = {}
    for n in (64, 128, 256):
        params = abstract_scheme.AbstractParameters(
            alpha=config.alpha, beta=config.beta, gamma=config.gamma,
            delta=config.delta, a1=config.a1, a2=config.a2,
            total_time=1.0, n_steps=n,
        )
        _, values = abstract_scheme.run_abstract(triple, *data, f1, f2, params)
        maxima[n] = np.max(np.array(values), axis=0)
    print(f"abstract-scheme demo: dim={config.dim} seed={config.seed} "
          f"subordination b0={triple.b0:.3f}")
    print("  running maxima of the monitored quantities:")
    header = "  {:>6}".format("n") + "".join(f" {name:>12}" for name in names)
    print(header)
    for n, row in maxima.items():
        print("  {:>6d}".format(n) + "".join(f" {value:12.6f}" for value in row))
    ref = maxima[256]
    spread = max(float(np.max(np.abs(maxima[n] - ref) / ref)) for n in (64, 128))
    print(f"  max relative spread across tau refinement: {100 * spread:.2f}%")
    reporting.ensure_directory(config.out)
    dest = os.path.join(config.out, "abstract_demo.json")
    payload = {
        "dim": config.dim, "seed": config.seed, "subordination": triple.b0,
        "maxima": {str(n): dict(zip(names, map(float, row))) for n, row in maxima.items()},
        "max_relative_spread": spread,
    }
    try:
        with open(dest, "w") as handle:
            json.dump(payload, handle, indent=1)
            handle.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing {dest}: {exc}") from exc
    print(f"  -> {dest}")
    return 0


def main(argv: list[str] | None = None) -> int:
    """Dispatch a parsed configuration; returns the process exit code."""
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
        if config.mode in ("run", "machine-precision"):
            return _run_single(config)
        if config.mode == "temporal-study":
            return _run_temporal_study(config)
        if config.mode == "spatial-study":
            return _run_spatial_study(config)
        return _run_abstract_demo(config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (QuadratureConvergenceError, PivotError, timestepper.StepFailure,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return 3


def console_entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    console_entry()

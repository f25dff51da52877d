"""Error records, convergence-order estimation, and CSV/JSON serialization."""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ErrorRecord",
    "ConvergenceStudy",
    "estimate_temporal_order",
    "estimate_spatial_decay",
    "run_basename",
    "write_run",
    "read_run",
    "write_profile",
    "write_study",
]

ERROR_COLUMNS = ["k", "t", "E1", "E2", "dE1", "dE2", "q", "mon_du", "mon_dv", "mon_Au", "mon_Lv"]
PROFILE_COLUMNS = ["x", "u_exact", "u_num", "v_exact", "v_num"]
STUDY_COLUMNS = ["axis", "value", "tau", "max_E1", "max_E2", "max_dE1", "max_dE2"]
PROFILE_POINTS = 512


@dataclass(frozen=True)
class ErrorRecord:
    """Per-layer L2 errors, derivative errors, and boundedness monitors."""

    k: int
    t: float
    E1: float
    E2: float
    dE1: float | None
    dE2: float | None
    q: float
    mon_du: float
    mon_dv: float
    mon_Au: float
    mon_Lv: float


@dataclass
class ConvergenceStudy:
    """Grid of runs along one refinement axis with max errors and rates."""

    axis: str  # "temporal" (n doubling) or "spatial" (N sweep)
    grid: list[int]
    max_errors: list[float]
    orders: list[float] = field(default_factory=list)
    summary: float = math.nan
    flags: list[str] = field(default_factory=list)
    max_derivative_errors: list[float] = field(default_factory=list)
    derivative_orders: list[float] = field(default_factory=list)
    derivative_summary: float = math.nan
    tau_values: list[float] = field(default_factory=list)
    per_solution_errors: dict[str, list[float]] = field(default_factory=dict)


def _pairwise_orders(errors: list[float]) -> list[float]:
    return [
        math.log2(errors[i] / errors[i + 1]) if errors[i + 1] > 0.0 else math.inf
        for i in range(len(errors) - 1)
    ]


def estimate_temporal_order(
    grid_n: list[int],
    max_errors: list[float],
    max_derivative_errors: list[float] | None = None,
    control_error: float | None = None,
    total_time: float = 1.0,
) -> ConvergenceStudy:
    """Pairwise convergence orders under time-step halving.

    grid_n must be strictly increasing with each entry doubling the previous
    one.  control_error, when given, is the max error of a higher-resolution
    spatial control run at the finest n; it flags spatial contamination when
    the observed errors stop decreasing even though the control says the
    spatial error is negligible.
    """
    if len(grid_n) < 3:
        raise ValueError("a temporal study needs at least 3 runs with n doubling")
    if any(b != 2 * a for a, b in zip(grid_n, grid_n[1:])):
        raise ValueError(f"temporal grid must double at each step, got {grid_n}")
    if len(max_errors) != len(grid_n):
        raise ValueError("one max error per grid point is required")
    study = ConvergenceStudy(
        axis="temporal",
        grid=list(grid_n),
        max_errors=list(max_errors),
        tau_values=[total_time / n for n in grid_n],
    )
    study.orders = _pairwise_orders(study.max_errors)
    study.summary = float(np.median(study.orders))
    if max_derivative_errors is not None:
        study.max_derivative_errors = list(max_derivative_errors)
        study.derivative_orders = _pairwise_orders(study.max_derivative_errors)
        study.derivative_summary = float(np.median(study.derivative_orders))
    if control_error is not None and study.max_errors[-1] > 0.0:
        # The control run repeats the finest time grid with a larger basis; if
        # that moves the error by more than 1%, the basis was limiting.
        spatial_fraction = abs(study.max_errors[-1] - control_error) / study.max_errors[-1]
        if spatial_fraction > 0.01:
            study.flags.append(
                f"spatial-error contamination: control run shifts the finest "
                f"error by {100 * spatial_fraction:.2f}%"
            )
    return study


def estimate_spatial_decay(
    grid_n_funcs: list[int],
    max_errors: list[float],
    temporal_floor: float | None = None,
) -> ConvergenceStudy:
    """Spectral decay under basis enlargement at a fixed fine time grid.

    Reports the max-error sequence and the log-error slope against log-N; when
    the sequence flattens near the supplied temporal floor the study is flagged
    rather than reported as a spatial rate.
    """
    if len(grid_n_funcs) < 4:
        raise ValueError("a spatial study needs at least 4 runs with increasing N")
    if any(b <= a for a, b in zip(grid_n_funcs, grid_n_funcs[1:])):
        raise ValueError(f"spatial grid must be strictly increasing, got {grid_n_funcs}")
    if len(max_errors) != len(grid_n_funcs):
        raise ValueError("one max error per grid point is required")
    study = ConvergenceStudy(
        axis="spatial", grid=list(grid_n_funcs), max_errors=list(max_errors)
    )
    logs = np.log(np.asarray(max_errors))
    log_n = np.log(np.asarray(grid_n_funcs, dtype=float))
    slope = np.polyfit(log_n, logs, 1)[0]
    study.summary = float(-slope)
    floor = temporal_floor
    if floor is None and len(max_errors) >= 2:
        # A stalled tail reveals the floor even when no control value is given.
        if max_errors[-1] > 0.5 * max_errors[-2]:
            floor = max_errors[-1]
    if floor is not None and max_errors[-1] <= 2.0 * floor:
        study.flags.append("temporal floor reached")
    return study


def _fmt(value: float | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return f"{value:.17g}"


def run_basename(test_id, n_steps: int, n_funcs: int) -> str:
    return f"test{test_id}_{n_steps}_{n_funcs}"


def write_run(records: list[ErrorRecord], fmt: str, destination: str) -> None:
    """Serialize per-layer records to CSV or JSON at the given path."""
    if not records:
        raise ValueError("cannot write an empty record stream")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unsupported format {fmt!r}; expected 'csv' or 'json'")
    try:
        if fmt == "csv":
            with open(destination, "w", newline="") as handle:
                writer = csv.writer(handle)
                writer.writerow(ERROR_COLUMNS)
                for rec in records:
                    writer.writerow(
                        [
                            _fmt(rec.k),
                            _fmt(rec.t),
                            _fmt(rec.E1),
                            _fmt(rec.E2),
                            _fmt(rec.dE1),
                            _fmt(rec.dE2),
                            _fmt(rec.q),
                            _fmt(rec.mon_du),
                            _fmt(rec.mon_dv),
                            _fmt(rec.mon_Au),
                            _fmt(rec.mon_Lv),
                        ]
                    )
        else:
            payload = [
                {name: getattr(rec, name) for name in ERROR_COLUMNS} for rec in records
            ]
            with open(destination, "w") as handle:
                json.dump(payload, handle, indent=1)
                handle.write("\n")
    except OSError as exc:
        raise OSError(f"failed writing run records to {destination}: {exc}") from exc


def read_run(path: str) -> list[ErrorRecord]:
    """Parse a record stream written by write_run (format inferred from suffix)."""
    try:
        if path.endswith(".json"):
            with open(path) as handle:
                rows = json.load(handle)
        else:
            with open(path, newline="") as handle:
                reader = csv.DictReader(handle)
                rows = [
                    {
                        name: (None if row[name] == "" else row[name])
                        for name in ERROR_COLUMNS
                    }
                    for row in reader
                ]
    except OSError as exc:
        raise OSError(f"failed reading run records from {path}: {exc}") from exc
    records = []
    for row in rows:
        records.append(
            ErrorRecord(
                k=int(row["k"]),
                t=float(row["t"]),
                E1=float(row["E1"]),
                E2=float(row["E2"]),
                dE1=None if row["dE1"] is None else float(row["dE1"]),
                dE2=None if row["dE2"] is None else float(row["dE2"]),
                q=float(row["q"]),
                mon_du=float(row["mon_du"]),
                mon_dv=float(row["mon_dv"]),
                mon_Au=float(row["mon_Au"]),
                mon_Lv=float(row["mon_Lv"]),
            )
        )
    return records


def write_profile(
    destination: str,
    x: np.ndarray,
    u_exact: np.ndarray,
    u_num: np.ndarray,
    v_exact: np.ndarray,
    v_num: np.ndarray,
) -> None:
    """Final-layer solution profile on a uniform grid, one row per point."""
    try:
        with open(destination, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(PROFILE_COLUMNS)
            for row in zip(x, u_exact, u_num, v_exact, v_num):
                writer.writerow([_fmt(float(value)) for value in row])
    except OSError as exc:
        raise OSError(f"failed writing profile to {destination}: {exc}") from exc


def write_study(study: ConvergenceStudy, destination: str) -> None:
    """Serialize a convergence study, one row per grid point."""
    axis = "n" if study.axis == "temporal" else "N"
    try:
        with open(destination, "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(STUDY_COLUMNS)
            for i, value in enumerate(study.grid):
                tau = study.tau_values[i] if study.tau_values else None
                e1 = study.per_solution_errors.get("E1", study.max_errors)[i]
                e2 = study.per_solution_errors.get("E2", study.max_errors)[i]
                fallback = study.max_derivative_errors or [None] * len(study.grid)
                d1 = study.per_solution_errors.get("dE1", fallback)[i]
                d2 = study.per_solution_errors.get("dE2", fallback)[i]
                writer.writerow(
                    [axis, _fmt(value), _fmt(tau), _fmt(e1), _fmt(e2), _fmt(d1), _fmt(d2)]
                )
    except OSError as exc:
        raise OSError(f"failed writing study to {destination}: {exc}") from exc


def ensure_directory(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise OSError(f"failed creating output directory {path}: {exc}") from exc

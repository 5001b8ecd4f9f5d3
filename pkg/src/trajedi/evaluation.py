"""Accuracy, efficiency and calibration-cost measurements."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import UsageError
from .grid import AnchorGrid, CalibrationParams, calibrate
from .model import Dataset, Trajectory
from .scheme import CalibrationPlan, TimingReport  # noqa: F401  (re-exported)
from .synthetic import _walk_cells, add_noise

COST_CURVE_HEADER = ("points_per_trajectory", "mean_calibration_ms", "trials")


@dataclass(frozen=True)
class AccuracyReport:
    value: float
    pair_count: int


@dataclass(frozen=True)
class EfficiencyReport:
    value: float
    calibrated_points: int
    total_points: int


def accuracy(scheme_matrix, truth_matrix) -> AccuracyReport:
    """Mean absolute off-diagonal difference divided by the mean truth distance.

    Only the upper triangle is compared. A zero truth mean gives 0.0 when the
    matrices agree and ``inf`` otherwise.
    """
    s = np.asarray(scheme_matrix, dtype=np.float64)
    t = np.asarray(truth_matrix, dtype=np.float64)
    if s.shape != t.shape or s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise UsageError(f"matrices must be square and equal in shape, got {s.shape} and {t.shape}")
    iu = np.triu_indices(s.shape[0], k=1)
    pairs = len(iu[0])
    if pairs == 0:
        return AccuracyReport(0.0, 0)
    diff = np.abs(s[iu] - t[iu]).mean()
    norm = t[iu].mean()
    if norm == 0:
        return AccuracyReport(0.0 if diff == 0 else float("inf"), pairs)
    return AccuracyReport(float(diff / norm), pairs)


def efficiency(plan: CalibrationPlan, dataset: Dataset) -> EfficiencyReport:
    """Fraction of raw points covered by the calibrated windows."""
    for entry in plan:
        if entry.traj_id not in dataset:
            raise UsageError(f"plan refers to unknown trajectory {entry.traj_id!r}")
    calibrated = plan.calibrated_points
    total = dataset.total_points
    return EfficiencyReport(calibrated / total if total else 0.0, calibrated, total)


@dataclass(frozen=True)
class CostRow:
    points_per_trajectory: int
    mean_calibration_ms: float
    trials: int


def cost_curve_inputs(length: int, trials: int, grid: AnchorGrid, seed: int, noise_sd: float | None = None) -> list[Trajectory]:
    """The noisy walks timed for one length; a pure function of its arguments."""
    if noise_sd is None:
        noise_sd = 0.25 * min(grid.cell_width, grid.cell_height)
    rng = np.random.default_rng([seed, length])
    out = []
    for k in range(trials):
        cells = _walk_cells(grid.cells_per_side, length, rng)
        walk = Trajectory(f"w{k}", grid.anchor_coords(cells))
        out.append(add_noise(walk, rng, noise_sd))
    return out


def calibration_cost_curve(
    lengths: Sequence[int],
    trials: int,
    grid: AnchorGrid,
    params: CalibrationParams,
    seed: int = 0,
    noise_sd: float | None = None,
) -> list[CostRow]:
    """Mean wall-clock time of full calibration per trajectory length."""
    lengths = list(lengths)
    if not lengths:
        raise UsageError("lengths must be non-empty")
    if trials < 1:
        raise UsageError(f"trials must be >= 1, got {trials}")
    for n in lengths:
        if n < 2:
            raise UsageError(f"every length must be >= 2, got {n}")
    # untimed warm-up so one-off setup is not charged to the first length
    calibrate(cost_curve_inputs(2, 1, grid, seed, noise_sd)[0], grid, params)
    rows = []
    for n in lengths:
        walks = cost_curve_inputs(n, trials, grid, seed, noise_sd)
        elapsed = 0.0
        for w in walks:
            t0 = time.perf_counter()
            calibrate(w, grid, params)
            elapsed += time.perf_counter() - t0
        rows.append(CostRow(n, elapsed * 1000.0 / trials, trials))
    return rows


def write_cost_curve(rows: Sequence[CostRow], dest) -> None:
    """Write to a path, or to an open text stream such as ``sys.stdout``."""
    if hasattr(dest, "write"):
        _write_cost_rows(rows, dest)
        return
    with Path(dest).open("w", encoding="utf-8", newline="") as fh:
        _write_cost_rows(rows, fh)


def _write_cost_rows(rows, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(COST_CURVE_HEADER)
    for r in rows:
        writer.writerow((r.points_per_trajectory, repr(r.mean_calibration_ms), r.trials))


def read_cost_curve(path) -> list[CostRow]:
    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != COST_CURVE_HEADER:
            raise UsageError(f"unexpected cost-curve header {reader.fieldnames}")
        return [
            CostRow(int(r["points_per_trajectory"]), float(r["mean_calibration_ms"]), int(r["trials"]))
            for r in reader
        ]

"""Experiment sweeps over mode, alpha and partner strategy."""

from __future__ import annotations

import csv
import logging
import time
from dataclasses import astuple, dataclass, fields
from pathlib import Path
from typing import Sequence

from .config import ExperimentConfig
from .dtw import pairwise_dtw, warm_up
from .errors import TrajediError
from .evaluation import accuracy, efficiency
from .model import Dataset, check_companion, format_float, load_csv
from .scheme import PartnerStrategy, pairwise_distance_matrix
from .synthetic import generate_dataset

log = logging.getLogger(__name__)

TIMING_COLUMNS = ("calibration_ms", "dtw_ms", "total_ms", "partner_selection_ms")


@dataclass(frozen=True)
class ExperimentRow:
    dataset: str
    mode: str
    alpha: float | None
    strategy: str | None
    accuracy: float
    efficiency: float
    calibration_ms: float
    dtw_ms: float
    total_ms: float
    seed: int
    partner_selection_ms: float


RESULTS_HEADER = tuple(f.name for f in fields(ExperimentRow))


class ExperimentFailure(TrajediError):
    def __init__(self, combo: str, cause: Exception):
        self.combo = combo
        self.cause = cause
        super().__init__(f"{combo}: {cause}")


def load_datasets(config: ExperimentConfig) -> tuple[Dataset, Dataset]:
    if config.generator is not None:
        generated = generate_dataset(config.generator)
        return generated.truth, generated.degraded
    truth = load_csv(config.truth)
    degraded = load_csv(config.degraded)
    check_companion(truth, degraded)
    return truth, degraded


def run_experiment(
    config: ExperimentConfig,
    datasets: tuple[Dataset, Dataset] | None = None,
) -> list[ExperimentRow]:
    """One row per (mode, alpha, strategy), in mode, then ascending alpha,
    then declared strategy order. ``none`` and ``full`` give one row each."""
    truth, degraded = datasets if datasets is not None else load_datasets(config)
    check_companion(truth, degraded)
    grid, params = config.grid, config.params
    warm_up()

    truth_matrix = pairwise_dtw(truth, workers=config.workers)

    needs_raw = "none" in config.modes or (
        "trajedi" in config.modes and any(s in ("furthest", "shortest") for s in config.strategies)
    )
    raw = None
    raw_ms = 0.0
    if needs_raw:
        t0 = time.perf_counter()
        raw = pairwise_dtw(degraded, workers=config.workers)
        raw_ms = (time.perf_counter() - t0) * 1000.0

    combos: list[tuple[str, float | None, str | None]] = []
    for mode in config.modes:
        if mode == "trajedi":
            combos.extend((mode, a, s) for a in config.alphas for s in config.strategies)
        else:
            combos.append((mode, None, None))

    rows = []
    for mode, alpha, strategy_name in combos:
        label = f"mode={mode}" + (f" alpha={alpha} strategy={strategy_name}" if alpha is not None else "")
        log.info("running %s", label)
        strategy = PartnerStrategy.parse(strategy_name, config.seed) if strategy_name else None
        shared = raw if mode == "none" or (strategy is not None and strategy.needs_raw_distances) else None
        try:
            result = pairwise_distance_matrix(
                degraded,
                mode,
                grid,
                params,
                alpha=alpha,
                strategy=strategy,
                raw_distances=shared,
                raw_distances_ms=raw_ms if shared is not None else 0.0,
                workers=config.workers,
            )
        except (TrajediError, ValueError) as exc:
            raise ExperimentFailure(label, exc) from exc
        rows.append(
            ExperimentRow(
                dataset=config.dataset,
                mode=mode,
                alpha=alpha,
                strategy=strategy_name,
                accuracy=accuracy(result.matrix, truth_matrix).value,
                efficiency=efficiency(result.plan, degraded).value,
                calibration_ms=result.timing.calibration_ms,
                dtw_ms=result.timing.dtw_ms,
                total_ms=result.timing.total_ms,
                seed=config.seed,
                partner_selection_ms=result.timing.partner_selection_ms,
            )
        )
    return rows


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return format_float(v)
    return str(v)


def write_results(rows: Sequence[ExperimentRow], path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULTS_HEADER)
        for row in rows:
            writer.writerow(_cell(v) for v in astuple(row))


def read_results(path) -> list[ExperimentRow]:
    def opt_float(s):
        return float(s) if s != "" else None

    with Path(path).open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != RESULTS_HEADER:
            raise TrajediError(f"unexpected results header {reader.fieldnames}")
        return [
            ExperimentRow(
                dataset=r["dataset"],
                mode=r["mode"],
                alpha=opt_float(r["alpha"]),
                strategy=r["strategy"] or None,
                accuracy=float(r["accuracy"]),
                efficiency=float(r["efficiency"]),
                calibration_ms=float(r["calibration_ms"]),
                dtw_ms=float(r["dtw_ms"]),
                total_ms=float(r["total_ms"]),
                seed=int(r["seed"]),
                partner_selection_ms=float(r["partner_selection_ms"]),
            )
            for r in reader
        ]

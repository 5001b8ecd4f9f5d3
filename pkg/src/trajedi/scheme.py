"""Calibration-aware pairwise distances.

Each trajectory is calibrated exactly once, against a single partner: a
fixed-size window slides down the diagonal of the raw DTW matrix of the pair,
the window whose corner-to-corner cumulative cost grows most is selected, and
the rows it spans (a segment of the owning trajectory) are calibrated and
spliced back. The pairwise matrix is then recomputed over the partially
calibrated trajectories.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .dtw import DtwMatrix, compute_matrix, pairwise_dtw
from .errors import UsageError
from .grid import AnchorGrid, CalibrationParams, calibrate
from .model import Dataset, Trajectory, slice_trajectory, splice

MODES = ("none", "full", "trajedi")
STRATEGIES = ("random", "furthest", "shortest")


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (0.0 < alpha < 1.0):
        raise UsageError(f"alpha must lie strictly between 0 and 1, got {alpha}")
    return alpha


@dataclass(frozen=True)
class Window:
    """Matrix window with 1-based inclusive corners."""

    i1: int
    j1: int
    i2: int
    j2: int

    @property
    def height(self) -> int:
        return self.i2 - self.i1 + 1

    @property
    def width(self) -> int:
        return self.j2 - self.j1 + 1

    @property
    def area(self) -> int:
        return self.height * self.width


@dataclass(frozen=True)
class PartnerStrategy:
    name: str
    seed: int | None = None

    def __post_init__(self):
        if self.name not in STRATEGIES:
            raise UsageError(f"unknown strategy {self.name!r}; expected one of {', '.join(STRATEGIES)}")
        if self.name == "random" and self.seed is None:
            raise UsageError("random strategy needs an explicit seed")

    @classmethod
    def random(cls, seed: int) -> "PartnerStrategy":
        return cls("random", int(seed))

    @classmethod
    def furthest(cls) -> "PartnerStrategy":
        return cls("furthest")

    @classmethod
    def shortest(cls) -> "PartnerStrategy":
        return cls("shortest")

    @classmethod
    def parse(cls, name: str, seed: int = 0) -> "PartnerStrategy":
        if name == "random":
            return cls.random(seed)
        return cls(name)

    @property
    def needs_raw_distances(self) -> bool:
        return self.name in ("furthest", "shortest")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def window_shape(n: int, m: int, alpha: float) -> tuple[int, int]:
    return max(1, math.ceil(alpha * n)), max(1, math.ceil(alpha * m))


def enumerate_windows(n: int, m: int, alpha: float) -> list[Window]:
    """Fixed-size windows stepping 1 row and m/n columns at a time."""
    if n < 1 or m < 1:
        raise UsageError(f"matrix dimensions must be positive, got {n}x{m}")
    alpha = check_alpha(alpha)
    h, w = window_shape(n, m, alpha)
    windows = []
    t = 0
    while True:
        i1 = 1 + t
        j1 = 1 + _round_half_up(t * m / n)
        i2 = i1 + h - 1
        j2 = j1 + w - 1
        if i2 > n or j2 > m:
            break
        windows.append(Window(i1, j1, i2, j2))
        t += 1
    # h <= n and w <= m always, so t = 0 fits
    assert windows
    return windows


def score_window(matrix: DtwMatrix, w: Window) -> float:
    return matrix.at(w.i2, w.j2) - matrix.at(w.i1, w.j1)


def select_window(matrix: DtwMatrix, alpha: float) -> Window:
    """Highest-scoring window; the earliest one wins ties."""
    windows = enumerate_windows(matrix.n, matrix.m, alpha)
    corners = np.array([(w.i1, w.j1, w.i2, w.j2) for w in windows]) - 1
    cells = matrix.cells
    scores = cells[corners[:, 2], corners[:, 3]] - cells[corners[:, 0], corners[:, 1]]
    return windows[int(np.argmax(scores))]


def assign_partners(
    dataset: Dataset,
    strategy: PartnerStrategy,
    raw_distances: np.ndarray | None = None,
) -> dict[str, str]:
    """Map every trajectory id to one partner id other than itself.

    Ties in the furthest/shortest choice go to the partner that comes first in
    dataset order.
    """
    k = len(dataset)
    if k < 2:
        raise UsageError("partner assignment needs at least two trajectories")
    ids = dataset.ids
    if strategy.name == "random":
        rng = np.random.default_rng(strategy.seed)
        out = {}
        for i, tid in enumerate(ids):
            draw = int(rng.integers(0, k - 1))
            out[tid] = ids[draw if draw < i else draw + 1]
        return out

    if raw_distances is None:
        raise UsageError(f"{strategy.name} strategy requires the raw pairwise distance matrix")
    raw = np.asarray(raw_distances, dtype=np.float64)
    if raw.shape != (k, k):
        raise UsageError(f"raw distance matrix must be {k}x{k}, got {raw.shape}")
    out = {}
    for i, tid in enumerate(ids):
        row = raw[i].copy()
        if strategy.name == "furthest":
            row[i] = -np.inf
            j = int(np.argmax(row))
        else:
            row[i] = np.inf
            j = int(np.argmin(row))
        out[tid] = ids[j]
    return out


@dataclass(frozen=True, eq=False)
class PlanEntry:
    traj_id: str
    partner_id: str | None
    window: Window | None
    lo: int
    hi: int
    replacement: np.ndarray | None
    calibrated_points: int

    def __eq__(self, other) -> bool:
        if not isinstance(other, PlanEntry):
            return NotImplemented
        same_rep = (
            (self.replacement is None and other.replacement is None)
            or (
                self.replacement is not None
                and other.replacement is not None
                and np.array_equal(self.replacement, other.replacement)
            )
        )
        return (
            self.traj_id,
            self.partner_id,
            self.window,
            self.lo,
            self.hi,
            self.calibrated_points,
        ) == (
            other.traj_id,
            other.partner_id,
            other.window,
            other.lo,
            other.hi,
            other.calibrated_points,
        ) and same_rep


@dataclass
class CalibrationPlan:
    entries: dict[str, PlanEntry] = field(default_factory=dict)

    def add(self, entry: PlanEntry) -> None:
        if entry.traj_id in self.entries:
            raise UsageError(f"trajectory {entry.traj_id!r} is already calibrated in this plan")
        if entry.partner_id is not None and entry.partner_id == entry.traj_id:
            raise UsageError(f"trajectory {entry.traj_id!r} cannot be its own partner")
        self.entries[entry.traj_id] = entry

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def __getitem__(self, tid: str) -> PlanEntry:
        return self.entries[tid]

    @property
    def calibrated_points(self) -> int:
        return sum(e.calibrated_points for e in self.entries.values())


def calibrate_with_partner(
    t: Trajectory,
    partner: Trajectory,
    alpha: float,
    grid: AnchorGrid,
    params: CalibrationParams,
) -> tuple[Trajectory, PlanEntry]:
    """Calibrate the segment of ``t`` under the best window of the raw DTW
    matrix of ``t`` (rows) against ``partner`` (columns). ``partner`` is only
    read."""
    matrix = compute_matrix(t, partner)
    w = select_window(matrix, alpha)
    segment = slice_trajectory(t, w.i1, w.i2)
    cal, ok = calibrate(segment, grid, params)
    if not ok:
        return t, PlanEntry(t.id, partner.id, w, w.i1, w.i2, None, 0)
    new, degenerate = splice(t, w.i1, w.i2, cal.coords)
    if degenerate:
        return t, PlanEntry(t.id, partner.id, w, w.i1, w.i2, None, 0)
    return new, PlanEntry(t.id, partner.id, w, w.i1, w.i2, cal.coords, w.height)


@dataclass(frozen=True)
class TimingReport:
    calibration_ms: float = 0.0
    dtw_ms: float = 0.0
    partner_selection_ms: float = 0.0
    total_ms: float = 0.0


@dataclass(eq=False)
class PairwiseResult:
    ids: list[str]
    matrix: np.ndarray
    plan: CalibrationPlan
    timing: TimingReport
    trajectories: tuple[Trajectory, ...]


def _ms(seconds: float) -> float:
    return seconds * 1000.0


def pairwise_distance_matrix(
    dataset: Dataset,
    mode: str,
    grid: AnchorGrid | None = None,
    params: CalibrationParams | None = None,
    alpha: float | None = None,
    strategy: PartnerStrategy | None = None,
    raw_distances: np.ndarray | None = None,
    raw_distances_ms: float = 0.0,
    workers: int = 1,
) -> PairwiseResult:
    """All-pairs DTW under one of the modes ``none``, ``full`` or ``trajedi``.

    ``raw_distances`` may carry a precomputed raw pairwise matrix (with the time
    it took, ``raw_distances_ms``) so a sweep pays for it once; that cost is
    charged to ``partner_selection_ms`` and to the total when it is used.
    """
    if mode not in MODES:
        raise UsageError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    if mode != "none" and (grid is None or params is None):
        raise UsageError(f"mode {mode} requires a grid and calibration params")
    if mode == "trajedi":
        if alpha is None or strategy is None:
            raise UsageError("mode trajedi requires alpha and strategy")
        alpha = check_alpha(alpha)

    plan = CalibrationPlan()
    trajs = dataset.trajectories
    cal_s = dtw_s = partner_s = 0.0
    extra_ms = 0.0
    start = time.perf_counter()

    if mode == "none" and raw_distances is not None:
        matrix = np.array(raw_distances, dtype=np.float64)
        extra_ms = raw_distances_ms
        dtw_s = raw_distances_ms / 1000.0
    else:
        if mode == "full":
            t0 = time.perf_counter()
            calibrated = []
            for t in trajs:
                new, _ = calibrate(t, grid, params)
                calibrated.append(new)
                plan.add(PlanEntry(t.id, None, None, 1, len(t), new.coords, len(t)))
            trajs = tuple(calibrated)
            cal_s = time.perf_counter() - t0
        elif mode == "trajedi":
            raw = None
            if strategy.needs_raw_distances:
                if raw_distances is not None:
                    raw = raw_distances
                    extra_ms = raw_distances_ms
                    partner_s = raw_distances_ms / 1000.0
                else:
                    t0 = time.perf_counter()
                    raw = pairwise_dtw(trajs, workers=workers)
                    partner_s = time.perf_counter() - t0
            t0 = time.perf_counter()
            partners = assign_partners(dataset, strategy, raw)
            partner_s += time.perf_counter() - t0

            t0 = time.perf_counter()
            calibrated = []
            for t in trajs:
                new, entry = calibrate_with_partner(t, dataset[partners[t.id]], alpha, grid, params)
                calibrated.append(new)
                plan.add(entry)
            trajs = tuple(calibrated)
            cal_s = time.perf_counter() - t0

        t0 = time.perf_counter()
        matrix = pairwise_dtw(trajs, workers=workers)
        dtw_s = time.perf_counter() - t0

    total_ms = _ms(time.perf_counter() - start) + extra_ms
    timing = TimingReport(
        calibration_ms=_ms(cal_s),
        dtw_ms=_ms(dtw_s),
        partner_selection_ms=_ms(partner_s),
        total_ms=total_ms,
    )
    return PairwiseResult(dataset.ids, matrix, plan, timing, tuple(trajs))


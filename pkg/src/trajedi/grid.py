"""Grid-based trajectory calibration.

The data space is split into an N x N grid whose cell centres are anchor
points. Calibration snaps raw points onto anchors (alignment) and then
interpolates anchors between consecutive aligned anchors (complement).
Anchors are handled as integer ``(row, col)`` cells; coordinates are only
materialised for the output trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import UsageError
from .model import Point, Trajectory

Cell = tuple[int, int]

# (dr, dc) in lexicographic order so argmin over candidates breaks ties by
# smallest row, then smallest column
_NEIGHBOURHOOD = np.array([(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)])


@dataclass(frozen=True)
class AnchorGrid:
    min_x: float
    min_y: float
    max_x: float
    max_y: float
    cells_per_side: int

    def __post_init__(self):
        if int(self.cells_per_side) != self.cells_per_side or self.cells_per_side < 1:
            raise UsageError(f"cells_per_side must be a positive integer, got {self.cells_per_side}")
        vals = (self.min_x, self.min_y, self.max_x, self.max_y)
        if not all(math.isfinite(v) for v in vals):
            raise UsageError("grid extent must be finite")
        if not (self.max_x > self.min_x and self.max_y > self.min_y):
            raise UsageError(f"degenerate grid extent {vals}")

    @property
    def extent(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)

    @property
    def cell_width(self) -> float:
        return (self.max_x - self.min_x) / self.cells_per_side

    @property
    def cell_height(self) -> float:
        return (self.max_y - self.min_y) / self.cells_per_side

    @property
    def cell_diagonal(self) -> float:
        return math.hypot(self.cell_width, self.cell_height)

    def anchor(self, row: int, col: int) -> Point:
        if not (0 <= row < self.cells_per_side and 0 <= col < self.cells_per_side):
            raise UsageError(f"cell ({row}, {col}) outside {self.cells_per_side}x{self.cells_per_side} grid")
        x, y = self.anchor_coords(np.array([[row, col]]))[0]
        return Point(float(x), float(y))

    def anchor_coords(self, cells) -> np.ndarray:
        """Centre coordinates of an ``(k, 2)`` array of (row, col) cells."""
        cells = np.asarray(cells, dtype=np.int64).reshape(-1, 2)
        out = np.empty((len(cells), 2))
        out[:, 0] = self.min_x + (cells[:, 1] + 0.5) * self.cell_width
        out[:, 1] = self.min_y + (cells[:, 0] + 0.5) * self.cell_height
        return out

    def clamped_cells(self, coords: np.ndarray) -> np.ndarray:
        """Cell containing each point, clamped into the grid."""
        coords = np.asarray(coords, dtype=np.float64).reshape(-1, 2)
        last = self.cells_per_side - 1
        cols = np.clip(np.floor((coords[:, 0] - self.min_x) / self.cell_width), 0, last)
        rows = np.clip(np.floor((coords[:, 1] - self.min_y) / self.cell_height), 0, last)
        return np.stack([rows, cols], axis=1).astype(np.int64)

    def is_anchor(self, p: Sequence[float]) -> bool:
        cell = self.clamped_cells(np.array([p]))[0]
        a = self.anchor_coords(cell[None, :])[0]
        return bool(a[0] == p[0] and a[1] == p[1])


def build_grid(extent: Sequence[float], n: int) -> AnchorGrid:
    min_x, min_y, max_x, max_y = (float(v) for v in extent)
    return AnchorGrid(min_x, min_y, max_x, max_y, int(n))


@dataclass(frozen=True)
class CalibrationParams:
    align_threshold: float
    complement_threshold: float

    def __post_init__(self):
        for name in ("align_threshold", "complement_threshold"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise UsageError(f"{name} must be a positive finite number, got {v}")

    @classmethod
    def defaults(cls, grid: AnchorGrid, align_threshold=None, complement_threshold=None) -> "CalibrationParams":
        """Half the cell diagonal for alignment and half the smaller cell side
        for complement, unless overridden."""
        if align_threshold is None:
            align_threshold = grid.cell_diagonal / 2
        if complement_threshold is None:
            complement_threshold = min(grid.cell_width, grid.cell_height) / 2
        return cls(float(align_threshold), float(complement_threshold))


def _nearest_cells(grid: AnchorGrid, coords: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    base = grid.clamped_cells(coords)
    last = grid.cells_per_side - 1
    cand = np.clip(base[:, None, :] + _NEIGHBOURHOOD[None, :, :], 0, last)  # (k, 9, 2)
    ax = grid.min_x + (cand[..., 1] + 0.5) * grid.cell_width
    ay = grid.min_y + (cand[..., 0] + 0.5) * grid.cell_height
    dx = coords[:, None, 0] - ax
    dy = coords[:, None, 1] - ay
    dist = np.sqrt(dx * dx + dy * dy)
    best = np.argmin(dist, axis=1)
    idx = np.arange(len(coords))
    return cand[idx, best], dist[idx, best]


def nearest_anchor(grid: AnchorGrid, p: Sequence[float]) -> tuple[Point, float]:
    cells, dist = _nearest_cells(grid, np.array([p], dtype=np.float64))
    return grid.anchor(*cells[0]), float(dist[0])


def align_cells(t: Trajectory, grid: AnchorGrid, align_threshold: float) -> list[Cell]:
    """Snap each point to its nearest anchor cell, dropping points farther than
    ``align_threshold`` and collapsing runs of the same cell."""
    cells, dist = _nearest_cells(grid, t.coords)
    out: list[Cell] = []
    for (r, c), d in zip(cells.tolist(), dist.tolist()):
        if d > align_threshold:
            continue
        if out and out[-1] == (r, c):
            continue
        out.append((r, c))
    return out


def align(t: Trajectory, grid: AnchorGrid, align_threshold: float) -> list[Point]:
    return [grid.anchor(r, c) for r, c in align_cells(t, grid, align_threshold)]


def _interpolate(grid: AnchorGrid, a1: Cell, a2: Cell, threshold: float) -> list[Cell]:
    """Anchors accepted between ``a1`` and ``a2`` (exclusive)."""
    assert a1 != a2, "consecutive aligned anchors must differ"
    w, h = grid.cell_width, grid.cell_height
    last = grid.cells_per_side - 1
    # segment and candidate offsets in data units, relative to a1
    sx = (a2[1] - a1[1]) * w
    sy = (a2[0] - a1[0]) * h
    seg_len2 = sx * sx + sy * sy
    pad_c = int(math.ceil(threshold / w))
    pad_r = int(math.ceil(threshold / h))
    r_lo = max(0, min(a1[0], a2[0]) - pad_r)
    r_hi = min(last, max(a1[0], a2[0]) + pad_r)
    c_lo = max(0, min(a1[1], a2[1]) - pad_c)
    c_hi = min(last, max(a1[1], a2[1]) + pad_c)
    thr2 = threshold * threshold

    candidates = []
    for r in range(r_lo, r_hi + 1):
        for c in range(c_lo, c_hi + 1):
            if (r, c) == a1 or (r, c) == a2:
                continue
            px = (c - a1[1]) * w
            py = (r - a1[0]) * h
            t = (px * sx + py * sy) / seg_len2
            t = 0.0 if t < 0.0 else 1.0 if t > 1.0 else t
            ex = px - t * sx
            ey = py - t * sy
            if ex * ex + ey * ey <= thr2:
                candidates.append((px * px + py * py, r, c))
    candidates.sort()

    accepted: list[Cell] = []
    prev = a1
    for _, r, c in candidates:
        # angle with the segment is below pi/2 iff the dot product is positive
        dr, dc = r - prev[0], c - prev[1]
        dot = (dc * (a2[1] - a1[1])) * (w * w) + (dr * (a2[0] - a1[0])) * (h * h)
        if dot > 0:
            accepted.append((r, c))
            prev = (r, c)
    return accepted


def complement_cells(aligned: Sequence[Cell], grid: AnchorGrid, complement_threshold: float) -> list[Cell]:
    aligned = [tuple(a) for a in aligned]
    if len(aligned) <= 1:
        return list(aligned)
    out = [aligned[0]]
    for a1, a2 in zip(aligned, aligned[1:]):
        out.extend(_interpolate(grid, a1, a2, complement_threshold))
        out.append(a2)
    return out


def complement(aligned: Sequence[Sequence[float]], grid: AnchorGrid, complement_threshold: float) -> list[Point]:
    """Interpolate anchors between consecutive aligned anchor points."""
    coords = np.asarray(aligned, dtype=np.float64).reshape(-1, 2)
    cells = [tuple(c) for c in grid.clamped_cells(coords).tolist()]
    return [grid.anchor(r, c) for r, c in complement_cells(cells, grid, complement_threshold)]


class Calibrated(NamedTuple):
    trajectory: Trajectory
    calibrated: bool


def calibrate(t: Trajectory, grid: AnchorGrid, params: CalibrationParams) -> Calibrated:
    """Align then complement ``t``.

    When no point lies within the alignment threshold, ``t`` is returned
    unchanged with ``calibrated`` False.
    """
    aligned = align_cells(t, grid, params.align_threshold)
    if not aligned:
        return Calibrated(t, False)
    cells = complement_cells(aligned, grid, params.complement_threshold)
    return Calibrated(Trajectory(t.id, grid.anchor_coords(cells)), True)

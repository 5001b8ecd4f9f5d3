"""Dynamic time warping over 2-D point sequences.

The cumulative-cost matrix follows the unconstrained recurrence

    M(i, j) = min(M(i-1, j-1), M(i-1, j), M(i, j-1)) + D(i, j)

with ``M(1, 1) = D(1, 1)`` and prefix sums along the first row and column,
where ``D`` is the Euclidean distance between point ``i`` of the first
trajectory and point ``j`` of the second.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .errors import UsageError
from .model import Trajectory, euclidean_distance

BRUTE_FORCE_MAX_CELLS = 64


@numba.njit(cache=True, nogil=True)
def _fill_matrix(a, b, out):
    n = a.shape[0]
    m = b.shape[0]
    visits = 0
    for i in range(n):
        ax = a[i, 0]
        ay = a[i, 1]
        dx = ax - b[0, 0]
        dy = ay - b[0, 1]
        d = math.sqrt(dx * dx + dy * dy)
        if i == 0:
            out[0, 0] = d
            for j in range(1, m):
                dx = ax - b[j, 0]
                dy = ay - b[j, 1]
                out[0, j] = out[0, j - 1] + math.sqrt(dx * dx + dy * dy)
            visits += m
            continue
        out[i, 0] = out[i - 1, 0] + d
        for j in range(1, m):
            dx = ax - b[j, 0]
            dy = ay - b[j, 1]
            d = math.sqrt(dx * dx + dy * dy)
            best = out[i - 1, j - 1]
            if out[i - 1, j] < best:
                best = out[i - 1, j]
            if out[i, j - 1] < best:
                best = out[i, j - 1]
            out[i, j] = best + d
        visits += m
    return visits


@numba.njit(cache=True, nogil=True)
def _distance_only(a, b):
    # same arithmetic as _fill_matrix over two rolling rows
    n = a.shape[0]
    m = b.shape[0]
    prev = np.empty(m)
    cur = np.empty(m)
    for i in range(n):
        ax = a[i, 0]
        ay = a[i, 1]
        dx = ax - b[0, 0]
        dy = ay - b[0, 1]
        d = math.sqrt(dx * dx + dy * dy)
        if i == 0:
            cur[0] = d
            for j in range(1, m):
                dx = ax - b[j, 0]
                dy = ay - b[j, 1]
                cur[j] = cur[j - 1] + math.sqrt(dx * dx + dy * dy)
        else:
            cur[0] = prev[0] + d
            left = cur[0]
            for j in range(1, m):
                dx = ax - b[j, 0]
                dy = ay - b[j, 1]
                d = math.sqrt(dx * dx + dy * dy)
                best = prev[j - 1]
                if prev[j] < best:
                    best = prev[j]
                if left < best:
                    best = left
                left = best + d
                cur[j] = left
        prev, cur = cur, prev
    return prev[m - 1]


@dataclass(frozen=True, eq=False)
class DtwMatrix:
    """Cumulative-cost matrix. ``cells`` is 0-based; :meth:`at` takes 1-based indices."""

    cells: np.ndarray

    @property
    def n(self) -> int:
        return self.cells.shape[0]

    @property
    def m(self) -> int:
        return self.cells.shape[1]

    @property
    def distance(self) -> float:
        return float(self.cells[-1, -1])

    def at(self, i: int, j: int) -> float:
        if not (1 <= i <= self.n and 1 <= j <= self.m):
            raise UsageError(f"cell ({i}, {j}) outside {self.n}x{self.m} matrix")
        return float(self.cells[i - 1, j - 1])


def _coords(t) -> np.ndarray:
    arr = t.coords if isinstance(t, Trajectory) else np.asarray(t, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2 or len(arr) == 0:
        raise UsageError("DTW requires non-empty (n, 2) point sequences")
    return np.ascontiguousarray(arr, dtype=np.float64)


def _compute(a, b) -> tuple[np.ndarray, int]:
    a, b = _coords(a), _coords(b)
    out = np.empty((len(a), len(b)))
    visits = _fill_matrix(a, b, out)
    out.setflags(write=False)
    return out, visits


def compute_matrix(a: Trajectory, b: Trajectory) -> DtwMatrix:
    cells, _ = _compute(a, b)
    return DtwMatrix(cells)


def dtw_distance(a: Trajectory, b: Trajectory) -> float:
    return float(_distance_only(_coords(a), _coords(b)))


def pairwise_dtw(trajectories: Sequence[Trajectory], workers: int = 1) -> np.ndarray:
    """Symmetric all-pairs DTW matrix with a zero diagonal.

    Each unordered pair is computed once and written by its fixed index, so
    the result does not depend on ``workers``.
    """
    arrays = [_coords(t) for t in trajectories]
    k = len(arrays)
    out = np.zeros((k, k))
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]

    def run(pair):
        i, j = pair
        return _distance_only(arrays[i], arrays[j])

    if workers > 1 and len(pairs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, pairs, chunksize=16))
    else:
        values = [run(p) for p in pairs]
    for (i, j), v in zip(pairs, values):
        out[i, j] = out[j, i] = v
    return out


def monotone_paths(n: int, m: int):
    """Yield every monotone lattice path from (0, 0) to (n-1, m-1).

    Steps are down, right or diagonal; each path is a tuple of (i, j) cells.
    """
    def walk(i, j, path):
        if i == n - 1 and j == m - 1:
            yield tuple(path)
            return
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                path.append((ni, nj))
                yield from walk(ni, nj, path)
                path.pop()

    yield from walk(0, 0, [(0, 0)])


def brute_force_dtw(a: Trajectory, b: Trajectory) -> float:
    """Minimum summed point distance over all monotone alignments (test oracle)."""
    pa = [tuple(p) for p in _coords(a).tolist()]
    pb = [tuple(p) for p in _coords(b).tolist()]
    if len(pa) * len(pb) > BRUTE_FORCE_MAX_CELLS:
        raise UsageError(
            f"brute force limited to {BRUTE_FORCE_MAX_CELLS} cells, got {len(pa)}x{len(pb)}"
        )
    return min(
        math.fsum(euclidean_distance(pa[i], pb[j]) for i, j in path)
        for path in monotone_paths(len(pa), len(pb))
    )


def warm_up() -> None:
    """Trigger JIT compilation so it is not charged to timed regions."""
    tiny = np.zeros((2, 2))
    _fill_matrix(tiny, tiny, np.empty((2, 2)))
    _distance_only(tiny, tiny)

"""Synthetic evaluation data: anchor-grid random walks, degraded by Gaussian
downsampling and Gaussian point noise.

The data space is ``[0, grid_n]^2`` so cells are unit squares and anchors sit
at half-integer coordinates. All randomness comes from one
``numpy.random.default_rng(seed)`` (PCG64) stream consumed in a fixed order:
every walk first, then each trajectory's downsampling, then each
trajectory's noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import UsageError
from .grid import AnchorGrid, build_grid
from .model import Dataset, Trajectory

# lexicographic (dr, dc) order fixes how uniform draws map to directions
DIRECTIONS = tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0))


@dataclass(frozen=True)
class GeneratorConfig:
    grid_n: int = 1000
    num_trajectories: int = 50
    initial_length: int = 1500
    keep_mean: float = 800.0
    keep_sd: float = 200.0
    noise_sd: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.grid_n < 1:
            raise UsageError(f"grid_n must be >= 1, got {self.grid_n}")
        if self.num_trajectories < 1:
            raise UsageError(f"num_trajectories must be >= 1, got {self.num_trajectories}")
        if self.initial_length < 2:
            raise UsageError(f"initial_length must be >= 2, got {self.initial_length}")
        if not self.keep_mean > 0:
            raise UsageError(f"keep_mean must be > 0, got {self.keep_mean}")
        if not self.keep_sd >= 0:
            raise UsageError(f"keep_sd must be >= 0, got {self.keep_sd}")
        if self.noise_sd is not None and not self.noise_sd >= 0:
            raise UsageError(f"noise_sd must be >= 0, got {self.noise_sd}")

    @property
    def grid(self) -> AnchorGrid:
        return build_grid((0.0, 0.0, float(self.grid_n), float(self.grid_n)), self.grid_n)

    @property
    def effective_noise_sd(self) -> float:
        if self.noise_sd is None:
            return 0.25 * self.grid.cell_width
        return float(self.noise_sd)


class GeneratedDataset(NamedTuple):
    truth: Dataset
    degraded: Dataset


def trajectory_ids(count: int) -> list[str]:
    width = max(3, len(str(count - 1)))
    return [f"t{i:0{width}d}" for i in range(count)]


def _walk_cells(grid_n: int, length: int, rng: np.random.Generator) -> np.ndarray:
    cells = np.empty((length, 2), dtype=np.int64)
    r, c = (int(v) for v in rng.integers(0, grid_n, size=2))
    cells[0] = (r, c)
    prev = None
    for k in range(1, length):
        in_bounds = [
            d for d in DIRECTIONS if 0 <= r + d[0] < grid_n and 0 <= c + d[1] < grid_n
        ]
        options = in_bounds
        if prev is not None:
            # keep the moving trend: angle with the previous step below pi/2
            trend = [d for d in in_bounds if d[0] * prev[0] + d[1] * prev[1] > 0]
            if trend:
                options = trend
        if not options:
            raise UsageError("a 1x1 grid admits no walk steps; use grid_n >= 2")
        d = options[int(rng.integers(0, len(options)))]
        r, c = r + d[0], c + d[1]
        cells[k] = (r, c)
        prev = d
    return cells


def generate_walk(config: GeneratorConfig, rng: np.random.Generator, traj_id: str = "walk") -> Trajectory:
    """Random walk over neighbouring anchors, ``initial_length`` points long."""
    grid = config.grid
    cells = _walk_cells(config.grid_n, config.initial_length, rng)
    return Trajectory(traj_id, grid.anchor_coords(cells))


def downsample(t: Trajectory, rng: np.random.Generator, keep_mean: float, keep_sd: float) -> Trajectory:
    """Keep a Normal(keep_mean, keep_sd) number of points, endpoints always kept."""
    n = len(t)
    if n < 2:
        raise UsageError("downsampling needs at least two points")
    k = int(math.floor(float(rng.normal(keep_mean, keep_sd)) + 0.5))
    k = min(max(k, 2), n)
    interior = rng.choice(np.arange(1, n - 1), size=k - 2, replace=False) if k > 2 else np.array([], dtype=np.int64)
    keep = np.concatenate([[0], np.sort(interior), [n - 1]]).astype(np.int64)
    return Trajectory(t.id, t.coords[keep])


def add_noise(t: Trajectory, rng: np.random.Generator, noise_sd: float) -> Trajectory:
    if noise_sd < 0:
        raise UsageError(f"noise_sd must be >= 0, got {noise_sd}")
    if noise_sd == 0:
        return t
    return Trajectory(t.id, t.coords + rng.normal(0.0, noise_sd, size=t.coords.shape))


def generate_dataset(config: GeneratorConfig) -> GeneratedDataset:
    rng = np.random.default_rng(config.seed)
    ids = trajectory_ids(config.num_trajectories)
    truth = [generate_walk(config, rng, tid) for tid in ids]
    sampled = [downsample(t, rng, config.keep_mean, config.keep_sd) for t in truth]
    noise_sd = config.effective_noise_sd
    degraded = [add_noise(t, rng, noise_sd) for t in sampled]
    return GeneratedDataset(Dataset(truth), Dataset(degraded))

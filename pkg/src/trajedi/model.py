"""Trajectory containers, segment slicing/splicing and the trajectory CSV format.

Coordinates are unit-agnostic reals; trajectories carry no timestamps. The CSV
format is ``traj_id,seq,x,y[,ts]`` with ``ts`` parsed and ignored.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .errors import ParseError, UsageError

CSV_HEADER = ("traj_id", "seq", "x", "y")


class Point(NamedTuple):
    x: float
    y: float


def euclidean_distance(p: Sequence[float], q: Sequence[float]) -> float:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return math.sqrt(dx * dx + dy * dy)


def _as_coords(points) -> np.ndarray:
    arr = np.array(points, dtype=np.float64)
    if arr.size == 0:
        arr = arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise UsageError(f"points must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("trajectory coordinates must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Trajectory:
    """An identified, immutable, non-empty sequence of 2-D points.

    ``coords`` is a read-only ``(n, 2)`` float64 array. ``segment`` is set on
    trajectories produced by :func:`slice_trajectory` and records the 1-based
    inclusive range they were cut from.
    """

    id: str
    coords: np.ndarray
    segment: tuple[int, int] | None = field(default=None)

    def __post_init__(self):
        coords = _as_coords(self.coords)
        if len(coords) == 0:
            raise UsageError(f"trajectory {self.id!r} must contain at least one point")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_points(cls, id: str, points: Iterable[Sequence[float]]) -> "Trajectory":
        return cls(id, list(points))

    def __len__(self) -> int:
        return len(self.coords)

    def __getitem__(self, index: int) -> Point:
        x, y = self.coords[index]
        return Point(float(x), float(y))

    def __iter__(self) -> Iterator[Point]:
        for x, y in self.coords.tolist():
            yield Point(x, y)

    @property
    def points(self) -> tuple[Point, ...]:
        return tuple(self)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.id == other.id and np.array_equal(self.coords, other.coords)

    def __hash__(self) -> int:
        return hash((self.id, self.coords.tobytes()))

    def __repr__(self) -> str:
        return f"Trajectory(id={self.id!r}, n={len(self)})"

    def with_coords(self, coords) -> "Trajectory":
        return Trajectory(self.id, coords)


def _check_range(t: Trajectory, lo: int, hi: int) -> None:
    if not (1 <= lo <= hi <= len(t)):
        raise UsageError(f"range [{lo}, {hi}] out of bounds for trajectory {t.id!r} of length {len(t)}")


def slice_trajectory(t: Trajectory, lo: int, hi: int) -> Trajectory:
    """Points ``lo..hi`` (1-based, inclusive) of ``t``, tagged with the range."""
    _check_range(t, lo, hi)
    return Trajectory(t.id, t.coords[lo - 1 : hi], segment=(lo, hi))


def splice(t: Trajectory, lo: int, hi: int, replacement) -> tuple[Trajectory, bool]:
    """Replace points ``lo..hi`` (1-based, inclusive) of ``t`` with ``replacement``.

    Returns the new trajectory and a flag that is True when the splice would
    have emptied the trajectory; in that case ``t`` is returned unchanged.
    """
    _check_range(t, lo, hi)
    if isinstance(replacement, Trajectory):
        replacement = replacement.coords
    rep = _as_coords(replacement if len(replacement) else np.empty((0, 2)))
    if len(t) - (hi - lo + 1) + len(rep) == 0:
        return t, True
    coords = np.concatenate([t.coords[: lo - 1], rep, t.coords[hi:]])
    return Trajectory(t.id, coords), False


class Dataset:
    """Ordered collection of trajectories with unique ids."""

    def __init__(self, trajectories: Iterable[Trajectory] = ()):
        self.trajectories: tuple[Trajectory, ...] = tuple(trajectories)
        self._index: dict[str, int] = {}
        for i, t in enumerate(self.trajectories):
            if t.id in self._index:
                raise UsageError(f"duplicate trajectory id {t.id!r}")
            self._index[t.id] = i

    @property
    def ids(self) -> list[str]:
        return [t.id for t in self.trajectories]

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self) -> Iterator[Trajectory]:
        return iter(self.trajectories)

    def __getitem__(self, key: int | str) -> Trajectory:
        if isinstance(key, str):
            try:
                return self.trajectories[self._index[key]]
            except KeyError:
                raise UsageError(f"no trajectory with id {key!r}") from None
        return self.trajectories[key]

    def __contains__(self, key: str) -> bool:
        return key in self._index

    def index_of(self, key: str) -> int:
        return self._index[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.trajectories == other.trajectories

    def __repr__(self) -> str:
        return f"Dataset({len(self)} trajectories)"

    @property
    def total_points(self) -> int:
        return sum(len(t) for t in self.trajectories)

    def replace(self, trajectories: Iterable[Trajectory]) -> "Dataset":
        return Dataset(trajectories)


def check_companion(truth: Dataset, other: Dataset) -> None:
    """Raise unless ``truth`` and ``other`` hold the same ids in the same order."""
    if truth.ids != other.ids:
        raise UsageError("ground-truth and degraded datasets must contain the same ids in the same order")


def format_float(v: float) -> str:
    # repr is the shortest string that round-trips exactly
    return repr(float(v))


def save_csv(dataset: Dataset, path) -> None:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t in dataset:
            for seq, (x, y) in enumerate(t.coords.tolist()):
                writer.writerow((t.id, seq, format_float(x), format_float(y)))


def _parse_float(text: str, what: str, lineno: int, path) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"non-numeric {what} {text!r}", line=lineno, path=path) from None
    if not math.isfinite(v):
        raise ParseError(f"non-finite {what} {text!r}", line=lineno, path=path)
    return v


def load_csv(path) -> Dataset:
    """Read a trajectory CSV. The header row is optional; errors name the
    physical 1-based line number."""
    path = Path(path)
    groups: dict[str, dict[int, tuple[float, float]]] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if lineno == 1 and row[0].strip() == "traj_id":
                if [c.strip() for c in row[:4]] != list(CSV_HEADER) or row[4:] not in ([], ["ts"]):
                    raise ParseError(f"unexpected header {row!r}", line=lineno, path=path)
                continue
            if len(row) not in (4, 5):
                raise ParseError(f"expected 4 or 5 fields, got {len(row)}", line=lineno, path=path)
            tid = row[0].strip()
            if not tid:
                raise ParseError("empty traj_id", line=lineno, path=path)
            try:
                seq = int(row[1])
            except ValueError:
                raise ParseError(f"non-integer seq {row[1]!r}", line=lineno, path=path) from None
            if seq < 0:
                raise ParseError(f"negative seq {seq}", line=lineno, path=path)
            x = _parse_float(row[2], "x", lineno, path)
            y = _parse_float(row[3], "y", lineno, path)
            pts = groups.setdefault(tid, {})
            if seq in pts:
                raise ParseError(f"duplicate (traj_id, seq) pair ({tid}, {seq})", line=lineno, path=path)
            pts[seq] = (x, y)
    return Dataset(Trajectory(tid, [pts[s] for s in sorted(pts)]) for tid, pts in groups.items())

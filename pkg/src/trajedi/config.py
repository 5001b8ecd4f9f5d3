"""Flat ``key = value`` experiment config files.

``#`` starts a comment, list values are comma separated, relative paths are
resolved against the config file's directory. Every key can also be given as
a CLI flag of the same name, which overrides the file.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

from .errors import ConfigError
from .grid import AnchorGrid, CalibrationParams, build_grid
from .scheme import MODES, STRATEGIES
from .synthetic import GeneratorConfig


def _int(text: str) -> int:
    return int(text)


def _float(text: str) -> float:
    v = float(text)
    if v != v or v in (float("inf"), float("-inf")):
        raise ValueError("must be finite")
    return v


def _str_list(text: str) -> list[str]:
    return [part.strip() for part in text.split(",") if part.strip()]


def _float_list(text: str) -> list[float]:
    return [_float(part) for part in _str_list(text)]


# key -> parser of the raw string
KEYS: dict[str, Callable[[str], object]] = {
    "dataset": str,
    "truth": str,
    "degraded": str,
    "num_trajectories": _int,
    "initial_length": _int,
    "keep_mean": _float,
    "keep_sd": _float,
    "noise_sd": _float,
    "grid_n": _int,
    "extent": _float_list,
    "align_threshold": _float,
    "complement_threshold": _float,
    "mode": _str_list,
    "alpha": _float_list,
    "strategy": _str_list,
    "seed": _int,
    "workers": _int,
    "output": str,
}


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "synthetic"
    truth: Path | None = None
    degraded: Path | None = None
    generator: GeneratorConfig | None = None
    grid_n: int = 1000
    extent: tuple[float, float, float, float] | None = None
    align_threshold: float | None = None
    complement_threshold: float | None = None
    modes: tuple[str, ...] = MODES
    alphas: tuple[float, ...] = ()
    strategies: tuple[str, ...] = STRATEGIES
    seed: int = 0
    workers: int = 1
    output: Path = Path("results.csv")

    @property
    def grid(self) -> AnchorGrid:
        extent = self.extent or (0.0, 0.0, float(self.grid_n), float(self.grid_n))
        return build_grid(extent, self.grid_n)

    @property
    def params(self) -> CalibrationParams:
        return CalibrationParams.defaults(self.grid, self.align_threshold, self.complement_threshold)

    def with_output(self, output) -> "ExperimentConfig":
        return replace(self, output=Path(output))


def read_pairs(path) -> list[tuple[str, str, int]]:
    """(key, raw value, line number) for every assignment in a config file."""
    path = Path(path)
    pairs = []
    seen: dict[str, int] = {}
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path=path) from None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", line=lineno, path=path)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno, path=path)
        if key in seen:
            raise ConfigError(f"key {key!r} repeated (first on line {seen[key]})", key=key, line=lineno, path=path)
        seen[key] = lineno
        pairs.append((key, value, lineno))
    return pairs


def build_config(
    pairs: list[tuple[str, str, int | None]],
    base_dir: Path | None = None,
    path=None,
    check_files: bool = True,
) -> ExperimentConfig:
    """Validate raw assignments into an :class:`ExperimentConfig`.

    Later pairs override earlier ones, which is how CLI flags override the file.
    """
    values: dict[str, object] = {}
    lines: dict[str, int | None] = {}
    for key, raw, lineno in pairs:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", key=key, line=lineno, path=path)
        try:
            values[key] = KEYS[key](raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {raw!r} ({exc})", key=key, line=lineno, path=path) from None
        lines[key] = lineno

    def fail(key, message):
        raise ConfigError(f"{key}: {message}", key=key, line=lines.get(key), path=path)

    for key in ("grid_n", "num_trajectories", "initial_length", "workers"):
        if key in values and values[key] < 1:
            fail(key, f"must be >= 1, got {values[key]}")

    alphas = tuple(sorted(values.get("alpha", [])))
    for a in alphas:
        if not (0.0 < a < 1.0):
            fail("alpha", f"value {a} out of range; alpha must lie strictly between 0 and 1")
    modes = tuple(values.get("mode", MODES))
    if not modes:
        fail("mode", "at least one mode is required")
    for m in modes:
        if m not in MODES:
            fail("mode", f"unknown mode {m!r}; expected one of {', '.join(MODES)}")
    if len(set(modes)) != len(modes):
        fail("mode", "modes repeated")
    strategies = tuple(values.get("strategy", STRATEGIES))
    for s in strategies:
        if s not in STRATEGIES:
            fail("strategy", f"unknown strategy {s!r}; expected one of {', '.join(STRATEGIES)}")
    if len(set(strategies)) != len(strategies):
        fail("strategy", "strategies repeated")
    if "trajedi" in modes:
        if not alphas:
            fail("alpha", "mode trajedi needs at least one alpha")
        if not strategies:
            fail("strategy", "mode trajedi needs at least one strategy")

    extent = values.get("extent")
    if extent is not None:
        if len(extent) != 4:
            fail("extent", "expected min_x, min_y, max_x, max_y")
        extent = tuple(extent)
    for key in ("align_threshold", "complement_threshold"):
        if key in values and not values[key] > 0:
            fail(key, f"must be > 0, got {values[key]}")

    def resolve(key):
        if key not in values:
            return None
        p = Path(values[key])
        if base_dir is not None and not p.is_absolute():
            p = base_dir / p
        return p

    truth, degraded = resolve("truth"), resolve("degraded")
    if (truth is None) != (degraded is None):
        missing = "truth" if truth is None else "degraded"
        fail(missing, "truth and degraded datasets must be given together")
    if check_files:
        for key, p in (("truth", truth), ("degraded", degraded)):
            if p is not None and not p.is_file():
                fail(key, f"dataset file {str(p)!r} does not exist")

    seed = values.get("seed", 0)
    grid_n = values.get("grid_n", 1000)
    generator = None
    if truth is None:
        gen_kwargs = {
            k: values[k]
            for k in ("num_trajectories", "initial_length", "keep_mean", "keep_sd", "noise_sd")
            if k in values
        }
        try:
            generator = GeneratorConfig(grid_n=grid_n, seed=seed, **gen_kwargs)
        except ValueError as exc:
            raise ConfigError(str(exc), path=path) from None

    output = resolve("output") or Path("results.csv")
    dataset = values.get("dataset")
    if dataset is None:
        dataset = degraded.name.split(".")[0] if degraded is not None else "synthetic"

    cfg = ExperimentConfig(
        dataset=dataset,
        truth=truth,
        degraded=degraded,
        generator=generator,
        grid_n=grid_n,
        extent=extent,
        align_threshold=values.get("align_threshold"),
        complement_threshold=values.get("complement_threshold"),
        modes=modes,
        alphas=alphas,
        strategies=strategies,
        seed=seed,
        workers=values.get("workers", 1),
        output=output,
    )
    try:
        cfg.params
    except ValueError as exc:
        raise ConfigError(str(exc), path=path) from None
    return cfg


def parse_config(path, overrides: Mapping[str, str] | None = None, check_files: bool = True) -> ExperimentConfig:
    path = Path(path)
    pairs = read_pairs(path)
    for key, raw in (overrides or {}).items():
        if key in ("truth", "degraded", "output"):
            # flags are relative to the working directory, not the config file
            raw = str(Path(raw).absolute())
        pairs.append((key, raw, None))
    return build_config(pairs, base_dir=path.parent, path=path, check_files=check_files)

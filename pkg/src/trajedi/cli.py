"""Command-line front end.

Exit status: 0 success, 1 usage error, 2 data or parse error, 3 internal
invariant violation.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import KEYS, parse_config
from .dtw import dtw_distance, warm_up
from .errors import ParseError, TrajediError, UsageError
from .evaluation import calibration_cost_curve, write_cost_curve
from .experiment import ExperimentFailure, run_experiment, write_results
from .grid import CalibrationParams, build_grid, calibrate
from .model import Dataset, format_float, load_csv, save_csv
from .scheme import MODES, STRATEGIES, PartnerStrategy, pairwise_distance_matrix
from .synthetic import GeneratorConfig, generate_dataset

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

log = logging.getLogger("trajedi")


class _UsageExit(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        self.parser = parser
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageExit(self, message)


def _add_grid_flags(p: argparse.ArgumentParser, grid_default: int | None = 1000) -> None:
    p.add_argument("--grid_n", type=int, default=grid_default, help="cells per side (default %(default)s)")
    p.add_argument("--extent", help="min_x,min_y,max_x,max_y (default 0,0,grid_n,grid_n)")
    p.add_argument("--align_threshold", type=float, help="default: half the cell diagonal")
    p.add_argument("--complement_threshold", type=float, help="default: half the cell side")


def _grid_and_params(args):
    if args.grid_n is None or args.grid_n < 1:
        raise UsageError("--grid_n must be a positive integer")
    if args.extent:
        try:
            extent = [float(v) for v in args.extent.split(",")]
        except ValueError:
            raise UsageError(f"bad --extent {args.extent!r}") from None
        if len(extent) != 4:
            raise UsageError("--extent needs four comma-separated numbers")
    else:
        extent = (0.0, 0.0, float(args.grid_n), float(args.grid_n))
    grid = build_grid(extent, args.grid_n)
    return grid, CalibrationParams.defaults(grid, args.align_threshold, args.complement_threshold)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="trajedi", description="Calibration-aware trajectory distances and benchmarks.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")
    sub.required = True

    g = sub.add_parser("generate", help="write a synthetic truth/degraded dataset pair")
    g.add_argument("--name", default="synthetic", help="output files are <name>.truth.csv and <name>.degraded.csv")
    g.add_argument("--out-dir", default=".", type=Path)
    g.add_argument("--grid_n", type=int, default=1000)
    g.add_argument("--num_trajectories", type=int, default=50)
    g.add_argument("--initial_length", type=int, default=1500)
    g.add_argument("--keep_mean", type=float, default=800.0)
    g.add_argument("--keep_sd", type=float, default=200.0)
    g.add_argument("--noise_sd", type=float, default=None, help="default: a quarter of the cell width")
    g.add_argument("--seed", type=int, default=0)

    c = sub.add_parser("calibrate", help="fully calibrate every trajectory of a dataset")
    c.add_argument("--input", required=True, type=Path)
    c.add_argument("--output", required=True, type=Path)
    _add_grid_flags(c)

    d = sub.add_parser("distance", help="print the DTW distance between two trajectories")
    d.add_argument("--input", required=True, type=Path, help="trajectory CSV")
    d.add_argument("--a", required=True, help="first trajectory id")
    d.add_argument("--b", required=True, help="second trajectory id")
    d.add_argument("--mode", choices=MODES, default="none")
    d.add_argument("--alpha", type=float)
    d.add_argument("--strategy", choices=STRATEGIES, default="random")
    d.add_argument("--seed", type=int, default=0)
    _add_grid_flags(d)

    e = sub.add_parser("experiment", help="run a config-driven sweep and write the results CSV")
    e.add_argument("--config", required=True, type=Path)
    for key in KEYS:
        e.add_argument(f"--{key}", dest=f"override_{key}", metavar="VALUE", help=f"override config key {key}")

    k = sub.add_parser("cost-curve", help="time full calibration against trajectory length")
    k.add_argument("--lengths", default="250,500,1000,2000", help="comma-separated point counts")
    k.add_argument("--trials", type=int, default=10)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--output", default="cost_curve.csv", help="CSV path, or - for stdout")
    _add_grid_flags(k)
    return parser


def _cmd_generate(args) -> int:
    cfg = GeneratorConfig(
        grid_n=args.grid_n,
        num_trajectories=args.num_trajectories,
        initial_length=args.initial_length,
        keep_mean=args.keep_mean,
        keep_sd=args.keep_sd,
        noise_sd=args.noise_sd,
        seed=args.seed,
    )
    generated = generate_dataset(cfg)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    truth_path = args.out_dir / f"{args.name}.truth.csv"
    degraded_path = args.out_dir / f"{args.name}.degraded.csv"
    save_csv(generated.truth, truth_path)
    save_csv(generated.degraded, degraded_path)
    print(truth_path)
    print(degraded_path)
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    grid, params = _grid_and_params(args)
    dataset = load_csv(args.input)
    out = []
    skipped = 0
    for t in dataset:
        cal, ok = calibrate(t, grid, params)
        skipped += not ok
        out.append(cal)
    if skipped:
        log.warning("%d trajectories had no point within the alignment threshold and were left unchanged", skipped)
    save_csv(Dataset(out), args.output)
    return EXIT_OK


def _cmd_distance(args) -> int:
    dataset = load_csv(args.input)
    a, b = dataset[args.a], dataset[args.b]
    if args.mode == "none":
        value = dtw_distance(a, b)
    else:
        grid, params = _grid_and_params(args)
        strategy = None
        if args.mode == "trajedi":
            if args.alpha is None:
                raise UsageError("--alpha is required with --mode trajedi")
            strategy = PartnerStrategy.parse(args.strategy, args.seed)
        warm_up()
        result = pairwise_distance_matrix(dataset, args.mode, grid, params, alpha=args.alpha, strategy=strategy)
        value = float(result.matrix[dataset.index_of(args.a), dataset.index_of(args.b)])
    print(format_float(value))
    return EXIT_OK


def _cmd_experiment(args) -> int:
    overrides = {
        key: getattr(args, f"override_{key}")
        for key in KEYS
        if getattr(args, f"override_{key}") is not None
    }
    config = parse_config(args.config, overrides)
    rows = run_experiment(config)
    config.output.parent.mkdir(parents=True, exist_ok=True)
    write_results(rows, config.output)
    print(config.output)
    return EXIT_OK


def _cmd_cost_curve(args) -> int:
    grid, params = _grid_and_params(args)
    try:
        lengths = [int(v) for v in args.lengths.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad --lengths {args.lengths!r}") from None
    rows = calibration_cost_curve(lengths, args.trials, grid, params, seed=args.seed)
    if args.output == "-":
        write_cost_curve(rows, sys.stdout)
    else:
        write_cost_curve(rows, args.output)
        print(args.output)
    return EXIT_OK


COMMANDS = {
    "generate": _cmd_generate,
    "calibrate": _cmd_calibrate,
    "distance": _cmd_distance,
    "experiment": _cmd_experiment,
    "cost-curve": _cmd_cost_curve,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageExit as exc:
        exc.parser.print_usage(sys.stderr)
        print(f"{exc.parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ExperimentFailure as exc:
        print(f"trajedi: error: {exc}", file=sys.stderr)
        return EXIT_DATA if isinstance(exc.cause, ParseError) else EXIT_USAGE
    except ParseError as exc:
        print(f"trajedi: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except UsageError as exc:
        print(f"trajedi: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"trajedi: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (AssertionError, TrajediError) as exc:
        print(f"trajedi: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())

import numpy as np
import pytest

from trajedi.cli import main
from trajedi.config import parse_config
from trajedi.errors import ConfigError
from trajedi.experiment import RESULTS_HEADER, read_results, run_experiment, write_results
from trajedi.model import load_csv

SMALL_GEN = "grid_n = 30\nnum_trajectories = 5\ninitial_length = 40\nkeep_mean = 20\nkeep_sd = 4\nseed = 3\n"


def write_config(tmp_path, body, name="exp.cfg"):
    path = tmp_path / name
    path.write_text(body)
    return path


class TestConfig:
    def test_defaults(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, "mode = none\n"))
        assert cfg.modes == ("none",)
        assert cfg.seed == 0 and cfg.workers == 1 and cfg.grid_n == 1000
        assert cfg.generator.num_trajectories == 50
        assert str(cfg.output) == "results.csv"

    def test_alpha_out_of_range(self, tmp_path):
        with pytest.raises(ConfigError, match="alpha") as err:
            parse_config(write_config(tmp_path, "mode = trajedi\n\nalpha = 0.2, 1.5\n"))
        assert err.value.line == 3

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="foo") as err:
            parse_config(write_config(tmp_path, "# comment\nfoo = 1\n"))
        assert err.value.key == "foo" and err.value.line == 2

    def test_repeated_key(self, tmp_path):
        with pytest.raises(ConfigError, match="repeated"):
            parse_config(write_config(tmp_path, "seed = 1\nseed = 2\n"))

    def test_missing_dataset_file(self, tmp_path):
        body = "mode = none\ntruth = nope.truth.csv\ndegraded = nope.degraded.csv\n"
        with pytest.raises(ConfigError, match="does not exist"):
            parse_config(write_config(tmp_path, body))

    def test_truth_without_degraded(self, tmp_path):
        (tmp_path / "a.csv").write_text("traj_id,seq,x,y\na,1,0,0\n")
        with pytest.raises(ConfigError, match="together"):
            parse_config(write_config(tmp_path, "mode = none\ntruth = a.csv\n"))

    def test_trajedi_needs_alpha(self, tmp_path):
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(write_config(tmp_path, "mode = trajedi\n"))

    @pytest.mark.parametrize("line", ["mode = fast", "strategy = best", "seed = x", "grid_n = 0", "extent = 0,0,1"])
    def test_bad_values(self, tmp_path, line):
        with pytest.raises(ConfigError):
            parse_config(write_config(tmp_path, line + "\n"))

    def test_overrides_win(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, "seed = 1\nalpha = 0.4\n"), {"seed": "7", "alpha": "0.6,0.2"})
        assert cfg.seed == 7 and cfg.alphas == (0.2, 0.6)


class TestExperiment:
    def test_none_and_full(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, SMALL_GEN + "mode = none, full\n"))
        rows = run_experiment(cfg)
        assert [r.mode for r in rows] == ["none", "full"]
        assert [r.efficiency for r in rows] == [0.0, 1.0]
        assert rows[1].accuracy < rows[0].accuracy

    def test_sweep_order(self, tmp_path):
        body = SMALL_GEN + "mode = trajedi\nalpha = 0.6, 0.2, 0.4\nstrategy = shortest, random, furthest\n"
        rows = run_experiment(parse_config(write_config(tmp_path, body)))
        assert len(rows) == 9
        assert [(r.alpha, r.strategy) for r in rows[:4]] == [
            (0.2, "shortest"), (0.2, "random"), (0.2, "furthest"), (0.4, "shortest")
        ]
        for r in rows:
            assert 0.0 < r.efficiency < 1.0
            assert r.total_ms >= r.partner_selection_ms

    def test_results_round_trip(self, tmp_path):
        cfg = parse_config(write_config(tmp_path, SMALL_GEN + "mode = none, trajedi\nalpha = 0.3\n"))
        rows = run_experiment(cfg)
        write_results(rows, tmp_path / "r.csv")
        lines = (tmp_path / "r.csv").read_text().splitlines()
        assert lines[0] == ",".join(RESULTS_HEADER)
        assert lines[1].startswith("synthetic,none,,,")
        assert read_results(tmp_path / "r.csv") == rows


class TestCommandLine:
    @pytest.fixture
    def dataset_files(self, tmp_path):
        code = main([
            "generate", "--name", "small", "--out-dir", str(tmp_path), "--grid_n", "30",
            "--num_trajectories", "4", "--initial_length", "30", "--keep_mean", "15", "--keep_sd", "3",
        ])
        assert code == 0
        return tmp_path / "small.truth.csv", tmp_path / "small.degraded.csv"

    def test_generate(self, dataset_files):
        truth, degraded = (load_csv(p) for p in dataset_files)
        assert truth.ids == degraded.ids == ["t000", "t001", "t002", "t003"]

    def test_distance_to_self(self, dataset_files, capsys):
        capsys.readouterr()
        assert main(["distance", "--input", str(dataset_files[1]), "--a", "t001", "--b", "t001"]) == 0
        assert capsys.readouterr().out.strip() == "0.0"

    def test_distance_trajedi(self, dataset_files, capsys):
        args = ["distance", "--input", str(dataset_files[1]), "--a", "t000", "--b", "t002", "--grid_n", "30"]
        assert main(args + ["--mode", "trajedi", "--alpha", "0.5", "--strategy", "shortest"]) == 0
        value = float(capsys.readouterr().out.split()[-1])
        assert np.isfinite(value) and value > 0

    def test_distance_unknown_id(self, dataset_files):
        assert main(["distance", "--input", str(dataset_files[1]), "--a", "t000", "--b", "zz"]) == 1

    def test_calibrate(self, dataset_files, tmp_path):
        out = tmp_path / "cal.csv"
        assert main(["calibrate", "--input", str(dataset_files[1]), "--output", str(out), "--grid_n", "30"]) == 0
        cal = load_csv(out)
        assert np.all(np.mod(cal["t000"].coords, 1.0) == 0.5)

    def test_experiment(self, dataset_files, tmp_path):
        cfg = write_config(
            tmp_path,
            f"truth = {dataset_files[0].name}\ndegraded = {dataset_files[1].name}\ngrid_n = 30\n"
            "mode = none, full, trajedi\nalpha = 0.5\nstrategy = random\noutput = out/results.csv\n",
        )
        assert main(["experiment", "--config", str(cfg), "--seed", "4"]) == 0
        rows = read_results(tmp_path / "out" / "results.csv")
        assert [r.mode for r in rows] == ["none", "full", "trajedi"]
        assert all(r.dataset == "small" and r.seed == 4 for r in rows)

    def test_cost_curve_stdout(self, capsys):
        assert main(["cost-curve", "--lengths", "20,40", "--trials", "2", "--grid_n", "50", "--output", "-"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "points_per_trajectory,mean_calibration_ms,trials" and len(lines) == 3

    def test_unknown_subcommand(self, capsys):
        assert main(["bogus"]) == 1
        assert "usage:" in capsys.readouterr().err

    def test_missing_required(self, capsys):
        assert main(["distance", "--a", "x"]) == 1

    def test_malformed_csv(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("traj_id,seq,x,y\na,1,0,0\na,2,zero,0\n")
        assert main(["distance", "--input", str(bad), "--a", "a", "--b", "a"]) == 2
        assert "line 3" in capsys.readouterr().err

    def test_bad_config_is_usage_error(self, tmp_path):
        assert main(["experiment", "--config", str(write_config(tmp_path, "alpha = 2\n"))]) in (1, 2)

    def test_missing_input_file(self, tmp_path):
        assert main(["calibrate", "--input", str(tmp_path / "none.csv"), "--output", str(tmp_path / "o.csv")]) == 2

import dataclasses
import subprocess
import sys

import pytest

import cvpool.cli as cli
from cvpool.dataset import load_csv


def write_dataset(tmp_path, seed=13):
    path = tmp_path / "data.csv"
    code = cli.main([
        "synth", "--out", str(path), "--seed", str(seed),
        "--n-right", "12", "--n-left", "10", "--d", "4", "--planted", "1:2.0",
    ])
    assert code == 0
    return path


class TestSynth:
    def test_writes_expected_shape(self, tmp_path, capsys):
        path = write_dataset(tmp_path)
        ds = load_csv(path)
        assert ds.n_samples == 22
        assert ds.n_features == 4
        assert "22x4" in capsys.readouterr().out

    def test_paper_defaults(self, tmp_path):
        path = tmp_path / "d.csv"
        assert cli.main(["synth", "--out", str(path), "--seed", "7"]) == 0
        ds = load_csv(path)
        assert ds.n_samples == 56
        assert ds.n_features == 16

    def test_refuses_overwrite_without_force(self, tmp_path):
        path = write_dataset(tmp_path)
        assert cli.main(["synth", "--out", str(path), "--seed", "1"]) == 1
        assert cli.main(["synth", "--out", str(path), "--seed", "1", "--force"]) == 0

    def test_bad_planted_spec_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["synth", "--out", str(tmp_path / "x.csv"), "--seed", "1",
                      "--planted", "nonsense"])
        assert exc.value.code == 1

    def test_out_of_range_planted_is_data_error(self, tmp_path):
        code = cli.main(["synth", "--out", str(tmp_path / "x.csv"), "--seed", "1",
                         "--d", "4", "--planted", "9:1.0"])
        assert code == 2


class TestRun:
    def run_args(self, data, out, extra=()):
        return [
            "run", "--data", str(data), "--out", str(out),
            "--iterations", "3", "--folds", "4", "--seed", "5", *extra,
        ]

    def test_end_to_end(self, tmp_path, capsys):
        data = write_dataset(tmp_path)
        out = tmp_path / "rep"
        assert cli.main(self.run_args(data, out)) == 0
        for name in ("report.json", "losses.csv", "summary.csv",
                     "feature_scores.csv", "boxplot.csv", "report.md"):
            assert (out / name).exists()
        assert "6 report files" in capsys.readouterr().out

    def test_rerun_identical_bytes(self, tmp_path):
        data = write_dataset(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.main(self.run_args(data, out_a)) == 0
        assert cli.main(self.run_args(data, out_b)) == 0
        for name in ("report.json", "losses.csv", "summary.csv"):
            assert (out_a / name).read_bytes() == (out_b / name).read_bytes()

    def test_threads_do_not_change_outputs(self, tmp_path):
        data = write_dataset(tmp_path)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert cli.main(self.run_args(data, out_a, ["--threads", "1"])) == 0
        assert cli.main(self.run_args(data, out_b, ["--threads", "4"])) == 0
        assert (out_a / "report.json").read_bytes() == (out_b / "report.json").read_bytes()

    def test_missing_data_file_exits_2_without_partial_output(self, tmp_path, capsys):
        out = tmp_path / "rep"
        code = cli.main(self.run_args(tmp_path / "missing.csv", out))
        assert code == 2
        assert not out.exists()
        assert "error" in capsys.readouterr().err

    def test_overwrite_refused_without_force(self, tmp_path):
        data = write_dataset(tmp_path)
        out = tmp_path / "rep"
        assert cli.main(self.run_args(data, out)) == 0
        assert cli.main(self.run_args(data, out)) == 1
        assert cli.main(self.run_args(data, out, ["--force"])) == 0

    def test_seed_is_required(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--data", "d.csv", "--out", "rep"])
        assert exc.value.code == 1

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            cli.main(["run", "--data", "d.csv", "--out", "r", "--seed", "1", "--bogus"])
        assert exc.value.code == 1

    def test_strict_escalates_unconverged_cells(self, tmp_path, monkeypatch, capsys):
        data = write_dataset(tmp_path)
        real_run = cli.run_experiment

        def doctored(dataset, cfg, threads=1):
            report = real_run(dataset, cfg, threads)
            records = tuple(
                dataclasses.replace(r, unconverged_cells=2) for r in report.records
            )
            return dataclasses.replace(report, records=records)

        monkeypatch.setattr(cli, "run_experiment", doctored)
        assert cli.main(self.run_args(data, tmp_path / "a")) == 0  # warn only
        assert "did not converge" in capsys.readouterr().err
        assert cli.main(self.run_args(data, tmp_path / "b", ["--strict"])) == 3

    def test_invalid_config_value_is_data_error(self, tmp_path):
        data = write_dataset(tmp_path)
        code = cli.main(self.run_args(data, tmp_path / "rep", ["--test-fraction", "2.0"]))
        assert code == 2


class TestReportSubcommand:
    def test_rerenders_tables(self, tmp_path):
        data = write_dataset(tmp_path)
        out = tmp_path / "rep"
        assert cli.main([
            "run", "--data", str(data), "--out", str(out),
            "--iterations", "2", "--folds", "4", "--seed", "3",
        ]) == 0
        again = tmp_path / "again"
        assert cli.main(["report", str(out / "report.json"), "--out", str(again)]) == 0
        for name in ("losses.csv", "summary.csv", "feature_scores.csv",
                     "boxplot.csv", "report.md"):
            assert (again / name).read_bytes() == (out / name).read_bytes()
        assert not (again / "report.json").exists()

    def test_missing_json_exits_2(self, tmp_path):
        assert cli.main(["report", str(tmp_path / "no.json"), "--out", str(tmp_path)]) == 2


def test_run_defaults_encode_the_reference_protocol():
    parser = cli._build_parser()
    args = parser.parse_args(["run", "--data", "d.csv", "--out", "rep", "--seed", "1"])
    assert args.iterations == 30
    assert args.folds == 5
    assert args.test_fraction == 0.3
    assert args.max_subset == 2
    assert args.box_constraint == 1.0


def test_no_args_prints_help(capsys):
    assert cli.main([]) == 0
    out = capsys.readouterr().out
    assert "synth" in out and "run" in out and "report" in out


def test_console_script_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "cvpool.cli", "synth", "--out",
         str(tmp_path / "d.csv"), "--seed", "2", "--n-right", "5", "--n-left", "4",
         "--d", "3"],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0
    assert (tmp_path / "d.csv").exists()

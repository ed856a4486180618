"""End-to-end tests of the command-line interface.

Everything goes through ``run(argv)`` so exit codes and file outputs are
exercised exactly as a shell user would see them; replay tests compare
bytes, not parsed content.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from fractalwalk import (
    Family,
    GeneratorSpec,
    deviation_stats,
    derive_seed,
    generate,
    inversion_ratio,
    read_binary,
    read_csv,
    sign_predictor_closed_form,
    write_csv,
)
from fractalwalk.cli import run


def run_in(tmp_path, *argv: str) -> int:
    return run([*argv, "--output-dir", str(tmp_path)])


def replay(manifest_path, dest) -> int:
    return run(["--from-manifest", str(manifest_path), "--output-dir", str(dest)])


def outputs_of(manifest_path) -> list[str]:
    return json.loads(manifest_path.read_text())["outputs"]


class TestGenerate:
    ARGS = ("generate", "--family", "frw", "--T", "64", "--delta", "0.2",
            "--base-len", "8", "--seed", "5")

    def test_writes_sequence_and_summary(self, tmp_path, capsys):
        assert run_in(tmp_path, *self.ARGS) == 0
        seq = read_binary(tmp_path / "frw-T64-seed5.fwsq")
        spec = GeneratorSpec(family=Family.FRW, total_len=64, delta=0.2, base_len=8, seed=5)
        assert seq == generate(spec).sequence
        summary = json.loads((tmp_path / "frw-T64-seed5.json").read_text())
        assert summary["length"] == 64
        assert summary["height"] == int(seq.values.sum())
        assert summary["spec"]["family"] == "frw"
        assert f"height {summary['height']}" in capsys.readouterr().out

    def test_csv_format(self, tmp_path):
        assert run_in(tmp_path, *self.ARGS, "--format", "csv") == 0
        seq = read_csv(tmp_path / "frw-T64-seed5.csv")
        assert len(seq) == 64

    def test_replay_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_in(a, *self.ARGS) == 0
        manifest = a / "generate-manifest.json"
        assert replay(manifest, b) == 0
        for name in outputs_of(manifest):
            assert (b / name).read_bytes() == (a / name).read_bytes()


class TestStats:
    ARGS = ("stats", "--family", "uniform", "--T", "64", "--seed", "3",
            "--T-list", "64,128", "--trials", "200")

    def test_csv_and_fit(self, tmp_path, capsys):
        assert run_in(tmp_path, *self.ARGS) == 0
        lines = (tmp_path / "stats.csv").read_text().splitlines()
        assert lines[0] == "family,delta,T,metric,value,stderr,trials,seed"
        assert len(lines) == 1 + 2 * 3  # two lengths x three metrics
        report = json.loads((tmp_path / "stats.json").read_text())
        assert len(report["rows"]) == 2
        assert "exponent" in capsys.readouterr().out

    def test_replay_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_in(a, *self.ARGS) == 0
        manifest = a / "stats-manifest.json"
        assert replay(manifest, b) == 0
        for name in outputs_of(manifest):
            assert (b / name).read_bytes() == (a / name).read_bytes()


class TestPredict:
    def test_weighted_majority(self, tmp_path):
        assert run_in(
            tmp_path, "predict", "--family", "frw", "--T", "64", "--delta", "0.2",
            "--base-len", "8", "--predictor", "weighted_majority", "--trials", "50",
        ) == 0
        result = json.loads((tmp_path / "predict.json").read_text())
        assert result["trials"] == 50
        assert isinstance(result["mean_payoff"], float)
        assert result["stop_causes"] is None

    def test_adaptive_bettor_reports_stop_causes(self, tmp_path):
        assert run_in(
            tmp_path, "predict", "--family", "uniform", "--T", "256",
            "--predictor", "adaptive_bettor", "--theta", "8", "--trials", "40",
        ) == 0
        result = json.loads((tmp_path / "predict.json").read_text())
        assert sum(result["stop_causes"].values()) == 40

    def test_missing_predictor_flags_exit_2(self, tmp_path):
        assert run_in(
            tmp_path, "predict", "--family", "uniform", "--T", "64",
            "--predictor", "adaptive_bettor", "--trials", "10",
        ) == 2
        assert run_in(
            tmp_path, "predict", "--family", "uniform", "--T", "64",
            "--predictor", "sign_of_prefix", "--trials", "10",
        ) == 2


class TestInversion:
    def test_from_spec(self, tmp_path):
        assert run_in(
            tmp_path, "inversion", "--family", "uniform", "--T", "256", "--seed", "9",
        ) == 0
        report = json.loads((tmp_path / "inversion.json").read_text())
        spec = GeneratorSpec(family=Family.UNIFORM, total_len=256, seed=9)
        direct = inversion_ratio(generate(spec).sequence)
        assert report["overall_ratio"] == direct.overall_ratio
        assert report["min_len"] == 8

    def test_from_file(self, tmp_path):
        seq = generate(GeneratorSpec(family=Family.UNIFORM, total_len=128, seed=2)).sequence
        path = tmp_path / "input.csv"
        write_csv(seq, path)
        assert run_in(tmp_path, "inversion", "--input", str(path), "--min-len", "16") == 0
        report = json.loads((tmp_path / "inversion.json").read_text())
        assert report["overall_ratio"] == inversion_ratio(seq, min_len=16).overall_ratio

    def test_dyadic_flag(self, tmp_path):
        assert run_in(
            tmp_path, "inversion", "--family", "uniform", "--T", "256", "--dyadic-only",
        ) == 0
        assert json.loads((tmp_path / "inversion.json").read_text())["dyadic_only"] is True

    def test_needs_spec_or_input(self, tmp_path):
        assert run_in(tmp_path, "inversion", "--min-len", "8") == 2


class TestAlphaQ:
    def test_basic_estimate(self, tmp_path, capsys):
        assert run_in(
            tmp_path, "alphaq", "--family", "uniform", "--T", "512", "--alpha", "0.3",
            "--x", "128", "--trials", "1000",
        ) == 0
        result = json.loads((tmp_path / "alphaq.json").read_text())
        assert 0.0 <= result["q_hat"] <= 1.0
        assert "q_hat(0.3)" in capsys.readouterr().out

    def test_window_cannot_exceed_length(self, tmp_path):
        assert run_in(
            tmp_path, "alphaq", "--family", "uniform", "--T", "64", "--alpha", "0.3",
            "--x", "128", "--trials", "1000",
        ) == 2


class TestThetaAndFractal:
    def test_theta_output(self, tmp_path, capsys):
        assert run_in(tmp_path, "theta", "--alpha", "0.25") == 0
        result = json.loads((tmp_path / "theta.json").read_text())
        assert abs(result["residual"]) < 1e-10
        assert "theta(0.25)" in capsys.readouterr().out

    def test_theta_replay(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_in(a, "theta", "--alpha", "0.4") == 0
        assert replay(a / "theta-manifest.json", b) == 0
        assert (b / "theta.json").read_bytes() == (a / "theta.json").read_bytes()

    def test_fractal_build(self, tmp_path):
        assert run_in(
            tmp_path, "fractal", "--alpha", "0.3333333333333333", "--height", "100",
            "--format", "csv",
        ) == 0
        result = json.loads((tmp_path / "fractal-a0.333333-h100.json").read_text())
        seq = read_csv(tmp_path / result["file"])
        assert int(seq.values.sum()) == 100
        assert result["length"] == len(seq)
        assert result["split_points"] is not None

    def test_fractal_alpha_validated(self, tmp_path):
        assert run_in(tmp_path, "fractal", "--alpha", "0.9", "--height", "100") == 2


class TestFbm:
    def test_outputs_and_sampled_paths(self, tmp_path):
        assert run_in(
            tmp_path, "fbm", "--hurst", "0.6", "--grid-len", "64", "--window", "16",
            "--trials", "2000", "--sample", "3",
        ) == 0
        result = json.loads((tmp_path / "fbm.json").read_text())
        assert result["sign_predictor_closed_form"] == pytest.approx(
            sign_predictor_closed_form(0.6, 16, 1)
        )
        lines = (tmp_path / "fbm-paths.csv").read_text().splitlines()
        assert len(lines) == 1 + 3
        assert lines[0].startswith("t1,t2,")

    def test_grid_too_short_exit_2(self, tmp_path):
        assert run_in(
            tmp_path, "fbm", "--hurst", "0.6", "--grid-len", "16", "--window", "16",
        ) == 2


class TestSweep:
    ARGS = ("sweep", "--families", "uniform,frw", "--deltas", "0.0,0.1",
            "--T-list", "64", "--metrics", "deviation", "--trials", "200",
            "--parallelism", "1", "--master-seed", "11")

    def test_long_csv_layout(self, tmp_path):
        assert run_in(tmp_path, *self.ARGS) == 0
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "family,delta,T,metric,value,stderr,trials,seed"
        assert len(lines) == 1 + 4 * 3  # four cells x three deviation metrics
        assert json.loads((tmp_path / "sweep-failures.json").read_text()) == []

    def test_cell_matches_direct_call(self, tmp_path):
        assert run_in(tmp_path, *self.ARGS) == 0
        seed = derive_seed(11, "frw", 0.1, 64)
        spec = GeneratorSpec(family=Family.FRW, total_len=64, delta=0.1, seed=seed)
        report = deviation_stats(spec, [64], 200)
        wanted = f"{report.rows[0].median_dev:.10g}"
        rows = [
            line for line in (tmp_path / "sweep.csv").read_text().splitlines()
            if line.startswith("frw,0.1,64,median_dev,")
        ]
        assert rows == [f"frw,0.1,64,median_dev,{wanted},,200,{seed}"]

    def test_replay_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_in(a, *self.ARGS) == 0
        manifest = a / "sweep-manifest.json"
        assert replay(manifest, b) == 0
        for name in outputs_of(manifest):
            assert (b / name).read_bytes() == (a / name).read_bytes()

    def test_failing_cell_isolated_and_reported(self, tmp_path, capsys):
        # k = 40 demands heights above the length: that cell fails, the
        # uniform cell still lands in the CSV, exit code is 1.
        code = run_in(
            tmp_path, "sweep", "--families", "uniform,entropy_conditioned",
            "--deltas", "0.0", "--T-list", "64", "--metrics", "deviation",
            "--trials", "200", "--parallelism", "1", "--k", "40",
        )
        assert code == 1
        failures = json.loads((tmp_path / "sweep-failures.json").read_text())
        assert len(failures) == 1
        assert failures[0]["spec"]["family"] == "entropy_conditioned"
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert len(lines) == 1 + 3
        assert "cell failed" in capsys.readouterr().err

    def test_unknown_metric_exit_2(self, tmp_path):
        assert run_in(
            tmp_path, "sweep", "--families", "uniform", "--T-list", "64",
            "--metrics", "bogus",
        ) == 2


class TestVerifyCommand:
    def test_single_criterion(self, tmp_path, capsys):
        assert run_in(tmp_path, "verify", "--only", "theta-solver") == 0
        payload = json.loads((tmp_path / "verify.json").read_text())
        assert payload["all_passed"] is True
        assert [r["name"] for r in payload["results"]] == ["theta-solver"]
        assert "1/1 criteria passed" in capsys.readouterr().out

    def test_unknown_criterion_exit_2(self, tmp_path):
        assert run_in(tmp_path, "verify", "--only", "nope") == 2


class TestExitCodes:
    def test_bad_delta_exit_2(self, tmp_path):
        assert run_in(
            tmp_path, "generate", "--family", "frw", "--T", "64", "--delta", "2.0",
        ) == 2

    def test_bad_length_exit_2(self, tmp_path):
        assert run_in(
            tmp_path, "stats", "--family", "uniform", "--T", "1000",
            "--T-list", "1000", "--trials", "200",
        ) == 2

    def test_argparse_rejects_unknown_family(self, tmp_path):
        with pytest.raises(SystemExit):
            run_in(tmp_path, "generate", "--family", "nope", "--T", "64")


class TestManifestReplay:
    def test_wrong_command_rejected(self, tmp_path):
        a = tmp_path / "a"
        assert run_in(a, "theta", "--alpha", "0.25") == 0
        assert run(["stats", "--from-manifest", str(a / "theta-manifest.json")]) == 2

    def test_extra_flags_rejected(self, tmp_path):
        a = tmp_path / "a"
        assert run_in(a, "theta", "--alpha", "0.25") == 0
        assert run([
            "--from-manifest", str(a / "theta-manifest.json"), "--alpha", "0.3",
        ]) == 2

    def test_matching_command_prefix_allowed(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_in(a, "theta", "--alpha", "0.25") == 0
        assert run([
            "theta", "--from-manifest", str(a / "theta-manifest.json"),
            "--output-dir", str(b),
        ]) == 0
        assert (b / "theta.json").read_bytes() == (a / "theta.json").read_bytes()

    def test_missing_manifest_exit_2(self, tmp_path):
        assert run(["--from-manifest", str(tmp_path / "missing.json")]) == 2

    def test_dangling_flag_exit_2(self):
        assert run(["--from-manifest"]) == 2


class TestEnvironment:
    def test_output_dir_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("FRACTALWALK_OUTPUT_DIR", str(tmp_path / "from-env"))
        assert run(["theta", "--alpha", "0.3"]) == 0
        assert (tmp_path / "from-env" / "theta.json").exists()

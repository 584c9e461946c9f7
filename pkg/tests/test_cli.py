import json
import re

import pytest

from tiplab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


class TestSimulate:
    def test_csv_output(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--model", "moving-sn", "--set", "mu=0.5",
            "--set", "r=0.03125", "--t0", "0", "--t1", "1", "--samples", "3",
            "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "t,x0"
        assert len(lines) == 4

    def test_csv_uses_17_significant_digits(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--model", "drift", "--set", "r=0.5",
            "--t0", "0", "--t1", "1", "--samples", "2", "--format", "csv",
        )
        assert code == 0
        value = out.strip().splitlines()[-1].split(",")[1]
        # round-trips exactly through repr
        assert float(value) == float(repr(float(value)))
        assert re.match(r"-?\d", value)
        digits = value.replace("-", "").replace(".", "").split("e")[0].lstrip("0")
        assert len(digits) >= 15

    def test_json_output_with_file(self, capsys, tmp_path):
        out_file = tmp_path / "sim.json"
        code, out, _ = run(
            capsys, "simulate", "--model", "drift", "--t0", "0", "--t1", "1",
            "--out", str(out_file),
        )
        assert code == 0
        payload = json.loads(out_file.read_text())
        assert payload["status"] == "completed"
        assert len(payload["samples"]["t"]) == len(payload["samples"]["x"])

    def test_zero_length_range_empty_samples(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--model", "drift", "--t0", "1", "--t1", "1",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["samples"] == {"t": [], "x": []}

    def test_escape_reported(self, capsys):
        code, out, _ = run(
            capsys, "simulate", "--model", "moving-sn", "--set", "mu=0.5",
            "--set", "r=0.09375", "--x0", "0.25", "--t0", "0", "--t1", "20",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "escaped"
        lo, hi = payload["escape_bracket"]
        assert lo < hi


class TestPullback:
    def test_json_converged(self, capsys):
        code, out, _ = run(
            capsys, "pullback", "--model", "drift", "--set", "r=0.5",
            "--window", "0,2",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["status"] == "converged"
        assert payload["convergence_gaps"][-1] < 1e-8 * 10

    def test_repelling_sense(self, capsys):
        code, out, _ = run(
            capsys, "pullback", "--model", "moving-sn", "--set", "mu=0.5",
            "--set", "r=0.03125", "--window", "0,2", "--sense", "repelling",
            "--format", "csv",
        )
        assert code == 0
        assert out.splitlines()[0] == "t,x0"


class TestQse:
    def test_csv_branches(self, capsys):
        code, out, _ = run(
            capsys, "qse", "--model", "moving-sn", "--set", "mu=0.5",
            "--set", "r=0.03125", "--s-grid", "0,2,5", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "branch,s,x0,stability"
        assert len(lines) == 11  # 2 branches x 5 samples


class TestTip:
    def test_drift_zero_brackets(self, capsys):
        code, out, _ = run(
            capsys, "tip", "--model", "drift", "--r-range", "0.5,2",
            "--window", "0,1", "--resolution", "0.001",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["brackets"] == []

    def test_sn_bracket_csv(self, capsys):
        code, out, _ = run(
            capsys, "tip", "--model", "moving-sn", "--set", "mu=0.5",
            "--r-range", "0.02,0.2", "--resolution", "0.005", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "lower,upper,width,classification,flagged"
        lo, hi = float(lines[1].split(",")[0]), float(lines[1].split(",")[1])
        assert lo <= 0.0625 <= hi


class TestSweep:
    def test_env_thread_count(self, capsys, monkeypatch):
        monkeypatch.setenv("TIPLAB_THREADS", "2")
        code, out, _ = run(
            capsys, "sweep", "--model", "drift", "--rates", "0.1,0.5",
            "--window", "0,2", "--format", "csv",
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "r,n_attractors,escaped,tipped"
        assert len(lines) == 3


class TestFigure:
    @pytest.mark.parametrize("which", ["fig1", "fig2", "fig3", "fig4", "fig5"])
    def test_all_figures_emit_csv(self, capsys, tmp_path, which):
        out_file = tmp_path / f"{which}.csv"
        code, _, _ = run(
            capsys, "figure", "--which", which, "--format", "csv",
            "--out", str(out_file),
        )
        assert code == 0
        lines = out_file.read_text().strip().splitlines()
        assert len(lines) > 10

    def test_unknown_figure_is_usage_error(self, capsys):
        code, _, err = run(capsys, "figure", "--which", "fig9")
        assert code == 2
        assert "fig9" in err


class TestConfigAndErrors:
    def test_config_file_supplies_model(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "model": "moving-sn",
            "params": {"mu": 0.5, "r": 0.03125},
            "analysis": {"t0": 0.0, "t1": 1.0, "samples": 3},
            "output": {"format": "csv"},
        }))
        code, out, _ = run(capsys, "simulate", "--config", str(cfg))
        assert code == 0
        assert out.splitlines()[0] == "t,x0"

    def test_flag_overrides_config(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": "drift", "params": {"r": 0.5}}))
        code, out, _ = run(
            capsys, "simulate", "--config", str(cfg), "--set", "r=1.0",
            "--t0", "0", "--t1", "1",
        )
        assert code == 0
        assert json.loads(out)["params"]["r"] == 1.0

    def test_missing_model_is_usage_error(self, capsys):
        code, _, err = run(capsys, "simulate")
        assert code == 2
        assert "model" in err

    def test_bad_config_path_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--config", "/nonexistent.json")
        assert code == 2

    def test_bad_set_syntax_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--model", "drift", "--set", "r0.5")
        assert code == 2

    def test_unknown_param_is_usage_error(self, capsys):
        code, _, _ = run(capsys, "simulate", "--model", "drift", "--set", "zeta=1")
        assert code == 2

    def test_unknown_subcommand(self, capsys):
        assert main(["frobnicate"]) == 2

import json
import math
import subprocess
import sys

import pytest

from belllab.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def simulate(capsys, out, *extra, model="qm", rounds="20000", seed="7"):
    return run_cli(capsys, "simulate", "--model", model, "--rounds", rounds, "--seed", seed,
                   "--out", str(out), *extra)


class TestSimulate:
    def test_qm(self, capsys, tmp_path):
        code, stdout, _ = simulate(capsys, tmp_path, "--angles", "0,90,45,315", rounds="100000")
        assert code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert summary == json.loads(stdout)
        assert abs(summary["S"] + 2 * math.sqrt(2)) <= 3 * summary["SE"]
        assert summary["feasible"] is False
        assert summary["max_deterministic_S"] == 2
        assert set(summary["E"]) == {"ab", "a'b", "ab'", "a'b'"}
        lines = (tmp_path / "trials.csv").read_text().splitlines()
        assert lines[0].startswith("round,setting_a_label")
        assert len(lines) == 100_001

    def test_lhv_cos(self, capsys, tmp_path):
        code, _, _ = simulate(capsys, tmp_path, model="lhv-cos", rounds="100000")
        assert code == 0
        summary = json.loads((tmp_path / "summary.json").read_text())
        assert abs(summary["S"]) <= 2 + 3 * summary["SE"]

    def test_lhv_table(self, capsys, tmp_path):
        strat = tmp_path / "s.json"
        strat.write_text(json.dumps([{"table": [1, 1, 1, 1], "weight": 0.5},
                                     {"table": [-1, -1, -1, -1], "weight": 0.5}]))
        code, _, _ = simulate(capsys, tmp_path / "o", "--strategy-file", str(strat), model="lhv-table",
                              rounds="5000")
        assert code == 0
        summary = json.loads((tmp_path / "o" / "summary.json").read_text())
        assert summary["S"] == 2
        assert summary["feasible"] is True

    def test_nine_significant_digits(self, capsys, tmp_path):
        simulate(capsys, tmp_path)
        summary = json.loads((tmp_path / "summary.json").read_text())
        for v in (summary["S"], summary["SE"], *summary["E"].values()):
            assert float(f"{v:.9g}") == v

    def test_sweep(self, capsys, tmp_path):
        code, _, _ = simulate(capsys, tmp_path, "--sweep", "5", model="lhv-cos", rounds="10000")
        assert code == 0
        rows = (tmp_path / "sweep.csv").read_text().splitlines()
        assert rows[0] == "theta_deg,E_model,E_empirical"
        assert len(rows) == 6

    def test_replay_byte_identical(self, capsys, tmp_path):
        simulate(capsys, tmp_path / "a", "--workers", "2", model="lhv-cos")
        code, _, _ = run_cli(capsys, "replay", str(tmp_path / "a" / "manifest.json"), "--out", str(tmp_path / "b"))
        assert code == 0
        for name in ("trials.csv", "summary.json", "manifest.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_worker_count_invariance(self, capsys, tmp_path):
        simulate(capsys, tmp_path / "w1", "--workers", "1", rounds="30000")
        simulate(capsys, tmp_path / "w4", "--workers", "4", rounds="30000")
        assert (tmp_path / "w1" / "trials.csv").read_bytes() == (tmp_path / "w4" / "trials.csv").read_bytes()

    def test_env_seed(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("BELLLAB_SEED", "7")
        run_cli(capsys, "simulate", "--model", "qm", "--rounds", "5000", "--out", str(tmp_path / "env"))
        simulate(capsys, tmp_path / "flag", rounds="5000", seed="7")
        assert (tmp_path / "env" / "trials.csv").read_bytes() == (tmp_path / "flag" / "trials.csv").read_bytes()
        assert json.loads((tmp_path / "env" / "manifest.json").read_text())["seed"] == 7


class TestExitCodes:
    def test_zero_rounds(self, capsys, tmp_path):
        code, _, err = simulate(capsys, tmp_path, rounds="0")
        assert code == 2
        assert "usage" in err

    @pytest.mark.parametrize("argv", [
        ["simulate", "--model", "bohm", "--rounds", "10", "--out", "x"],
        ["simulate", "--model", "qm", "--rounds", "10", "--out", "x", "--angles", "0,90"],
        ["simulate", "--model", "lhv-table", "--rounds", "10", "--out", "x"],
        ["optimize"],
        ["verify", "nothing"],
        [],
    ])
    def test_bad_flags(self, capsys, argv):
        assert run_cli(capsys, *argv)[0] == 2

    def test_bad_env_seed(self, capsys, tmp_path, monkeypatch):
        monkeypatch.setenv("BELLLAB_SEED", "seven")
        code, _, _ = run_cli(capsys, "simulate", "--model", "qm", "--rounds", "10", "--out", str(tmp_path))
        assert code == 2

    def test_io_failure(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        code, _, err = simulate(capsys, blocker / "sub", rounds="100")
        assert code == 3
        assert "I/O" in err

    def test_missing_manifest(self, capsys, tmp_path):
        assert run_cli(capsys, "replay", str(tmp_path / "nope.json"), "--out", str(tmp_path))[0] == 3


class TestReports:
    def test_verify_spectrum(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "spectrum")
        rep = json.loads(out)
        assert code == 0 and rep["pass"] is True
        assert rep["eigenvalues"] == [-3, 1, 1, 1]

    def test_verify_relatedness(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "relatedness")
        rep = json.loads(out)
        assert code == 0
        assert all(p["related"] for p in rep["pairs"])
        ab = next(p for p in rep["pairs"] if p["names"] == ["A", "B"])
        # Bob's variable lives at b + 180 on the circle: 45 + 180 - 0
        assert ab["witness"] == 225
        assert "theorem1" in rep

    def test_verify_theorem1(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "theorem1", "--trials", "300")
        rep = json.loads(out)
        assert code == 0 and rep["counterexamples"] == 0

    def test_verify_theorem2(self, capsys):
        code, out, _ = run_cli(capsys, "verify", "theorem2")
        rep = json.loads(out)
        assert code == 0
        assert len(rep["table"]) == 16
        assert {row["D"] for row in rep["table"]} == {-1, 1}
        assert all(row["D"] == abs(row["C"]) - 1 for row in rep["table"])

    def test_enumerate(self, capsys):
        code, out, _ = run_cli(capsys, "enumerate")
        rep = json.loads(out)
        assert code == 0
        assert rep["max_S"] == 2 and rep["argmax_count"] == 8

    def test_optimize(self, capsys):
        code, out, _ = run_cli(capsys, "optimize", "--model", "qm")
        assert code == 0
        assert abs(json.loads(out)["S_abs"] - 2.8284271) <= 1e-6

    def test_feasibility(self, capsys):
        code, out, _ = run_cli(capsys, "feasibility", "--model", "qm", "--angles", "0,90,45,315")
        assert code == 0
        assert json.loads(out)["feasible"] is False
        code, out, _ = run_cli(capsys, "feasibility", "--model", "lhv-cos", "--angles", "0,90,45,315")
        assert json.loads(out)["feasible"] is True


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "belllab", "enumerate"], capture_output=True, text=True)
    assert res.returncode == 0
    assert json.loads(res.stdout)["max_S"] == 2

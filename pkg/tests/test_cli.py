import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from khalasi.cli import main

STUBS = Path(__file__).parent / "stubs"


def run_cli(*argv):
    return main(list(argv))


class TestBasics:
    def test_version_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("--version")
        assert exc.value.code == 0

    def test_help_exits_zero(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("--help")
        assert exc.value.code == 0

    def test_unknown_flag_usage_error(self):
        with pytest.raises(SystemExit) as exc:
            run_cli("simulate", "--bogus")
        assert exc.value.code == 2

    def test_unknown_env_runtime_error(self, capsys):
        rc = run_cli("simulate", "--env", "nope", "--seed", "1")
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error:") and "\n" not in err.strip()


class TestSimulate:
    def test_greedy_smoke(self, tmp_path):
        rc = run_cli("simulate", "--env", "cyl-static", "--policy", "builtin:greedy",
                     "--seed", "7", "--out", str(tmp_path))
        assert rc == 0
        csv_path = tmp_path / "cyl-static_seed7.csv"
        summary_path = tmp_path / "cyl-static_seed7.json"
        assert csv_path.exists() and summary_path.exists()
        with open(csv_path) as fh:
            rows = list(csv.DictReader(fh))
        assert set(rows[0]) >= {"t", "x", "y", "theta", "u_x", "u_y",
                                "a_l", "a_r", "energy_cum"}
        summary = json.loads(summary_path.read_text())
        assert summary["outcome"] in ("success", "timeout", "out_of_bounds")
        assert summary["seed"] == 7

    def test_exec_policy(self, tmp_path):
        cmd = f"{sys.executable} {STUBS / 'echo_zero.py'}"
        rc = run_cli("simulate", "--env", "still", "--policy", f"exec:{cmd}",
                     "--seed", "3", "--steps", "20", "--out", str(tmp_path), "--quiet")
        assert rc == 0
        summary = json.loads((tmp_path / "still_seed3.json").read_text())
        assert summary["total_energy"] == 0.0

    def test_override_roundtrip(self, tmp_path):
        rc = run_cli("simulate", "--env", "still", "--set", "reward.target_radius=8.0",
                     "--seed", "2", "--steps", "50", "--out", str(tmp_path), "--quiet")
        assert rc == 0

    def test_no_record_writes_nothing(self, tmp_path):
        out = tmp_path / "none"
        rc = run_cli("simulate", "--env", "still", "--seed", "2", "--steps", "20",
                     "--out", str(out), "--quiet", "--no-record")
        assert rc == 0
        assert not out.exists()

    def test_unknown_override_rejected(self, tmp_path, capsys):
        rc = run_cli("simulate", "--env", "still", "--set", "reward.bogus=1",
                     "--seed", "2", "--out", str(tmp_path))
        assert rc == 1
        assert "unknown config key" in capsys.readouterr().err


class TestPlan:
    def test_dijkstra_gyre(self, tmp_path, capsys):
        out = tmp_path / "wp.csv"
        rc = run_cli("plan", "--algo", "dijkstra", "--env", "gyre2",
                     "--start", "0.2,0.5", "--goal", "1.8,0.5",
                     "--resolution", "0.1", "--out", str(out))
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert rows[0]["x"] == "0.2"
        assert float(rows[-1]["x"]) == pytest.approx(1.8)

    def test_astar_json_format(self, capsys):
        rc = run_cli("plan", "--algo", "astar", "--env", "still",
                     "--start", "20,50", "--goal", "100,50", "--resolution", "10",
                     "--format", "json")
        assert rc == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["steps"] == 8
        assert payload["waypoints"][0] == [20.0, 50.0]


class TestField:
    def make_file(self, tmp_path):
        path = tmp_path / "f.uvg"
        rc = run_cli("field", "synth", "--env", "gyre2", "--out", str(path),
                     "--nx", "10", "--ny", "6", "--nt", "4", "--dt", "25")
        assert rc == 0
        return path

    def test_synth_info_sample_refine(self, tmp_path, capsys):
        path = self.make_file(tmp_path)
        capsys.readouterr()

        assert run_cli("field", "info", str(path)) == 0
        info = json.loads(capsys.readouterr().out)
        assert (info["nx"], info["ny"], info["nt"]) == (10, 6, 4)

        assert run_cli("field", "sample", str(path), "--pos", "1.0,0.5", "--time", "10") == 0
        sample = json.loads(capsys.readouterr().out)
        assert "u" in sample and "v" in sample

        fine = tmp_path / "fine.uvg"
        assert run_cli("field", "refine", str(path), "--factor", "2", "--out", str(fine)) == 0
        capsys.readouterr()
        assert run_cli("field", "info", str(fine)) == 0
        fine_info = json.loads(capsys.readouterr().out)
        assert (fine_info["nx"], fine_info["ny"], fine_info["nt"]) == (19, 11, 7)

    def test_simulate_on_uvgrid(self, tmp_path):
        path = self.make_file(tmp_path)
        rc = run_cli("simulate", "--env", f"uvgrid:{path}", "--layout", "pair_min_dist",
                     "--policy", "builtin:drift", "--seed", "5", "--steps", "30",
                     "--out", str(tmp_path / "o"), "--quiet")
        assert rc == 0

    def test_missing_file_error(self, capsys):
        rc = run_cli("field", "info", "/nonexistent/x.uvg")
        assert rc == 1


class TestGprBench:
    def test_sweep_csv(self, tmp_path, capsys):
        out = tmp_path / "sweep.csv"
        rc = run_cli("gpr-bench", "--env", "gyre2", "--windows", "10,20",
                     "--evals", "3", "--out", str(out))
        assert rc == 0
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert [r["window_size"] for r in rows] == ["10", "20"]
        assert all(float(r["mae_mean"]) > 0 for r in rows)


class TestEvalAndPlot:
    def test_eval_then_plots(self, tmp_path, capsys):
        spec = {
            "cells": [
                {"env": "still", "layout": "grid10", "policy": "builtin:greedy"},
            ],
            "grid_repeats": 1,
            "seed_base": 5,
            "out_dir": str(tmp_path / "run"),
            "step_limit": 1500,
            "write_episode_csvs": True,
        }
        spec_path = tmp_path / "spec.json"
        spec_path.write_text(json.dumps(spec))
        rc = run_cli("eval", "--spec", str(spec_path))
        assert rc == 0
        run_dir = tmp_path / "run"
        assert (run_dir / "summary.json").exists()
        assert (run_dir / "cells.csv").exists()
        assert (run_dir / "heatmap.csv").exists()

        heat_svg = tmp_path / "heat.svg"
        rc = run_cli("plot", "heatmap", str(run_dir / "heatmap.csv"), "--out", str(heat_svg))
        assert rc == 0 and heat_svg.stat().st_size > 0

        ep_csv = sorted((run_dir / "episodes").glob("*.csv"))[0]
        traj_svg = tmp_path / "traj.svg"
        rc = run_cli("plot", "trajectory", str(ep_csv), "--out", str(traj_svg),
                     "--env", "still")
        assert rc == 0 and traj_svg.stat().st_size > 0


class TestCalibrate:
    def test_gyre_report(self, capsys):
        rc = run_cli("calibrate", "--env", "gyre2", "--what", "gyre")
        assert rc == 0
        report = json.loads(capsys.readouterr().out)
        amp = report["gyre_amplitude"]
        assert amp["suggested_amplitude"] == pytest.approx(amp["stored_amplitude"], rel=1e-3)


def test_console_script_installed():
    proc = subprocess.run(["khalasi", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "khalasi" in proc.stdout

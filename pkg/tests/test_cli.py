import json

import numpy as np
import pytest

from lrwave.cli import main, run
from lrwave.config import ExperimentConfig
from lrwave.errors import ConfigurationError
from lrwave.serialize import fmt, read_csv, write_csv


def tiny_sweep_config(out, jobs=1):
    return {
        "mode": "sweep",
        "seed": 77,
        "jobs": jobs,
        "output_dir": str(out),
        "medium": {"gamma": {"kind": "constant", "value": 0.8}},
        "source": {"n": 1024},
        "ensemble": {"n_realizations": 3},
        "sweep": {"epsilons": [0.2, 0.15]},
    }


class TestConfig:
    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigurationError, match="typo_key"):
            ExperimentConfig.from_dict({"typo_key": 1})

    def test_unknown_nested_key(self):
        with pytest.raises(ConfigurationError, match="epsilonn"):
            ExperimentConfig.from_dict({"medium": {"epsilonn": 0.1}})

    def test_unknown_mode(self):
        with pytest.raises(ConfigurationError, match="mode"):
            ExperimentConfig.from_dict({"mode": "render"})

    def test_defaults_materialize(self):
        cfg = ExperimentConfig.from_dict({})
        resolved = cfg.resolved()
        assert resolved["mode"] == "verify"
        assert resolved["sweep"]["epsilons"] == [0.1, 0.05, 0.025]

    def test_manifest_unwrapping(self):
        cfg = ExperimentConfig.from_dict({"mode": "synth"})
        wrapped = {"config": cfg.resolved(), "artifacts": []}
        cfg2 = ExperimentConfig.from_dict(wrapped)
        assert cfg2.mode == "synth"


class TestRun:
    def test_verify_mode_passes(self, tmp_path):
        status = run({"mode": "verify", "output_dir": str(tmp_path)})
        assert status == 0
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["passed"] is True
        assert all(c["passed"] for suite in report["suites"].values()
                   for c in suite)

    def test_bad_profile_exits_one(self, tmp_path, capsys):
        status = run({"mode": "synth", "output_dir": str(tmp_path),
                      "medium": {"gamma": {"kind": "constant", "value": 1.4}},
                      "ensemble": {"n_realizations": 1}})
        assert status == 1
        assert "gamma" in capsys.readouterr().err

    def test_synth_deterministic_digests(self, tmp_path):
        cfg = {"mode": "synth", "seed": 5, "output_dir": str(tmp_path / "a"),
               "medium": {"epsilon": 0.2,
                          "gamma": {"kind": "constant", "value": 0.8}},
               "ensemble": {"n_realizations": 2}}
        assert run(cfg) == 0
        cfg["output_dir"] = str(tmp_path / "b")
        assert run(cfg) == 0
        m_a = json.loads((tmp_path / "a" / "run_manifest.json").read_text())
        m_b = json.loads((tmp_path / "b" / "run_manifest.json").read_text())
        assert [e["sha256"] for e in m_a["artifacts"]] == \
            [e["sha256"] for e in m_b["artifacts"]]

    def test_manifest_replay_reproduces_artifacts(self, tmp_path):
        cfg = tiny_sweep_config(tmp_path / "first")
        assert run(cfg) == 0
        manifest = tmp_path / "first" / "run_manifest.json"
        replay = json.loads(manifest.read_text())
        replay["config"]["output_dir"] = str(tmp_path / "second")
        replay_path = tmp_path / "replay.json"
        replay_path.write_text(json.dumps(replay))
        assert run(replay_path) == 0
        m1 = json.loads(manifest.read_text())
        m2 = json.loads((tmp_path / "second" / "run_manifest.json").read_text())
        assert [e["sha256"] for e in m1["artifacts"]] == \
            [e["sha256"] for e in m2["artifacts"]]

    def test_sweep_records_and_cells(self, tmp_path):
        assert run(tiny_sweep_config(tmp_path)) == 0
        cells = json.loads((tmp_path / "sweep.json").read_text())
        assert [c["epsilon"] for c in cells] == [0.2, 0.15]
        for cell in cells:
            assert set(cell) == {"epsilon", "n_realizations", "median_l2",
                                 "median_width_ratio", "shift_vs_v1_corr"}
        records = json.loads((tmp_path / "records.json").read_text())
        assert len(records) == 6
        assert all(r["conservation_defect"] < 1e-8 for r in records)

    def test_parallel_jobs_match_serial(self, tmp_path):
        assert run(tiny_sweep_config(tmp_path / "serial", jobs=1)) == 0
        assert run(tiny_sweep_config(tmp_path / "par", jobs=2)) == 0
        r1 = json.loads((tmp_path / "serial" / "records.json").read_text())
        r2 = json.loads((tmp_path / "par" / "records.json").read_text())
        assert r1 == r2

    def test_limits_mode_emits_trajectories(self, tmp_path):
        cfg = {"mode": "limits", "output_dir": str(tmp_path),
               "limits": {"kind": "multifrac", "n": 512}}
        assert run(cfg) == 0
        header, data = read_csv(tmp_path / "sh_linear_0.csv")
        assert header == ["t", "value"]
        assert data.shape[0] == 513
        assert (tmp_path / "sh_periodic_1.csv").exists()
        # covariance oracle grids ride along as regression fixtures
        header2, grid = read_csv(tmp_path / "sh_linear_0_covariance.csv")
        assert header2 == ["z1", "z2", "cov"]
        assert grid.shape == (16, 3)
        assert np.all(grid[:, 2] > 0)

    def test_verify_tolerance_failure_exits_two(self, tmp_path):
        status = run({"mode": "verify", "output_dir": str(tmp_path),
                      "tolerances": {"renorm": 1e-30}})
        assert status == 2
        report = json.loads((tmp_path / "verify_report.json").read_text())
        assert report["passed"] is False

    def test_limits_zero_length_rejected(self, tmp_path):
        status = run({"mode": "limits", "output_dir": str(tmp_path),
                      "limits": {"n": 0}})
        assert status == 1

    def test_propagate_mode(self, tmp_path):
        cfg = {"mode": "propagate", "seed": 3, "output_dir": str(tmp_path),
               "medium": {"epsilon": 0.2,
                          "gamma": {"kind": "constant", "value": 0.8}},
               "source": {"n": 1024},
               "ensemble": {"n_realizations": 2}}
        assert run(cfg) == 0
        records = json.loads((tmp_path / "records.json").read_text())
        assert len(records) == 2
        assert (tmp_path / "transmitted_0001.csv").exists()
        assert (tmp_path / "spectrum_0000.csv").exists()


class TestMain:
    def test_cli_overrides(self, tmp_path):
        status = main(["--mode", "limits", "--out", str(tmp_path),
                       "--seed", "9"])
        assert status == 0
        manifest = json.loads((tmp_path / "run_manifest.json").read_text())
        assert manifest["config"]["seed"] == 9
        assert manifest["config"]["mode"] == "limits"

    def test_jobs_env_default(self, tmp_path, monkeypatch):
        monkeypatch.setenv("LRWAVE_JOBS", "3")
        status = main(["--mode", "verify", "--out", str(tmp_path)])
        assert status == 0
        manifest = json.loads((tmp_path / "run_manifest.json").read_text())
        assert manifest["config"]["jobs"] == 3


class TestSerialize:
    def test_seventeen_digit_roundtrip(self, tmp_path):
        values = np.array([np.pi, 1 / 3, 1e-300, 123456789.123456789])
        path = write_csv(tmp_path / "x.csv", ["v"], [values])
        _, data = read_csv(path)
        assert np.array_equal(data[:, 0], values)

    def test_fmt_is_shortest_exact(self):
        assert float(fmt(np.pi)) == np.pi

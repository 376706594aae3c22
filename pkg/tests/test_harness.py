import json
import math
from pathlib import Path

import numpy as np
import pytest

from ftlab.harness import EXPERIMENTS, ExperimentConfig, ExperimentReport, default_config, fit, run_experiment
from ftlab.harness import cli
from ftlab.harness.config import ConfigError
from ftlab.harness.experiments import trapezoid_bases
from ftlab.harness.report import FAIL, INCONCLUSIVE, PASS

CONFIGS = Path(__file__).parents[1] / "configs"


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="nope")
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="decay_rate", nu=-1.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="decay_rate", T=0.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(experiment="decay_rate", seed=None)
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "decay_rate", "bogus": 1})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"experiment": "decay_rate", "schema_version": 99})
    ExperimentConfig(experiment="hypotheses", seed=None)


def test_config_round_trip(tmp_path):
    cfg = default_config("riemann_oracle", params={"n_problems": 3})
    p = tmp_path / "c.json"
    cfg.save(p)
    again = ExperimentConfig.load(p)
    assert again == cfg
    assert again.to_json() == cfg.to_json()
    assert cfg.with_overrides(seed=None, nu=2e-3).nu == 2e-3
    assert cfg.with_overrides(seed=None).seed == cfg.seed


def test_shipped_configs_load():
    names = sorted(p.stem for p in CONFIGS.glob("*.json"))
    assert names == sorted(EXPERIMENTS)
    for p in CONFIGS.glob("*.json"):
        assert ExperimentConfig.load(p) == default_config(p.stem)


def test_fit_status():
    x = np.array([1.0, 2.0, 4.0, 8.0])
    assert fit(x, x ** 0.5, lo=0.4, hi=0.6)["status"] == PASS
    assert fit(x, x ** 0.5, lo=0.7)["status"] == FAIL
    assert fit(x[:3], x[:3] ** 0.5, lo=0.4)["status"] == INCONCLUSIVE
    noisy = np.array([1.0, 5.0, 0.3, 2.0])
    assert fit(x, noisy, lo=-10)["status"] == INCONCLUSIVE
    r = fit(x, x)
    assert r["n"] == 4 and r["r2"] == pytest.approx(1.0)


def test_report_files(tmp_path):
    rep = ExperimentReport({"experiment": "x"})
    rep.criterion("a", True)
    rep.criterion("b", np.bool_(False), {"v": np.float64(1.5), "arr": np.arange(2)})
    rep.table("t", ["x", "y"], [(1, 0.5), (np.int64(2), np.float64(0.25))])
    rep.runtime = 1.23
    assert not rep.ok
    out = rep.write(tmp_path / "r")
    d = json.loads((out / "report.json").read_text())
    assert d["criteria"]["b"] == {"status": "fail", "detail": {"v": 1.5, "arr": [0, 1]}}
    assert "runtime" not in d
    assert json.loads((out / "runtime.json").read_text())["runtime_seconds"] == 1.23
    assert (out / "t.csv").read_text() == "x,y\n1,0.5\n2,0.25\n"
    assert rep.summary_lines() == ["PASS         a", "FAIL         b"]


def test_inconclusive_does_not_fail():
    rep = ExperimentReport({})
    rep.criterion("x", INCONCLUSIVE)
    assert rep.ok


def test_trapezoid_tiling():
    L = 0.1
    left = trapezoid_bases(1.0, L)
    assert len(left) == math.ceil(4 * 1.0 / L)
    assert left[0] == -1.0 and left[-1] + L >= 1.0
    assert np.allclose(np.diff(left), L / 2)


def test_determinism_byte_identical(tmp_path):
    cfg = default_config("riemann_oracle", params={"n_problems": 5})
    a = run_experiment(cfg)
    b = run_experiment(cfg)
    assert a.to_json() == b.to_json()
    a.write(tmp_path / "a")
    b.write(tmp_path / "b")
    for name in ("report.json", "config.json", "oracle.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_cli_list_and_check(capsys):
    assert cli.main(["list-systems"]) == 0
    out = capsys.readouterr().out
    assert "appendix-a-quadratic" in out and "p-system-gamma2" in out
    assert cli.main(["check", "p-system-gamma2", "--n", "7"]) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["gnl_positive"]
    assert cli.main(["check", "not-a-system"]) == 2


def test_cli_run(tmp_path, capsys):
    cfg = default_config("riemann_oracle", params={"n_problems": 4})
    p = tmp_path / "cfg.json"
    cfg.save(p)
    out = tmp_path / "out"
    assert cli.main(["run", str(p), "--out", str(out), "--seed", "3", "--jobs", "1"]) == 0
    d = json.loads((out / "report.json").read_text())
    assert d["config"]["seed"] == 3 and d["passes"]
    bad = tmp_path / "bad.json"
    bad.write_text('{"experiment": "riemann_oracle", "nu": -1}')
    assert cli.main(["run", str(bad)]) == 2
    assert cli.main(["run", str(tmp_path / "missing.json")]) == 2


def test_parallel_matches_serial():
    cfg = default_config("riemann_oracle", params={"n_problems": 4})
    assert run_experiment(cfg, jobs=2).to_json() == run_experiment(cfg, jobs=1).to_json()

import json

import numpy as np
import pytest

from isocone.experiment_harness import (
    ExperimentConfig,
    distances,
    run_figure1,
    run_limit_check,
)


def test_distance_examples():
    assert distances([1, 0], [1, 0]) == (0.0, 0.0, 0.0)
    l1, l2, h = distances([1, 0], [0, 1])
    assert (l1, l2) == (2.0, pytest.approx(np.sqrt(2)))
    assert h == pytest.approx(np.sqrt(2))
    l1, l2, h = distances([0.5, 0.5], [1, 0])
    assert l1 == pytest.approx(1.0)
    assert l2 == pytest.approx(np.sqrt(0.5))
    assert h == pytest.approx(np.sqrt((np.sqrt(0.5) - 1) ** 2 + 0.5))


def test_distance_errors():
    with pytest.raises(ValueError):
        distances([0.5, 0.5], [1.0])
    with pytest.raises(ValueError):
        distances([-0.1, 1.1], [0.5, 0.5])


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        ExperimentConfig(scenario="nope")
    with pytest.raises(ValueError):
        ExperimentConfig.from_dict({"scenario": "figure1", "bogus": 1})
    with pytest.raises(ValueError):
        ExperimentConfig(replicates=0)
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n": [20], "replicates": 3, "seed": 4}))
    cfg = ExperimentConfig.from_json(path)
    assert cfg.q == [0.1, 0.2, 0.3, 0.2, 0.2] and cfg.n == [20]


def test_seed_env_fallback(monkeypatch):
    monkeypatch.setenv("ISOCONE_SEED", "99")
    assert ExperimentConfig().seed == 99
    assert ExperimentConfig(seed=5).seed == 5


def test_point_mass_truth_isotonized_never_worse():
    cfg = ExperimentConfig(q=[1, 0, 0, 0, 0], n=[30], replicates=50, seed=1)
    s = run_figure1(cfg)[30]
    # the only draw is the corner cell, so both estimators are exact
    assert np.all(s.raw["empirical_l1"] == 0) and np.all(s.raw["isotonized_l1"] == 0)


def test_figure1_small_run_writes_outputs(tmp_path):
    cfg = ExperimentConfig(n=[50, 100], replicates=40, seed=3, out=str(tmp_path))
    res = run_figure1(cfg)
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == ["distances_empirical_n100.csv", "distances_empirical_n50.csv",
                     "distances_isotonized_n100.csv", "distances_isotonized_n50.csv",
                     "summary.json"]
    rows = (tmp_path / "distances_isotonized_n50.csv").read_text().splitlines()
    assert rows[0] == "replicate,l1,l2,hellinger" and len(rows) == 41
    assert float(rows[1].split(",")[1]) == res[50].raw["isotonized_l1"][0]
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert set(summary["quartiles"]) == {"50", "100"}
    for n in (50, 100):
        for m in ("l1", "l2"):
            assert np.all(res[n].raw[f"isotonized_{m}"] <= res[n].raw[f"empirical_{m}"] + 1e-12)


def test_figure1_is_deterministic_and_worker_independent(tmp_path):
    outs = []
    for k, workers in enumerate((1, 2)):
        d = tmp_path / str(k)
        run_figure1(ExperimentConfig(n=[40], replicates=30, seed=8, out=str(d)), workers=workers)
        outs.append({p.name: p.read_bytes() for p in d.glob("*.csv")})
    assert outs[0] == outs[1]


def test_limit_check_outputs(tmp_path):
    cfg = ExperimentConfig(scenario="limit-check-pmf", pmf=[0.3, 0.3, 0.2, 0.2],
                           preorder={"elements": [0, 1, 2, 3], "edges": [[0, 1], [1, 2], [2, 3]]},
                           n=[1000], replicates=50, seed=2, out=str(tmp_path))
    report = run_limit_check(cfg)
    assert report.replicates == 50 and report.n_used == 1000
    data = json.loads((tmp_path / "mcreport.json").read_text())
    assert "ks_distances" in data
    lines = (tmp_path / "draws_finite.csv").read_text().splitlines()
    assert len(lines) == 50 and len(lines[0].split(",")) == 4


def test_limit_check_reg_needs_g0():
    cfg = ExperimentConfig(scenario="limit-check-reg", dims=[2, 2], n=[100], replicates=5, seed=1)
    with pytest.raises(ValueError, match="g0"):
        run_limit_check(cfg)

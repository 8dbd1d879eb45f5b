import json
from pathlib import Path

import pytest

from screenlab.config import ConfigError, FcondSettings, load_config, validate_config


def test_defaults():
    cfg = validate_config({"command": "sweep", "scenario": "fig1-triangular"})
    assert cfg.scenario.id == "fig1-triangular"
    assert cfg.epsilons is None and cfg.precision is None and cfg.timestamp
    assert cfg.fcond == FcondSettings()
    assert cfg.omega0 == (0.5, 1.0, 2.0)


def test_full_sweep_config():
    cfg = validate_config({
        "command": "sweep", "model": {"family": "matern", "nu": 2.5},
        "sites": {"near_offsets": [[1.0], [2.0]], "far_anchor": [1.0]},
        "epsilon_grid": [0.5, 0.25, 0.125], "mean_model": "ordinary", "precision": "native",
        "reference_limit": 0.9, "tolerance": 0.02, "fit": "log",
        "output": {"csv": "a.csv", "plot": "a.png"}, "timestamp": False,
    })
    assert cfg.scenario.id == "custom" and cfg.model.family == "matern"
    assert cfg.epsilons == (0.5, 0.25, 0.125)
    assert (cfg.scenario.reference_limit, cfg.scenario.tolerance, cfg.scenario.fit) == (0.9, 0.02, "log")
    assert cfg.csv_path == Path("a.csv") and cfg.plot_path == Path("a.png")
    assert not cfg.timestamp


def test_scenario_model_override():
    cfg = validate_config({"command": "sweep", "scenario": "fig2a-matern32", "model": {"family": "matern", "nu": 2.5}})
    assert cfg.scenario.model.nu == 2.5
    assert cfg.scenario.sites == validate_config({"command": "sweep", "scenario": "fig2a-matern32"}).scenario.sites


def test_fcond_settings():
    cfg = validate_config({"command": "fcond", "model": {"family": "triangular"},
                           "fcond": {"R": 0.5, "omega_max": 100, "points": 5}})
    assert cfg.fcond == FcondSettings(R=0.5, omega_max=100.0, points=5)


@pytest.mark.parametrize("data,msg", [
    ({"command": "sweep", "scenario": "fig1-triangular", "extra": 1}, "unknown config keys"),
    ({"scenario": "fig1-triangular"}, "command"),
    ({"command": "sweep"}, "needs a scenario"),
    ({"command": "fcond"}, "needs a model"),
    ({"command": "lemma1"}, "needs an instance"),
    ({"command": "lemma1", "instance": "zzz"}, "unknown lemma1 instance"),
    ({"command": "sweep", "scenario": "fig1-triangular", "tolerance": -1}, "tolerance"),
    ({"command": "sweep", "scenario": "fig1-triangular", "fit": "cubic"}, "fit"),
    ({"command": "sweep", "scenario": "fig1-triangular", "mean_model": "kriged"}, "mean_model"),
    ({"command": "sweep", "scenario": "fig1-triangular", "timestamp": "no"}, "timestamp"),
    ({"command": "band", "scenario": "fig1-triangular", "omega0": []}, "omega0"),
    ({"command": "band", "scenario": "fig1-triangular", "omega0": [1.0, -2.0]}, "omega0"),
    ({"command": "fcond", "model": {"family": "matern"}, "fcond": {"R": 1, "radius": 2}}, "unknown fcond keys"),
    ({"command": "fcond", "model": {"family": "matern"}, "fcond": {"omega_min": 10, "omega_max": 5}}, "omega_max"),
    ({"command": "sweep", "scenario": "fig1-triangular", "quadrature": {"atol": 1}}, "rtol"),
    ({"command": "sweep", "scenario": "fig1-triangular", "output": {"log": "x"}}, "output"),
    ({"command": "sweep", "scenario": "fig1-triangular", "sites": {"near_offsets": [[1.0]], "far_anchor": [1.0]}}, "not both"),
    ({"command": "sweep", "sites": {"near_offsets": [[1.0]], "far_anchor": [1.0]}}, "need a model"),
    ({"command": "sweep", "model": {"family": "matern", "dim": 2}, "sites": {"near_offsets": [[1.0]], "far_anchor": [1.0]}}, "dimensional"),
    ({"command": "sweep", "scenario": "fig1-triangular", "epsilon_grid": {"k_min": 5, "k_max": 2}}, "k_max >= k_min"),
    ({"command": "sweep", "model": {"family": "gaussian"}, "sites": {"near_offsets": [[1.0]], "far_anchor": [1.0]}}, "unknown family"),
])
def test_invalid(data, msg):
    with pytest.raises(ConfigError, match=msg):
        validate_config(data)


def test_load_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"command": "band", "scenario": "fig2a-matern32"}))
    assert load_config(p)["command"] == "band"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(p)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")

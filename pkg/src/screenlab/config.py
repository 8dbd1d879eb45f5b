"""Run configuration for the command line tools.

A config file is a JSON object.  Every key is optional on the file; command
line flags override file values.  The full set of keys::

    {
      "command": "sweep" | "band" | "fcond" | "lemma1",
      "scenario": "fig2a-matern32",          # catalog id (sweep, band)
      "model": {"family": "matern", "nu": 1.5},   # custom model (sweep, band, fcond)
      "sites": {"near_offsets": [[1.0]], "far_anchor": [1.0],
                "far_offsets": [[0.0]], "dim": 1},  # custom geometry
      "epsilon_grid": {"k_min": 2, "k_max": 12} | [0.5, 0.25, ...],
      "mean_model": "simple" | "ordinary",
      "precision": "auto" | "native" | "extended",
      "reference_limit": 0.75, "tolerance": 0.01, "fit": "power" | "log",
      "omega0": [0.5, 1.0, 2.0],              # band radii
      "fcond": {"R": 1.0, "omega_min": 1.0, "omega_max": 1e4,
                "points": 41, "threshold": 0.05},
      "instance": "fig3a",                    # lemma1
      "quadrature": {"rtol": 1e-9},
      "output": {"csv": "out.csv", "plot": "out.svg"},
      "timestamp": true
    }

Unknown keys are rejected and everything is validated before any
computation starts.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

from .experiments.catalog import Scenario, epsilon_grid, get_scenario, load_catalog
from .kernels import CovarianceModel, model_from_spec
from .kriging import PRECISIONS, SiteConfiguration

__all__ = ["COMMANDS", "ConfigError", "RunConfig", "load_config", "validate_config"]

COMMANDS = ("sweep", "band", "fcond", "lemma1")
_MEAN_MODELS = ("simple", "known-zero", "ordinary", "unknown-constant")
_KEYS = {
    "command", "scenario", "model", "sites", "epsilon_grid", "mean_model", "precision",
    "reference_limit", "tolerance", "fit", "omega0", "fcond", "instance", "quadrature",
    "output", "timestamp",
}
_FCOND_KEYS = {"R", "omega_min", "omega_max", "points", "threshold"}


class ConfigError(ValueError):
    """Invalid run configuration."""


@dataclass(frozen=True)
class FcondSettings:
    R: float = 1.0
    omega_min: float = 1.0
    omega_max: float = 1e4
    points: int = 41
    threshold: float = 0.05


@dataclass(frozen=True)
class RunConfig:
    command: str
    scenario: Optional[Scenario] = None
    model: Optional[CovarianceModel] = None
    epsilons: Optional[tuple] = None
    mean_model: Optional[str] = None
    precision: Optional[str] = None
    omega0: tuple = (0.5, 1.0, 2.0)
    fcond: FcondSettings = field(default_factory=FcondSettings)
    instance: Optional[str] = None
    rtol: float = 1e-9
    csv_path: Optional[Path] = None
    plot_path: Optional[Path] = None
    timestamp: bool = True


def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return data


def _positive(name, value):
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"{name} must be a number") from None
    if not (math.isfinite(v) and v > 0):
        raise ConfigError(f"{name} must be finite and positive")
    return v


def validate_config(data: dict) -> RunConfig:
    """Check ``data`` and build a :class:`RunConfig`; raises :class:`ConfigError`."""
    extra = set(data) - _KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(extra))}")
    command = data.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}")
    try:
        return _build(command, data)
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        raise ConfigError(str(msg)) from exc


def _build(command, data):
    cfg = RunConfig(command)
    scenario = None
    if data.get("scenario") is not None:
        if data.get("sites") is not None:
            raise ConfigError("give either a scenario or custom sites, not both")
        scenario = get_scenario(str(data["scenario"]))
        if data.get("model") is not None:
            scenario = replace(scenario, model=model_from_spec(data["model"]))
    model = None
    if data.get("model") is not None:
        model = model_from_spec(data["model"])
    if data.get("sites") is not None:
        if model is None:
            raise ConfigError("custom sites need a model")
        sites = SiteConfiguration.from_dict(data["sites"])
        if sites.dim != model.dim:
            raise ConfigError(f"sites are {sites.dim}-dimensional but the model is {model.dim}-dimensional")
        scenario = Scenario("custom", model, sites)
    if scenario is not None:
        upd = {}
        if "reference_limit" in data:
            ref = data["reference_limit"]
            upd["reference_limit"] = None if ref is None else float(ref)
        if "tolerance" in data:
            upd["tolerance"] = _positive("tolerance", data["tolerance"])
        if "fit" in data:
            if data["fit"] not in ("power", "log"):
                raise ConfigError("fit must be 'power' or 'log'")
            upd["fit"] = data["fit"]
        scenario = replace(scenario, **upd)
    cfg = replace(cfg, scenario=scenario, model=model if scenario is None else scenario.model)

    if data.get("epsilon_grid") is not None:
        cfg = replace(cfg, epsilons=tuple(epsilon_grid(data["epsilon_grid"])))
    mm = data.get("mean_model")
    if mm is not None and mm not in _MEAN_MODELS:
        raise ConfigError(f"mean_model must be one of {', '.join(_MEAN_MODELS)}")
    prec = data.get("precision")
    if prec is not None and prec not in PRECISIONS:
        raise ConfigError(f"precision must be one of {', '.join(PRECISIONS)}")
    cfg = replace(cfg, mean_model=mm, precision=prec)

    if data.get("omega0") is not None:
        om = data["omega0"]
        om = om if isinstance(om, list) else [om]
        if not om:
            raise ConfigError("omega0 must not be empty")
        cfg = replace(cfg, omega0=tuple(_positive("omega0", w) for w in om))
    if data.get("fcond") is not None:
        fc = data["fcond"]
        if not isinstance(fc, dict):
            raise ConfigError("fcond must be an object")
        bad = set(fc) - _FCOND_KEYS
        if bad:
            raise ConfigError(f"unknown fcond keys: {', '.join(sorted(bad))}")
        s = FcondSettings(
            R=_positive("fcond.R", fc.get("R", 1.0)),
            omega_min=_positive("fcond.omega_min", fc.get("omega_min", 1.0)),
            omega_max=_positive("fcond.omega_max", fc.get("omega_max", 1e4)),
            points=int(fc.get("points", 41)),
            threshold=_positive("fcond.threshold", fc.get("threshold", 0.05)),
        )
        if s.points < 2 or s.omega_max <= s.omega_min:
            raise ConfigError("fcond needs points >= 2 and omega_max > omega_min")
        cfg = replace(cfg, fcond=s)
    if data.get("quadrature") is not None:
        q = data["quadrature"]
        if not isinstance(q, dict) or set(q) - {"rtol"}:
            raise ConfigError("quadrature accepts only 'rtol'")
        cfg = replace(cfg, rtol=_positive("quadrature.rtol", q.get("rtol", 1e-9)))
    if data.get("output") is not None:
        out = data["output"]
        if not isinstance(out, dict) or set(out) - {"csv", "plot"}:
            raise ConfigError("output accepts only 'csv' and 'plot'")
        plot = out.get("plot")
        if plot is not None and Path(plot).suffix.lower() not in (".svg", ".png"):
            raise ConfigError("plot path must end in .svg or .png")
        cfg = replace(
            cfg,
            csv_path=None if out.get("csv") is None else Path(out["csv"]),
            plot_path=None if plot is None else Path(plot),
        )
    if "timestamp" in data:
        if not isinstance(data["timestamp"], bool):
            raise ConfigError("timestamp must be true or false")
        cfg = replace(cfg, timestamp=data["timestamp"])
    if data.get("instance") is not None:
        ids = [d["id"] for d in load_catalog()["lemma1"]]
        if data["instance"] not in ids:
            raise ConfigError(f"unknown lemma1 instance {data['instance']!r}; choose from {', '.join(ids)}")
        cfg = replace(cfg, instance=data["instance"])

    if command in ("sweep", "band") and cfg.scenario is None:
        raise ConfigError(f"{command} needs a scenario or a model with sites")
    if command == "fcond" and cfg.model is None:
        raise ConfigError("fcond needs a model")
    if command == "lemma1" and cfg.instance is None:
        raise ConfigError("lemma1 needs an instance")
    return cfg

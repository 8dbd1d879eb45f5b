"""Named scenarios shipped with the package.

The catalog lives in ``screenlab/data/catalog.json``.  It has three lists:
``scenarios`` (geometry, model and the known limit of the screening ratio),
``models`` (densities with their expected slow-variation verdict) and
``lemma1`` (rescaled combinations with target covariance limits).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Optional

from ..kernels import CovarianceModel, model_from_spec
from ..kriging import SiteConfiguration

__all__ = [
    "DEFAULT_EPSILONS",
    "CatalogModel",
    "Scenario",
    "catalog",
    "catalog_models",
    "epsilon_grid",
    "get_scenario",
    "lemma1_instances",
    "load_catalog",
]

DEFAULT_EPSILONS = tuple(2.0**-k for k in range(2, 13))


def epsilon_grid(spec) -> list:
    """Geometric grid ``base^-k`` for ``k = k_min..k_max``, or an explicit list.

    ``spec`` is either a list of positive numbers or a mapping with keys
    ``k_min``, ``k_max`` and optionally ``base`` (default 2) and ``step``.
    """
    if spec is None:
        return list(DEFAULT_EPSILONS)
    if isinstance(spec, (list, tuple)):
        grid = [float(e) for e in spec]
    elif isinstance(spec, dict):
        extra = set(spec) - {"base", "k_min", "k_max", "step"}
        if extra:
            raise ValueError(f"unknown epsilon_grid keys {sorted(extra)}")
        base = float(spec.get("base", 2.0))
        k0, k1 = int(spec["k_min"]), int(spec["k_max"])
        step = int(spec.get("step", 1))
        if base <= 1 or step < 1 or k1 < k0:
            raise ValueError("epsilon_grid needs base > 1, step >= 1 and k_max >= k_min")
        grid = [base**-k for k in range(k0, k1 + 1, step)]
    else:
        raise ValueError("epsilon_grid must be a list or a mapping")
    if not grid or any(e <= 0 for e in grid) or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be positive and strictly decreasing")
    return grid


@dataclass(frozen=True)
class Scenario:
    id: str
    model: CovarianceModel
    sites: SiteConfiguration
    reference_limit: Optional[float] = None
    reference_expr: str = ""
    tolerance: float = 0.01
    epsilons: tuple = DEFAULT_EPSILONS
    fit: str = "power"  # or "log"
    mean_model: str = "simple"
    flags: tuple = ()
    description: str = ""
    extra: dict = field(default_factory=dict, compare=False)

    @property
    def geometry_approximate(self):
        return "geometry-approximate" in self.flags

    @property
    def fcond_violating(self):
        return "fcond-violating" in self.flags

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        allowed = {
            "id", "model", "sites", "reference_limit", "reference_expr", "tolerance",
            "epsilon_grid", "fit", "mean_model", "flags", "description", "extra",
        }
        extra = set(data) - allowed
        if extra:
            raise ValueError(f"unknown scenario keys {sorted(extra)}")
        for key in ("id", "model", "sites"):
            if key not in data:
                raise ValueError(f"scenario needs {key!r}")
        fit = data.get("fit", "power")
        if fit not in ("power", "log"):
            raise ValueError("fit must be 'power' or 'log'")
        ref = data.get("reference_limit")
        return cls(
            id=str(data["id"]),
            model=model_from_spec(data["model"]),
            sites=SiteConfiguration.from_dict(data["sites"]),
            reference_limit=None if ref is None else float(ref),
            reference_expr=data.get("reference_expr", ""),
            tolerance=float(data.get("tolerance", 0.01)),
            epsilons=tuple(epsilon_grid(data.get("epsilon_grid"))),
            fit=fit,
            mean_model=data.get("mean_model", "simple"),
            flags=tuple(data.get("flags", ())),
            description=data.get("description", ""),
            extra=dict(data.get("extra", {})),
        )

    def to_dict(self):
        out = {
            "id": self.id,
            "model": self.model.to_spec(),
            "sites": self.sites.to_dict(),
            "reference_limit": self.reference_limit,
            "reference_expr": self.reference_expr,
            "tolerance": self.tolerance,
            "epsilon_grid": list(self.epsilons),
            "fit": self.fit,
            "mean_model": self.mean_model,
            "flags": list(self.flags),
            "description": self.description,
        }
        if self.extra:
            out["extra"] = dict(self.extra)
        return out


@dataclass(frozen=True)
class CatalogModel:
    id: str
    model: CovarianceModel
    fcond: str  # expected verdict
    description: str = ""


@lru_cache(maxsize=1)
def load_catalog() -> dict:
    """Raw JSON content of the shipped catalog."""
    text = resources.files("screenlab").joinpath("data/catalog.json").read_text(encoding="utf-8")
    return json.loads(text)


def catalog() -> list:
    """All scenarios, in file order."""
    return [Scenario.from_dict(d) for d in load_catalog()["scenarios"]]


def get_scenario(name: str) -> Scenario:
    for d in load_catalog()["scenarios"]:
        if d["id"] == name:
            return Scenario.from_dict(d)
    raise KeyError(f"unknown scenario {name!r}")


def catalog_models() -> list:
    out = []
    for d in load_catalog()["models"]:
        out.append(CatalogModel(d["id"], model_from_spec(d["model"]), d["fcond"], d.get("description", "")))
    return out


def lemma1_instances() -> list:
    from .lemma1 import Lemma1Instance

    return [Lemma1Instance.from_dict(d) for d in load_catalog()["lemma1"]]

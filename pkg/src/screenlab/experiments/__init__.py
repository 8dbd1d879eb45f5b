"""Scenario catalog, screening sweeps, limit extrapolation and covariance-limit checks."""

from .catalog import (
    DEFAULT_EPSILONS,
    CatalogModel,
    Scenario,
    catalog,
    catalog_models,
    epsilon_grid,
    get_scenario,
    lemma1_instances,
    load_catalog,
)
from .lemma1 import CombinationRow, Lemma1Instance, Lemma1Report, Lemma1Step, verify_lemma1
from .sweep import Extrapolation, ScreeningSweep, SweepRecord, extrapolate_limit, run_sweep

__all__ = [
    "DEFAULT_EPSILONS",
    "CatalogModel",
    "CombinationRow",
    "Extrapolation",
    "Lemma1Instance",
    "Lemma1Report",
    "Lemma1Step",
    "Scenario",
    "ScreeningSweep",
    "SweepRecord",
    "catalog",
    "catalog_models",
    "epsilon_grid",
    "extrapolate_limit",
    "get_scenario",
    "lemma1_instances",
    "load_catalog",
    "run_sweep",
    "verify_lemma1",
]

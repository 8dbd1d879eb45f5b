"""Screening-ratio sweeps over a geometric eps grid and limit extrapolation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import optimize

from ..kernels import CovarianceModel
from ..kriging import GeometryError, KrigingError, SiteConfiguration, screening
from .catalog import Scenario

__all__ = ["Extrapolation", "ScreeningSweep", "SweepRecord", "extrapolate_limit", "run_sweep"]


@dataclass(frozen=True)
class Extrapolation:
    limit: float
    uncertainty: float
    exponent: float  # fitted q; nan when not fitted
    log_power: float  # fitted r in eps^q (-log eps)^r; 0 for the power model
    aitken: float
    residual: float
    verdict: str  # "ok", "inconclusive" or "insufficient data"
    model: str = "power"


@dataclass(frozen=True)
class SweepRecord:
    epsilon: float
    mse_near: float
    mse_full: float
    ratio: float
    condition: float
    precision: str
    error: str = ""

    @property
    def ok(self):
        return not self.error


@dataclass(frozen=True)
class ScreeningSweep:
    scenario: str
    records: tuple
    extrapolation: Optional[Extrapolation]
    reference_limit: Optional[float] = None
    reference_expr: str = ""
    tolerance: float = 0.01
    mean_model: str = "simple"
    flags: tuple = field(default=())

    @property
    def epsilons(self):
        return tuple(r.epsilon for r in self.records)

    @property
    def successful(self):
        return tuple(r for r in self.records if r.ok)

    @property
    def verdict(self) -> str:
        """``pass``, ``fail``, ``inconclusive`` or ``no reference``."""
        ex = self.extrapolation
        if ex is None or ex.verdict != "ok":
            return "inconclusive"
        if self.reference_limit is None:
            return "no reference"
        return "pass" if abs(ex.limit - self.reference_limit) <= self.tolerance else "fail"


def _fit_power(eps, rho, log_factor, q_range=None):
    """Variable projection for ``rho = a + c eps^q (-log eps)^r``."""
    if q_range is None:
        # q = 0 leaves a pure power of log, the slowest rate worth fitting
        q_range = (0.0, 6.0) if log_factor else (0.05, 6.0)
    x = np.asarray(eps, dtype=float)
    y = np.asarray(rho, dtype=float)
    lg = -np.log(x)

    def basis(q, r):
        g = x**q
        if log_factor:
            g = g * lg**r
        return g

    def linear(q, r):
        g = basis(q, r)
        a = np.column_stack([np.ones_like(g), g])
        coef, *_ = np.linalg.lstsq(a, y, rcond=None)
        res = y - a @ coef
        return coef, res

    def cost(params):
        q, r = params if log_factor else (params[0], 0.0)
        return linear(q, r)[1]

    best = None
    q_grid = np.linspace(q_range[0], q_range[1], 60)
    r_grid = np.linspace(-3.0, 3.0, 13) if log_factor else [0.0]
    for q in q_grid:
        for r in r_grid:
            s = float(np.sum(cost((q, r) if log_factor else (q,)) ** 2))
            if best is None or s < best[0]:
                best = (s, q, r)
    _, q0, r0 = best
    start = [q0, r0] if log_factor else [q0]
    lo = [q_range[0], -3.0] if log_factor else [q_range[0]]
    hi = [q_range[1], 3.0] if log_factor else [q_range[1]]
    sol = optimize.least_squares(cost, start, bounds=(lo, hi), xtol=1e-14, ftol=1e-14, gtol=1e-14)
    q, r = (sol.x[0], sol.x[1]) if log_factor else (sol.x[0], 0.0)
    coef, res = linear(q, r)
    return float(coef[0]), float(q), float(r), float(np.sqrt(np.mean(res**2)))


def _aitken(seq):
    if len(seq) < 3:
        return math.nan
    x0, x1, x2 = seq[-3:]
    den = (x2 - x1) - (x1 - x0)
    if den == 0.0:
        return float(x2)
    return float(x2 - (x2 - x1) ** 2 / den)


def extrapolate_limit(
    epsilons: Sequence[float],
    ratios: Sequence[float],
    log_factor: bool = False,
    tail: int = 6,
    noise: float = 1e-9,
) -> Extrapolation:
    """Fit ``rho(eps) = rho_inf + c eps^q`` (times ``(-log eps)^r`` if ``log_factor``).

    The fit uses the last ``tail`` points (eps decreasing).  The uncertainty is
    the larger of the RMS fit residual and the change in ``rho_inf`` when the
    smallest eps is dropped.  A tail whose successive differences change sign
    by more than ``noise`` (relative) is declared ``inconclusive``; so is a
    tail of fewer than three points.
    """
    eps = np.asarray(epsilons, dtype=float)
    rho = np.asarray(ratios, dtype=float)
    keep = np.isfinite(rho) & np.isfinite(eps)
    eps, rho = eps[keep], rho[keep]
    if eps.size and np.any(np.diff(eps) >= 0):
        order = np.argsort(-eps)
        eps, rho = eps[order], rho[order]
    model = "log" if log_factor else "power"
    if eps.size < 3:
        return Extrapolation(math.nan, math.nan, math.nan, 0.0, math.nan, math.nan, "insufficient data", model)
    eps, rho = eps[-tail:], rho[-tail:]
    aitken = _aitken(list(rho))
    scale = max(1.0, float(np.max(np.abs(rho))))
    diffs = np.diff(rho)
    if np.all(np.abs(diffs) <= noise * scale):
        spread = float(np.max(rho) - np.min(rho))
        return Extrapolation(float(rho[-1]), spread, math.nan, 0.0, aitken, spread, "ok", model)
    big = diffs[np.abs(diffs) > noise * scale]
    monotone = bool(np.all(big > 0) or np.all(big < 0))
    if not monotone:
        return Extrapolation(float(rho[-1]), math.nan, math.nan, 0.0, aitken, math.nan, "inconclusive", model)
    limit, q, r, resid = _fit_power(eps, rho, log_factor)
    if eps.size >= 4:
        prev = _fit_power(eps[:-1], rho[:-1], log_factor)[0]
        change = abs(limit - prev)
    else:
        change = abs(float(rho[-1] - rho[-2]))
    unc = max(resid, change)
    return Extrapolation(limit, unc, q, r, aitken, resid, "ok", model)


def run_sweep(
    scenario,
    epsilons: Optional[Sequence[float]] = None,
    mean_model: Optional[str] = None,
    precision: Optional[str] = None,
    model: Optional[CovarianceModel] = None,
    sites: Optional[SiteConfiguration] = None,
) -> ScreeningSweep:
    """Screening ratios along ``epsilons`` plus the extrapolated limit.

    ``scenario`` is a :class:`Scenario` or an id string for a user-defined run
    (in which case ``model`` and ``sites`` are required).  Failures at single
    eps values are recorded, not raised.
    """
    if isinstance(scenario, Scenario):
        sc = scenario
    else:
        if model is None or sites is None:
            raise ValueError("a custom sweep needs both a model and a site configuration")
        sc = Scenario(str(scenario), model, sites)
    grid = tuple(float(e) for e in (sc.epsilons if epsilons is None else epsilons))
    if not grid or any(b >= a for a, b in zip(grid, grid[1:])) or grid[-1] <= 0:
        raise ValueError("epsilon grid must be positive and strictly decreasing")
    mm = mean_model or sc.mean_model
    records = []
    for eps in grid:
        try:
            r = screening(sc.model, sc.sites, eps, mean_model=mm, precision=precision)
        except (KrigingError, GeometryError, NotImplementedError) as exc:
            records.append(SweepRecord(eps, math.nan, math.nan, math.nan, math.nan, "", str(exc)))
            continue
        records.append(SweepRecord(eps, r.mse_near, r.mse_full, r.ratio, r.condition, r.precision))
    good = [r for r in records if r.ok]
    ex = None
    if len(good) >= 3:
        ex = extrapolate_limit([r.epsilon for r in good], [r.ratio for r in good], log_factor=sc.fit == "log")
    return ScreeningSweep(
        sc.id, tuple(records), ex, sc.reference_limit, sc.reference_expr, sc.tolerance, mm, sc.flags
    )

"""Limits of covariance matrices of rescaled linear combinations.

An instance lists rows ``eps^(-p) * sum_k c_k(eps) Z(a_k + eps o_k)`` with
``c_k(eps) = c_k0 + c_k1 eps``.  Its covariance matrix is assembled in
double-double arithmetic, so rows with heavy cancellation (second
differences, say) stay accurate down to very small eps, and is compared
entrywise with a target matrix.  A block-diagonal target with a positive
leading entry and a positive definite lower block certifies that the
first row's predictor is asymptotically optimal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from ..kernels import CovarianceModel, model_from_spec
from ..specfun import ext

__all__ = ["CombinationRow", "Lemma1Instance", "Lemma1Report", "Lemma1Step", "verify_lemma1"]


@dataclass(frozen=True)
class CombinationRow:
    """``eps^(-power) * sum_k (c0_k + c1_k eps) Z(anchor_k + eps offset_k)``."""

    power: float
    terms: tuple  # of (c0, c1, anchor, offset)

    @classmethod
    def from_dict(cls, data):
        extra = set(data) - {"power", "terms"}
        if extra:
            raise ValueError(f"unknown row keys {sorted(extra)}")
        terms = []
        for t in data["terms"]:
            extra = set(t) - {"coef", "coef_eps", "anchor", "offset"}
            if extra:
                raise ValueError(f"unknown term keys {sorted(extra)}")
            anchor = tuple(float(c) for c in t.get("anchor", ()))
            offset = tuple(float(c) for c in t.get("offset", ()))
            if not anchor:
                anchor = (0.0,) * len(offset)
            if not offset:
                offset = (0.0,) * len(anchor)
            if len(anchor) != len(offset):
                raise ValueError("anchor and offset dimensions differ")
            terms.append((float(t.get("coef", 1.0)), float(t.get("coef_eps", 0.0)), anchor, offset))
        return cls(float(data.get("power", 0.0)), tuple(terms))

    def materialize(self, eps):
        e = ext(eps)
        return [
            (ext(c0) + e * c1, tuple(ext(a) + e * o for a, o in zip(anchor, offset)))
            for c0, c1, anchor, offset in self.terms
        ]


@dataclass(frozen=True)
class Lemma1Instance:
    """Scenario id, model, rows of the transformed vector and the target limit."""

    id: str
    model: CovarianceModel
    rows: tuple
    target: np.ndarray
    tolerance: float = 0.02
    epsilons: tuple = tuple(2.0**-k for k in range(4, 21, 2))
    description: str = ""

    @classmethod
    def from_dict(cls, data):
        allowed = {"id", "model", "rows", "target", "tolerance", "epsilon_grid", "description"}
        extra = set(data) - allowed
        if extra:
            raise ValueError(f"unknown lemma1 keys {sorted(extra)}")
        from .catalog import epsilon_grid

        rows = tuple(CombinationRow.from_dict(r) for r in data["rows"])
        target = np.array(data["target"], dtype=float)
        if target.shape != (len(rows), len(rows)):
            raise ValueError("target must be square with one row per combination")
        kw = {}
        if "epsilon_grid" in data:
            kw["epsilons"] = tuple(epsilon_grid(data["epsilon_grid"]))
        return cls(
            id=data["id"],
            model=model_from_spec(data["model"]),
            rows=rows,
            target=target,
            tolerance=float(data.get("tolerance", 0.02)),
            description=data.get("description", ""),
            **kw,
        )

    def covariance(self, eps):
        """Covariance matrix of the transformed vector at ``eps`` (floats)."""
        mats = [r.materialize(eps) for r in self.rows]
        n = len(mats)
        out = np.zeros((n, n))
        for i in range(n):
            for j in range(i, n):
                acc = ext(0.0)
                for ci, pi in mats[i]:
                    for cj, pj in mats[j]:
                        lag = tuple(a - b for a, b in zip(pi, pj))
                        acc = acc + ci * cj * self.model.cov(lag, "extended")
                scale = eps ** -(self.rows[i].power + self.rows[j].power)
                out[i, j] = out[j, i] = float(acc * scale)
        return out


@dataclass(frozen=True)
class Lemma1Step:
    epsilon: float
    max_abs_deviation: float
    min_eigenvalue: float
    matrix: Optional[np.ndarray]
    error: str = ""


@dataclass(frozen=True)
class Lemma1Report:
    instance: str
    steps: tuple
    verdict: str  # "converged" or "not converged"

    @property
    def final(self) -> Lemma1Step:
        ok = [s for s in self.steps if s.matrix is not None]
        return ok[-1] if ok else self.steps[-1]


def verify_lemma1(instance: Lemma1Instance, epsilons: Optional[Sequence[float]] = None) -> Lemma1Report:
    """Covariances along a decreasing eps grid and their distance to the target.

    The verdict is ``converged`` when the largest entrywise deviation at the
    smallest eps that could be evaluated is below the instance tolerance.
    """
    grid = tuple(instance.epsilons if epsilons is None else epsilons)
    if not grid or any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("epsilon grid must be non-empty and strictly decreasing")
    steps = []
    for eps in grid:
        try:
            m = instance.covariance(eps)
        except (ArithmeticError, NotImplementedError, ValueError) as exc:
            steps.append(Lemma1Step(float(eps), math.nan, math.nan, None, str(exc)))
            continue
        dev = float(np.max(np.abs(m - instance.target)))
        lam = float(np.min(np.linalg.eigvalsh(m)))
        steps.append(Lemma1Step(float(eps), dev, lam, m))
    final = [s for s in steps if s.matrix is not None]
    ok = bool(final) and final[-1].max_abs_deviation < instance.tolerance
    return Lemma1Report(instance.id, tuple(steps), "converged" if ok else "not converged")

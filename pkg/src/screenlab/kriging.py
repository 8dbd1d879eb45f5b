"""Simple and ordinary kriging of ``Z(0)`` or a directional derivative at 0.

The solver factors the augmented covariance matrix

    [[G, k], [k^T, v]]

(observations first, predictand last) as ``L D L^T`` with diagonal pivoting
among the observations.  The last pivot is then the kriging variance
``v - k^T G^{-1} k`` computed without forming ``G^{-1}``, and the ratio of the
largest to the smallest pivot serves as the condition estimate.  Because the
kriging variance itself is the smallest pivot, the estimate bounds the
relative accuracy of the returned mse, which is what matters here.

Arithmetic is generic: the same factorisation runs on floats or on
:class:`~screenlab.specfun.ExtendedReal`.  Under the ``auto`` policy a native
solve whose condition estimate exceeds :data:`NATIVE_CONDITION_LIMIT` is
repeated in double-double; a double-double solve above
:data:`EXTENDED_CONDITION_LIMIT` raises :class:`SingularGramError`.
No nugget is ever added unless requested explicitly.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import CovarianceModel, ExtendedOps, NativeOps, kernel_derivative
from .specfun import ExtendedReal, ext

__all__ = [
    "DerivativeConsistency",
    "DuplicateSiteError",
    "EXTENDED_CONDITION_LIMIT",
    "GeometryError",
    "KrigingError",
    "KrigingSolution",
    "NATIVE_CONDITION_LIMIT",
    "SingularGramError",
    "SiteConfiguration",
    "Target",
    "ScreeningResult",
    "derivative_consistency",
    "gram_matrix",
    "ordinary_krige",
    "resolve_precision",
    "screening",
    "screening_ratio",
    "simple_krige",
    "spd_solve",
]

NATIVE_CONDITION_LIMIT = 1e8
EXTENDED_CONDITION_LIMIT = 1e24
PRECISIONS = ("auto", "native", "extended")


class KrigingError(ArithmeticError):
    """Base class for solver failures."""


class SingularGramError(KrigingError):
    def __init__(self, message, condition=math.inf):
        super().__init__(f"{message} (condition estimate {condition:.3g})")
        self.condition = condition


class DuplicateSiteError(KrigingError, ValueError):
    pass


class GeometryError(ValueError):
    """Invalid site configuration or an epsilon at which sites collide."""


def resolve_precision(precision=None):
    """Precision policy from the argument, else ``$KRIGE_PRECISION``, else ``auto``."""
    if precision is None:
        precision = os.environ.get("KRIGE_PRECISION", "auto").strip().lower() or "auto"
    if precision not in PRECISIONS:
        raise ValueError(f"precision must be one of {PRECISIONS}, got {precision!r}")
    return precision


# -- targets and sites ----------------------------------------------------


@dataclass(frozen=True)
class Target:
    """Predictand at the origin: ``Z(0)`` or ``D_u Z(0)``."""

    kind: str = "value"
    direction: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("value", "derivative"):
            raise ValueError("target kind must be 'value' or 'derivative'")
        if self.kind == "derivative":
            if self.direction is None:
                raise ValueError("derivative target needs a direction")
            u = tuple(float(c) for c in np.atleast_1d(self.direction))
            n = math.sqrt(sum(c * c for c in u))
            object.__setattr__(self, "direction", tuple(c / n for c in u))

    @classmethod
    def derivative(cls, direction):
        return cls("derivative", tuple(np.atleast_1d(direction).tolist()))


VALUE = Target()


def _point(p, dim=None):
    if isinstance(p, (int, float, ExtendedReal)):
        pt = (p,)
    else:
        pt = tuple(p)
    if dim is not None and len(pt) != dim:
        raise GeometryError(f"point {p!r} does not have {dim} coordinates")
    return tuple(ext(c) for c in pt)


def _key(pt):
    return tuple((c.hi, c.lo) for c in pt)


@dataclass(frozen=True)
class SiteConfiguration:
    """Near offsets ``x_j`` and far offsets ``y_j`` around the anchor ``y0``.

    ``materialize(eps)`` gives ``N = {eps x_j}`` and ``F = {y0 + eps y_j}``
    with coordinates in double-double, so that lags such as
    ``(y0 + eps y1) - (y0 + eps y2)`` are exact for any eps.
    """

    near_offsets: tuple
    far_anchor: tuple
    far_offsets: tuple = ()
    dim: int = 1

    def __post_init__(self):
        d = self.dim
        near = tuple(tuple(float(c) for c in (p if not np.isscalar(p) else (p,))) for p in self.near_offsets)
        far = tuple(tuple(float(c) for c in (p if not np.isscalar(p) else (p,))) for p in self.far_offsets)
        anchor = self.far_anchor
        anchor = tuple(float(c) for c in ((anchor,) if np.isscalar(anchor) else anchor))
        for p in near + far + (anchor,):
            if len(p) != d:
                raise GeometryError(f"point {p} does not have {d} coordinates")
        if any(all(c == 0.0 for c in p) for p in near):
            raise GeometryError("near offsets must be nonzero")
        if len(set(near)) != len(near):
            raise GeometryError("near offsets must be distinct")
        if len(set(far)) != len(far):
            raise GeometryError("far offsets must be distinct")
        if far and all(c == 0.0 for c in anchor):
            raise GeometryError("far anchor must be nonzero")
        object.__setattr__(self, "near_offsets", near)
        object.__setattr__(self, "far_offsets", far)
        object.__setattr__(self, "far_anchor", anchor)

    def materialize(self, eps):
        """Return ``(near_sites, far_sites)`` at scale ``eps``.

        Raises
        ------
        GeometryError
            If ``eps <= 0`` or two sites coincide at this eps.
        """
        if not eps > 0:
            raise GeometryError("eps must be positive")
        e = ext(eps)
        near = [tuple(e * c for c in p) for p in self.near_offsets]
        anchor = [ext(c) for c in self.far_anchor]
        far = [tuple(a + e * c for a, c in zip(anchor, p)) for p in self.far_offsets]
        keys = [_key(p) for p in near + far]
        if len(set(keys)) != len(keys):
            raise GeometryError(f"sites collide at eps = {eps!r}")
        if any(all(c.hi == 0.0 for c in p) for p in near + far):
            raise GeometryError(f"a site coincides with the origin at eps = {eps!r}")
        return near, far

    def to_dict(self):
        return {
            "near_offsets": [list(p) for p in self.near_offsets],
            "far_anchor": list(self.far_anchor),
            "far_offsets": [list(p) for p in self.far_offsets],
            "dim": self.dim,
        }

    @classmethod
    def from_dict(cls, data: dict):
        """Inverse of :meth:`to_dict`; unknown keys raise ``GeometryError``."""
        allowed = {"near_offsets", "far_anchor", "far_offsets", "dim"}
        extra = set(data) - allowed
        if extra:
            raise GeometryError(f"unknown site keys {sorted(extra)}")
        if "near_offsets" not in data or "far_anchor" not in data:
            raise GeometryError("site configuration needs near_offsets and far_anchor")
        return cls(
            tuple(data["near_offsets"]),
            data["far_anchor"],
            tuple(data.get("far_offsets", ())),
            int(data.get("dim", 1)),
        )


# -- covariance assembly --------------------------------------------------


class _CovTable:
    """Memoised covariances between sites and the predictand."""

    def __init__(self, model: CovarianceModel, ops, target: Target):
        if not model.has_kernel:
            raise KrigingError(f"{model.family} has no closed-form kernel; kriging needs K")
        self.model = model
        self.ops = ops
        self.target = target
        self.precision = ops.name
        self._cache = {}

    def _k(self, lag):
        key = _key(lag)
        v = self._cache.get(key)
        if v is None:
            neg = _key(tuple(-c for c in lag))
            v = self._cache.get(neg)
        if v is None:
            if self.ops is NativeOps:
                v = self.model.cov(tuple(float(c) for c in lag), "native")
            else:
                v = self.model.cov(lag, "extended")
            self._cache[key] = v
        return v

    def site_site(self, a, b):
        return self._k(tuple(x - y for x, y in zip(a, b)))

    def site_target(self, s):
        if self.target.kind == "value":
            return self._k(s)
        # cov(Z(s), D_u Z(0)) = -D_u K(s)
        lag = s if self.ops is ExtendedOps else tuple(float(c) for c in s)
        return -kernel_derivative(self.model, lag, self.target.direction, 1, precision=self.precision).value

    def target_var(self):
        dim = self.model.dim
        zero = tuple(self.ops.num(0.0) for _ in range(dim))
        if self.target.kind == "value":
            return self._k(tuple(ext(0.0) for _ in range(dim)))
        # Var D_u Z(0) = -D_u^2 K(0)
        return -kernel_derivative(self.model, zero, self.target.direction, 2, precision=self.precision).value


def _augmented(table: _CovTable, sites, nugget=0.0):
    n = len(sites)
    m = n + 1
    a = [[None] * m for _ in range(m)]
    for i in range(n):
        for j in range(i + 1):
            v = table.site_site(sites[i], sites[j])
            if i == j and nugget:
                v = v + nugget
            a[i][j] = a[j][i] = v
        a[i][n] = a[n][i] = table.site_target(sites[i])
    a[n][n] = table.target_var()
    return a


def _check_distinct(sites):
    keys = [_key(s) for s in sites]
    if len(set(keys)) != len(keys):
        raise DuplicateSiteError("duplicate sites")


def gram_matrix(model: CovarianceModel, sites, precision="native"):
    """Matrix of ``K(s_i - s_j)``.

    Returns a float ``ndarray`` for ``precision="native"`` and a list of
    lists of :class:`ExtendedReal` for ``"extended"``.
    """
    pts = [_point(s, model.dim) for s in sites]
    _check_distinct(pts)
    ops = ExtendedOps if precision == "extended" else NativeOps
    table = _CovTable(model, ops, VALUE)
    n = len(pts)
    g = [[table.site_site(pts[i], pts[j]) for j in range(n)] for i in range(n)]
    if ops is NativeOps:
        return np.array(g, dtype=float)
    return g


# -- factorisation --------------------------------------------------------


class _Factor:
    """``P A P^T = L D L^T`` with pivoting restricted to the first ``n`` indices."""

    def __init__(self, a, n):
        m = len(a)
        a = [row[:] for row in a]
        perm = list(range(m))
        lo = [[None] * m for _ in range(m)]
        d = []
        for k in range(m):
            if k < n:
                j = max(range(k, n), key=lambda i: a[i][i])
                if j != k:
                    a[k], a[j] = a[j], a[k]
                    for row in a:
                        row[k], row[j] = row[j], row[k]
                    perm[k], perm[j] = perm[j], perm[k]
                    lo[k], lo[j] = lo[j], lo[k]
            piv = a[k][k]
            if k < n and not piv > 0:
                raise SingularGramError("covariance matrix is not numerically positive definite")
            d.append(piv)
            if k == m - 1 or not piv > 0:
                break
            col = [a[i][k] for i in range(m)]
            for i in range(k + 1, m):
                lo[i][k] = col[i] / piv
            for i in range(k + 1, m):
                lik = lo[i][k]
                for j in range(k + 1, i + 1):
                    a[i][j] = a[i][j] - lik * col[j]
                    a[j][i] = a[i][j]
        self.n = n
        self.perm = perm
        self.lower = lo
        self.d = d

    def solve_last_column(self):
        """Weights ``G^{-1} k`` from the last row of L (original ordering)."""
        n = self.n
        r = self.lower[n]
        w = [None] * n
        for i in range(n - 1, -1, -1):
            s = r[i]
            for j in range(i + 1, n):
                s = s - self.lower[j][i] * w[j]
            w[i] = s
        out = [None] * n
        for i in range(n):
            out[self.perm[i]] = w[i]
        return out


def spd_solve(a, rhs):
    """Solve ``A X = B`` for symmetric positive definite ``A`` in generic arithmetic.

    ``a`` is a list of rows and ``rhs`` a list of right-hand-side columns;
    entries may be floats or ExtendedReal.  Returns ``(columns, pivots)``.
    """
    n = len(a)
    f = _Factor(a, n)
    lo, d, perm = f.lower, f.d, f.perm
    out = []
    for b in rhs:
        y = [b[perm[i]] for i in range(n)]
        for i in range(n):
            for j in range(i):
                y[i] = y[i] - lo[i][j] * y[j]
        for i in range(n):
            y[i] = y[i] / d[i]
        for i in range(n - 1, -1, -1):
            for j in range(i + 1, n):
                y[i] = y[i] - lo[j][i] * y[j]
        x = [None] * n
        for i in range(n):
            x[perm[i]] = y[i]
        out.append(x)
    return out, d


def _condition(d):
    vals = [abs(float(x)) for x in d]
    top = max(vals)
    low = min(vals)
    if low == 0.0:
        return math.inf
    return top / low


@dataclass(frozen=True)
class KrigingSolution:
    """Result of a kriging solve.

    Attributes
    ----------
    weights : ndarray
        Weights on the sites, in input order.
    mse : float
        Error variance of the predictor.
    predictand : Target
    condition_estimate : float
        Largest over smallest pivot of the augmented covariance matrix.
    precision_regime : {"native", "extended"}
    mean_model : {"known-zero", "unknown-constant"}
    """

    weights: np.ndarray
    mse: float
    predictand: Target
    condition_estimate: float
    precision_regime: str
    mean_model: str
    sites: tuple = ()
    mse_exact: object = None


def _solve(a, n, precision_regime):
    f = _Factor(a, n)
    last = f.d[-1] if len(f.d) == n + 1 else f.d[-1]
    cond = _condition(f.d)
    if float(last) < 0.0:
        cond = math.inf
    weights = f.solve_last_column() if n and len(f.d) == n + 1 else [0.0] * n
    return f, weights, last, cond


def _solve_policy(build, n, precision, gram_only_check=False):
    """Run ``build(ops)`` and factor under the precision policy."""
    policy = resolve_precision(precision)
    if policy in ("auto", "native"):
        a = build(NativeOps)
        try:
            f, w, last, cond = _solve(a, n, "native")
            if policy == "native" or cond <= NATIVE_CONDITION_LIMIT:
                if float(last) < 0.0 and policy == "native":
                    raise SingularGramError("negative kriging variance in native precision", cond)
                return w, last, cond, "native"
        except SingularGramError:
            if policy == "native":
                raise
    a = build(ExtendedOps)
    f, w, last, cond = _solve(a, n, "extended")
    if cond > EXTENDED_CONDITION_LIMIT:
        raise SingularGramError("covariance matrix too ill-conditioned even in extended precision", cond)
    return w, last, cond, "extended"


def _as_sites(model, sites):
    pts = [_point(s, model.dim) for s in sites]
    _check_distinct(pts)
    return pts


def simple_krige(model: CovarianceModel, sites, target: Target = VALUE, precision=None, nugget=0.0) -> KrigingSolution:
    """Best linear predictor of the target from ``Z(sites)`` with known zero mean.

    Parameters
    ----------
    model : CovarianceModel
    sites : sequence of points
    target : Target
        ``Target()`` for ``Z(0)``, ``Target.derivative(u)`` for ``D_u Z(0)``.
    precision : {"auto", "native", "extended"}, optional
        Defaults to ``$KRIGE_PRECISION`` or ``auto``.
    nugget : float
        Explicit diagonal addition; zero unless requested.

    Raises
    ------
    SingularGramError
    """
    pts = _as_sites(model, sites)
    n = len(pts)
    if n == 0:
        var = _CovTable(model, NativeOps, target).target_var()
        return KrigingSolution(np.zeros(0), float(var), target, 1.0, "native", "known-zero", (), var)

    def build(ops):
        return _augmented(_CovTable(model, ops, target), pts, nugget)

    w, last, cond, regime = _solve_policy(build, n, precision)
    mse = max(float(last), 0.0)
    return KrigingSolution(
        np.array([float(x) for x in w]), mse, target, cond, regime, "known-zero", tuple(pts), last
    )


def ordinary_krige(model: CovarianceModel, sites, target: Target = VALUE, precision=None, nugget=0.0) -> KrigingSolution:
    """Best linear unbiased predictor of ``Z(0)`` under an unknown constant mean.

    The constraint ``sum(w) = 1`` is built in by writing the predictor as
    ``Z(s_0) + sum_j w_j (Z(s_j) - Z(s_0))``, with ``s_0`` the site closest to
    the origin, and simple-kriging ``Z(0) - Z(s_0)`` from the increments.
    """
    if target.kind != "value":
        raise ValueError("ordinary kriging is provided for the value target only")
    pts = _as_sites(model, sites)
    n = len(pts)
    if n == 0:
        raise ValueError("ordinary kriging needs at least one site")
    i0 = min(range(n), key=lambda i: (sum(float(c) ** 2 for c in pts[i]), i))
    s0 = pts[i0]
    others = [p for i, p in enumerate(pts) if i != i0]
    origin = tuple(ext(0.0) for _ in s0)

    def build(ops):
        t = _CovTable(model, ops, VALUE)
        k0 = t.site_site(origin, origin)
        c0 = t.site_site(s0, origin)
        m = len(others)

        def inc(a, b):
            # cov(Z(a) - Z(s0), Z(b) - Z(s0))
            return t.site_site(a, b) - t.site_site(a, s0) - t.site_site(s0, b) + k0

        a = [[None] * (m + 1) for _ in range(m + 1)]
        for i in range(m):
            for j in range(i + 1):
                v = inc(others[i], others[j])
                if i == j and nugget:
                    v = v + 2.0 * nugget
                a[i][j] = a[j][i] = v
            a[i][m] = a[m][i] = inc(others[i], origin)
        a[m][m] = 2.0 * (k0 - c0) + (nugget if nugget else 0.0)
        return a

    w, last, cond, regime = _solve_policy(build, n - 1, precision)
    w_full = [None] * n
    j = 0
    total = ext(0.0)
    for i in range(n):
        if i == i0:
            continue
        w_full[i] = w[j]
        total = total + w[j]
        j += 1
    w_full[i0] = 1.0 - total
    mse = max(float(last), 0.0)
    return KrigingSolution(
        np.array([float(x) for x in w_full]), mse, VALUE, cond, regime, "unknown-constant", tuple(pts), last
    )


_MEAN_MODELS = {
    "simple": simple_krige,
    "known-zero": simple_krige,
    "ordinary": ordinary_krige,
    "unknown-constant": ordinary_krige,
}


def _krige_fn(mean_model):
    try:
        return _MEAN_MODELS[mean_model]
    except KeyError:
        raise ValueError(f"unknown mean model {mean_model!r}") from None


@dataclass(frozen=True)
class ScreeningResult:
    epsilon: float
    mse_near: float
    mse_full: float
    ratio: float
    condition: float
    precision: str


def screening(model: CovarianceModel, config: SiteConfiguration, eps, mean_model="simple", precision=None) -> ScreeningResult:
    """Near-only and near-plus-far kriging variances at scale ``eps``."""
    near, far = config.materialize(eps)
    krige = _krige_fn(mean_model)
    sn = krige(model, near, precision=precision)
    if not far:
        return ScreeningResult(float(eps), sn.mse, sn.mse, 1.0, sn.condition_estimate, sn.precision_regime)
    sf = krige(model, near + far, precision=precision)
    if sn.mse <= 0.0:
        raise SingularGramError("near-set kriging variance vanished", sn.condition_estimate)
    ratio = float(ext(sf.mse_exact) / ext(sn.mse_exact)) if sf.mse > 0 else 0.0
    regime = "extended" if "extended" in (sn.precision_regime, sf.precision_regime) else "native"
    cond = max(sn.condition_estimate, sf.condition_estimate)
    return ScreeningResult(float(eps), sn.mse, sf.mse, ratio, cond, regime)


def screening_ratio(model: CovarianceModel, config: SiteConfiguration, eps, mean_model="simple", precision=None) -> float:
    """``mse(N_eps u F_eps) / mse(N_eps)``; 1 when the far set is empty."""
    return screening(model, config, eps, mean_model, precision).ratio


@dataclass(frozen=True)
class DerivativeConsistency:
    epsilons: tuple
    mse: tuple
    variance: float
    verdict: str  # "consistent", "not consistent" or "not differentiable"


def derivative_consistency(
    model: CovarianceModel,
    config: SiteConfiguration,
    direction,
    eps_grid: Sequence[float],
    threshold=1e-2,
    precision=None,
) -> DerivativeConsistency:
    """Error variances of the BLP of ``D_u Z(0)`` from ``Z(N_eps)`` along the grid.

    The verdict is ``consistent`` when the relative error variance at the
    smallest eps is below ``threshold`` and decreased over the last three grid
    points.
    """
    u = tuple(float(c) for c in np.atleast_1d(direction))
    rate = model.mse_rate(u)
    if rate.known and not rate.differentiable:
        return DerivativeConsistency(tuple(float(e) for e in eps_grid), (), math.nan, "not differentiable")
    target = Target.derivative(u)
    var = float(_CovTable(model, NativeOps, target).target_var())
    out = []
    for e in eps_grid:
        near, _ = config.materialize(e)
        out.append(simple_krige(model, near, target, precision=precision).mse)
    rel = [m / var for m in out]
    tail = rel[-3:]
    decreasing = all(b <= a * (1 + 1e-9) for a, b in zip(tail, tail[1:]))
    verdict = "consistent" if rel and rel[-1] < threshold and decreasing else "not consistent"
    return DerivativeConsistency(tuple(float(e) for e in eps_grid), tuple(out), var, verdict)

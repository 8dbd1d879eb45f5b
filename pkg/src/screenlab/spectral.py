"""Frequency-domain view of kriging errors.

A linear combination ``sum_j c_j Z(s_j)`` corresponds to the trigonometric
polynomial ``g(w) = sum_j c_j exp(i w.s_j)`` and its variance is
``int |g|^2 f``.  This module evaluates such integrals, the share of a
kriging error carried by a ball of low frequencies, a numerical profile of
the slow-variation condition ``sup_{|v|<R} |f(w+v)/f(w) - 1| -> 0`` and
covariances of spectrally defined models.

Integration strategy.  On a finite range ``[0, W]`` the integrand is handled
by :func:`screenlab.quadrature.gauss_kronrod` with panels aligned to the
oscillation period of the polynomial.  Beyond ``W`` it is expanded as
``sum_k a_k cos(w lambda_k) env(w)`` and each term is integrated with
QUADPACK's Fourier-integral routine (QAWF, via ``scipy.integrate.quad``).
Two-dimensional integrals use polar coordinates, an outer adaptive
integral over the angle and the one-dimensional machinery along rays.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy import integrate, special

from .kernels import CovarianceModel, DoublyMatern, ExtendedOps, NativeOps
from .kriging import (
    KrigingSolution,
    SiteConfiguration,
    _CovTable,
    VALUE,
    resolve_precision,
    screening,
    simple_krige,
    spd_solve,
)
from .quadrature import QuadratureError, QuadResult, gauss_kronrod
from .specfun import ext

__all__ = [
    "FcondProfile",
    "FrequencyBand",
    "QuadResult",
    "QuadratureError",
    "ResidualCorrelation",
    "TrigPolynomial",
    "band_fraction",
    "band_fraction_estimate",
    "cov_from_spectrum",
    "covariance_quadratic_form",
    "fcond_profile",
    "residual_correlation",
    "spectral_mse",
]


# -- trigonometric polynomials ----------------------------------------------


@dataclass(frozen=True)
class TrigPolynomial:
    """``g(w) = sum_j c_j exp(i w.s_j)`` with nodes ``s_j`` in R^d."""

    nodes: np.ndarray
    coefficients: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        if nodes.ndim == 1:
            nodes = nodes[:, None]
        coeffs = np.asarray(self.coefficients, dtype=complex).ravel()
        if nodes.shape[0] != coeffs.shape[0]:
            raise ValueError("need one coefficient per node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def dim(self):
        return self.nodes.shape[1]

    @property
    def is_real(self):
        return bool(np.all(self.coefficients.imag == 0.0))

    @classmethod
    def residual(cls, solution: KrigingSolution):
        """Polynomial of ``Z(0) - sum_j w_j Z(s_j)`` (coefficient 1 at node 0)."""
        if solution.predictand.kind != "value":
            raise ValueError("residual polynomials are defined for the value target")
        sites = np.array([[float(c) for c in s] for s in solution.sites], dtype=float)
        d = sites.shape[1] if sites.size else 1
        nodes = np.vstack([np.zeros((1, d)), sites.reshape(-1, d)])
        coeffs = np.concatenate([[1.0], -np.asarray(solution.weights, dtype=float)])
        return cls(nodes, coeffs)

    def __call__(self, w):
        """Evaluate at frequencies ``w`` of shape ``(N, d)`` (or ``(N,)`` in 1-D).

        A single frequency (a scalar in 1-D, a length-d vector otherwise)
        gives a complex scalar.
        """
        w = np.asarray(w, dtype=float)
        single = w.ndim == 0 or (w.ndim == 1 and self.dim > 1 and w.size == self.dim)
        w = w.reshape(-1, self.dim)
        out = _eval_projected(w @ self.nodes.T, self.coefficients)
        return complex(out[0]) if single else out


def _eval_projected(theta, coeffs):
    """``sum_j c_j exp(i theta_j)`` written as ``sum c_j (e^{i theta_j} - 1) + sum c_j``.

    The form keeps full relative accuracy near w = 0 when ``sum c_j`` is small,
    as it is for kriging residuals.
    """
    s = np.sin(0.5 * theta)
    em1 = -2.0 * s * s + 1j * np.sin(theta)
    return em1 @ coeffs + complex(math.fsum(coeffs.real), math.fsum(coeffs.imag))


@dataclass(frozen=True)
class FrequencyBand:
    """Ball ``b(radius)`` about the origin."""

    radius: float

    def __post_init__(self):
        r = float(self.radius)
        if not (math.isfinite(r) and r > 0):
            raise ValueError("band radius must be finite and positive")


# -- one-dimensional ray integrals -------------------------------------------


def _pair_terms(proj, coeffs):
    """Collect ``|g(r)|^2 + |g(-r)|^2 = sum_k a_k cos(r lambda_k)``."""
    terms = {}
    n = len(proj)
    for j in range(n):
        for k in range(n):
            lam = abs(proj[j] - proj[k])
            a = 2.0 * (coeffs[j] * np.conj(coeffs[k])).real
            key = float(lam)
            terms[key] = terms.get(key, 0.0) + a
    return terms


def _breakpoints(upper, period_scale, max_panels=1 << 16):
    geo = np.geomspace(1e-3, upper, 40) if upper > 1e-3 else np.array([])
    if period_scale > 0:
        step = 2.0 * math.pi / period_scale
        count = upper / step
        if count > max_panels:
            step = upper / max_panels
        grid = np.arange(0.0, upper, step)
    else:
        grid = np.array([0.0])
    return np.unique(np.concatenate([[0.0, upper], geo, grid]))


def _quad(*args, **kw):
    """``scipy.integrate.quad`` that turns QUADPACK warnings into errors.

    QUADPACK warns when it cannot improve an estimate that is already below
    the absolute tolerance; such results are accepted.
    """
    epsabs = kw.get("epsabs", 1.49e-8)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(*args, **kw)[:2]
    if caught and not (abs(val) <= 100.0 * epsabs or err <= 100.0 * epsabs):
        raise QuadratureError(f"QUADPACK failed: {caught[0].message} (estimate {val:.6g}, error {err:.3g})")
    return val, err


def _qawf(env, start, lam, epsabs):
    if lam == 0.0:
        return _quad(env, start, np.inf, epsabs=epsabs, epsrel=1e-12, limit=500)
    return _quad(env, start, np.inf, weight="cos", wvar=lam, epsabs=epsabs, limlst=200, limit=500)


def _ray_integral(proj, coeffs, density, upper, tail=None, w_min_scale=None, rtol=1e-10):
    """``int_0^upper [|g(r)|^2 + |g(-r)|^2] density(r) dr`` for a projected polynomial.

    ``tail = (parts, env)`` adds the part beyond ``upper`` (``upper`` finite)
    via Fourier integrals, with ``density(r) = env(r) * sum a cos(r shift)``.
    """
    proj = np.asarray(proj, dtype=float)
    coeffs = np.asarray(coeffs, dtype=complex)
    diffs = np.abs(proj[:, None] - proj[None, :])
    dmax = float(diffs.max()) if diffs.size else 0.0

    def integrand(r):
        theta = np.outer(r, proj)
        gp = _eval_projected(theta, coeffs)
        gm = _eval_projected(-theta, coeffs)
        return (np.abs(gp) ** 2 + np.abs(gm) ** 2) * density(r)

    main = gauss_kronrod(integrand, _breakpoints(upper, dmax), rtol=rtol, atol=1e-300)
    if tail is None:
        return main
    parts, env = tail
    terms = _pair_terms(proj, coeffs)
    scale = float(np.sum(np.abs(coeffs)) ** 2)
    epsabs = 1e-15 * max(scale, 1e-300)
    lam_terms = {}
    for lam, a in terms.items():
        for amp, shift in parts:
            for sgn in (1.0, -1.0):
                key = abs(lam + sgn * shift)
                lam_terms[key] = lam_terms.get(key, 0.0) + 0.5 * a * amp
    tail_val = []
    tail_err = 0.0
    for lam in sorted(lam_terms):
        a = lam_terms[lam]
        if a == 0.0:
            continue
        v, e = _qawf(env, upper, lam, epsabs)
        tail_val.append(a * v)
        tail_err += abs(a) * e
    return QuadResult(main.value + math.fsum(tail_val), main.error + tail_err)


def _min_separation(nodes):
    n = nodes.shape[0]
    best = math.inf
    for j in range(n):
        for k in range(j):
            d = float(np.linalg.norm(nodes[j] - nodes[k]))
            if 0.0 < d < best:
                best = d
    return best


def _cutoff(nodes, w0=64.0):
    sep = _min_separation(nodes)
    if not math.isfinite(sep):
        return w0
    return max(w0, 64.0 * 2.0 * math.pi / sep)


def _spectral_dim_check(model):
    if isinstance(model, DoublyMatern) and model.d1 != 1:
        raise ValueError("planar spectral integrals need a density on the (x, t) plane; use d1 = 1")
    if model.dim > 2:
        raise ValueError("spectral integrals are implemented for d <= 2")


def spectral_mse(poly: TrigPolynomial, model: CovarianceModel, rtol=None) -> QuadResult:
    """``int |poly|^2 f`` with an error estimate.

    ``rtol`` defaults to 1e-10 in one dimension and 1e-8 in two.

    Raises
    ------
    QuadratureError
        If the adaptive quadrature does not converge.
    """
    _spectral_dim_check(model)
    if poly.dim != model.dim:
        raise ValueError("polynomial and model dimensions differ")
    if poly.nodes.shape[0] == 0 or not np.any(poly.coefficients):
        return QuadResult(0.0, 0.0)
    upper = _cutoff(poly.nodes)
    if rtol is None:
        rtol = 1e-10 if model.dim == 1 else 1e-8
    if model.dim == 1:
        parts, env = model.spectral_tail_parts()
        return _ray_integral(
            poly.nodes[:, 0], poly.coefficients, lambda r: model.spec_array(r), upper, (parts, np.vectorize(env)), rtol=rtol
        )
    if model.spectral_decay <= 2.0:
        raise ValueError(
            f"{model.family}: density decays too slowly along some rays for polar integration"
        )

    def inner(theta):
        u = np.array([math.cos(theta), math.sin(theta)])
        proj = poly.nodes @ u

        def dens(r):
            return r * model.spec_array(np.outer(r, u))

        def env(r):
            return r * float(model._spec(np.array([[r * u[0], r * u[1]]]))[0])

        return _ray_integral(proj, poly.coefficients, dens, upper, (((1.0, 0.0),), env), rtol=rtol * 0.1)

    return _angular(inner, rtol, poly.nodes)


def _kink_angles(nodes):
    """Angles in (0, pi) where the ray integrand is not smooth.

    A node difference orthogonal to the ray makes a cosine frequency vanish,
    where the ray integral has a kink.  The axes are added for anisotropic
    densities.
    """
    pts = {0.5 * math.pi}
    n = nodes.shape[0]
    for j in range(n):
        for k in range(j):
            d = nodes[j] - nodes[k]
            if np.any(d):
                pts.add(round((math.atan2(d[1], d[0]) + 0.5 * math.pi) % math.pi, 15))
    return sorted(p for p in pts if 0.0 < p < math.pi)


def _angular(inner, rtol, nodes):
    errs = []

    def f(theta):
        res = inner(theta)
        errs.append(res.error)
        return res.value

    val, err = _quad(
        f, 0.0, math.pi, epsabs=0.0, epsrel=max(rtol, 1e-10), limit=200, points=_kink_angles(nodes)
    )
    return QuadResult(val, err + (max(errs) * math.pi if errs else 0.0))


def covariance_quadratic_form(poly: TrigPolynomial, model: CovarianceModel) -> float:
    """``sum_jk c_j conj(c_k) K(s_j - s_k)``, evaluated in double-double when possible."""
    nodes = poly.nodes
    c = poly.coefficients
    n = nodes.shape[0]
    if poly.is_real:
        cr = [float(x) for x in c.real]
        try:
            total = ext(0.0)
            for j in range(n):
                for k in range(n):
                    lag = tuple(ext(float(a)) - float(b) for a, b in zip(nodes[j], nodes[k]))
                    total = total + model.cov(lag, "extended") * (cr[j] * cr[k])
            return float(total)
        except NotImplementedError:
            pass
    total = 0.0 + 0.0j
    for j in range(n):
        for k in range(n):
            total += c[j] * np.conj(c[k]) * model.cov(tuple(nodes[j] - nodes[k]))
    return float(total.real)


def band_fraction_estimate(poly: TrigPolynomial, model: CovarianceModel, band, denominator=None, rtol=1e-9) -> QuadResult:
    """:func:`band_fraction` together with an absolute error estimate."""
    radius = band.radius if isinstance(band, FrequencyBand) else float(band)
    if radius == math.inf:
        return QuadResult(1.0, 0.0)
    FrequencyBand(radius)
    _spectral_dim_check(model)
    den_err = 0.0
    if denominator is None:
        if model.has_kernel:
            denominator = covariance_quadratic_form(poly, model)
        else:
            denominator, den_err = spectral_mse(poly, model)
    if denominator <= 0.0:
        return QuadResult(0.0, 0.0)
    if model.dim == 1:
        num = _ray_integral(poly.nodes[:, 0], poly.coefficients, lambda r: model.spec_array(r), radius, rtol=rtol)
    else:

        def inner(theta):
            u = np.array([math.cos(theta), math.sin(theta)])
            return _ray_integral(
                poly.nodes @ u, poly.coefficients, lambda r: r * model.spec_array(np.outer(r, u)), radius, rtol=rtol * 0.1
            )

        num = _angular(inner, rtol, poly.nodes)
    value = min(1.0, max(0.0, num.value / denominator))
    err = num.error / denominator + value * den_err / denominator
    return QuadResult(value, err)


def band_fraction(poly: TrigPolynomial, model: CovarianceModel, band, denominator=None, rtol=1e-9) -> float:
    """Share of ``||poly||_f^2`` carried by frequencies in the ball ``b(band.radius)``.

    The denominator is the covariance-domain quadratic form when the model has
    a closed-form kernel (exact), otherwise :func:`spectral_mse`.  A band of
    infinite radius is the whole space and gives 1.
    """
    return band_fraction_estimate(poly, model, band, denominator, rtol).value


# -- slow variation profile -------------------------------------------------


class FcondProfile(NamedTuple):
    omegas: np.ndarray
    values: np.ndarray
    verdict: str  # "consistent" or "violated"; a finite-range heuristic
    violations: tuple
    threshold: float
    errors: np.ndarray  # change in c when the ball grid is halved

    heuristic = True


def _ball_offsets(dim, radius, n_radial=8, n_angle=48):
    """Grid on the closed ball and a mask selecting a half-resolution subgrid."""
    if dim == 1:
        pts = np.linspace(-radius, radius, 401)[:, None]
        coarse = np.zeros(len(pts), dtype=bool)
        coarse[::2] = True
        return pts, coarse
    pts = [(0.0, 0.0)]
    coarse = [True]
    for i in range(1, n_radial + 1):
        r = radius * i / n_radial
        for j in range(n_angle):
            a = 2.0 * math.pi * j / n_angle
            pts.append((r * math.cos(a), r * math.sin(a)))
            coarse.append(i % 2 == 0 and j % 2 == 0)
    return np.array(pts), np.array(coarse)


def fcond_profile(
    model: CovarianceModel,
    R: float = 1.0,
    omegas: Optional[Sequence[float]] = None,
    directions=None,
    threshold: float = 0.05,
) -> FcondProfile:
    """``c(w) = sup_{|v|<R} |f(w + v)/f(w) - 1|`` along a geometric grid of ``|w|``.

    In two dimensions ``w`` runs along several rays (the axes, the diagonals and
    more) and ``c`` is the maximum over rays.  The verdict is ``consistent``
    when ``c`` at the largest frequency is below ``threshold`` and decreased
    monotonically over the last decade, otherwise ``violated``; frequencies
    whose ball contains a zero of ``f`` are listed as violations.  This is a
    finite-range heuristic for a limit statement, not a proof.
    """
    if not R > 0:
        raise ValueError("R must be positive")
    om = np.geomspace(1.0, 1e4, 41) if omegas is None else np.asarray(omegas, dtype=float)
    if om.ndim != 1 or om.size < 1 or np.any(np.diff(om) <= 0) or om[0] <= 0:
        raise ValueError("omega grid must be increasing")
    dim = model.spec_dim
    if directions is None:
        if dim == 1:
            directions = [(1.0,)]
        else:
            directions = [(math.cos(a), math.sin(a)) for a in np.linspace(0.0, math.pi, 12, endpoint=False)]
    dirs = np.array(directions, dtype=float).reshape(-1, dim)
    offsets, coarse = _ball_offsets(dim, R)
    values = np.zeros(om.size)
    coarse_values = np.zeros(om.size)
    violations = []
    for i, w in enumerate(om):
        worst = 0.0
        worst_coarse = 0.0
        vanishes = False
        for u in dirs:
            centre = w * u
            f0 = model.spec_array(centre[None, :])[0]
            if not f0 > 0.0:
                worst = worst_coarse = math.inf
                vanishes = True
                break
            ratio = model.spec_array(centre[None, :] + offsets) / f0
            dev = np.abs(ratio - 1.0)
            worst = max(worst, float(np.max(dev)))
            worst_coarse = max(worst_coarse, float(np.max(dev[coarse])))
            vanishes = vanishes or bool(np.min(ratio) <= 0.0)
        values[i] = worst
        coarse_values[i] = worst_coarse
        if dim == 1 and model.spectral_zeros(w - R, w + R):
            vanishes = True
        if vanishes or not math.isfinite(worst):
            violations.append(float(w))
    last = om >= om[-1] / 10.0
    tail = values[last]
    monotone = bool(np.all(np.diff(tail) <= 0.0))
    ok = not violations and monotone and values[-1] < threshold
    with np.errstate(invalid="ignore"):
        errors = np.where(np.isfinite(values), np.abs(values - coarse_values), math.nan)
    return FcondProfile(om, values, "consistent" if ok else "violated", tuple(violations), threshold, errors)


# -- covariance from the density ----------------------------------------------


def _radial_transform(fun, dim, x, epsabs):
    """``int_{R^dim} exp(i w.x) fun(|w|) dw`` for a radial function, |x| = x."""
    x = abs(float(x))
    if dim == 1:
        if x == 0.0:
            v, e = _quad(fun, 0.0, np.inf, epsabs=epsabs, epsrel=1e-11, limit=500)
        else:
            v, e = _quad(fun, 0.0, np.inf, weight="cos", wvar=x, epsabs=epsabs, limlst=200, limit=500)
        return 2.0 * v, 2.0 * e
    surface = 2.0 * math.pi ** (0.5 * dim) / math.gamma(0.5 * dim)
    if x == 0.0:
        v, e = _quad(lambda r: r ** (dim - 1) * fun(r), 0.0, np.inf, epsabs=epsabs, epsrel=1e-11, limit=500)
        return surface * v, surface * e
    if dim == 3:
        # sin(r x) / (r x) kernel
        v, e = _quad(lambda r: r * fun(r), 0.0, np.inf, weight="sin", wvar=x, epsabs=epsabs, limlst=200, limit=500)
        return surface * v / x, surface * e / x
    nu = 0.5 * dim - 1.0
    g = math.gamma(0.5 * dim)

    def integrand(r):
        z = r * x
        return r ** (dim - 1) * fun(r) * g * (2.0 / z) ** nu * special.jv(nu, z) if z > 0 else r ** (dim - 1) * fun(r)

    v, e = _quad(integrand, 0.0, np.inf, epsabs=epsabs, epsrel=1e-11, limit=2000)
    return surface * v, surface * e


def cov_from_spectrum(model: CovarianceModel, lag, epsabs=1e-11) -> QuadResult:
    """``K(lag) = int exp(i w.lag) f(w) dw`` by oscillatory quadrature.

    One-dimensional models are transformed directly.  Planar models with a
    density that is even in each coordinate use nested Fourier integrals.
    For :class:`DoublyMatern` the density lives on R^d1 x R^d2 and ``lag`` is
    ``(|x|, |t|)``; each factor is reduced to a radial (Hankel-type) integral.
    """
    if isinstance(model, DoublyMatern):
        x, t = (abs(float(c)) for c in lag)

        def inner(w2):
            val, err = _radial_transform(lambda r: model.spec((r, w2)), model.d1, x, epsabs * 1e-2)
            errs.append(err)
            return val

        errs = []
        val, err = _radial_transform(inner, model.d2, t, epsabs)
        return QuadResult(val, err + (max(errs) if errs else 0.0) * 10.0)
    if model.dim == 1:
        x = abs(float(lag if np.isscalar(lag) else lag[0]))
        parts, env = model.spectral_tail_parts()
        if len(parts) == 1:
            v, e = _radial_transform(lambda w: model.spec(w), 1, x, epsabs)
            return QuadResult(v, e)
        # oscillating density: finite part plus Fourier tails of each component
        upper = 64.0 * 2.0 * math.pi * (1.0 + x)
        bp = _breakpoints(upper, max(x, 1.0))
        main = gauss_kronrod(lambda w: np.cos(w * x) * model.spec_array(w), bp, rtol=1e-12, atol=1e-300)
        total = main.value
        err = main.error
        for amp, shift in parts:
            for sgn in (1.0, -1.0):
                v, e = _qawf(env, upper, abs(x + sgn * shift), epsabs)
                total += 0.5 * amp * v
                err += 0.5 * abs(amp) * e
        return QuadResult(2.0 * total, 2.0 * err)
    if model.dim == 2:
        x, t = (abs(float(c)) for c in lag)
        errs = []

        def inner(w2):
            f = lambda w1: model.spec((w1, w2))  # noqa: E731
            val, err = _radial_transform(f, 1, x, epsabs * 1e-2)
            errs.append(err)
            return val

        val, err = _radial_transform(inner, 1, t, epsabs)
        return QuadResult(val, err + (max(errs) if errs else 0.0) * 10.0)
    raise ValueError("cov_from_spectrum supports d <= 2")


# -- residual decorrelation -------------------------------------------------


class ResidualCorrelation(NamedTuple):
    value: float  # canonical correlation of e(N) with Z(F) given Z(N)
    via_ratio: float  # sqrt(1 - screening ratio)
    far_only: float  # sup over combinations of Z(F) alone


def residual_correlation(model: CovarianceModel, config: SiteConfiguration, eps, precision=None) -> ResidualCorrelation:
    """Largest correlation between the near-set residual ``e(N_eps)`` and the far data.

    ``value`` is the canonical correlation between ``e(N_eps)`` and
    ``Z(F_eps)`` after removing its projection on ``Z(N_eps)``; since
    ``e(N_eps)`` is orthogonal to ``Z(N_eps)`` this is the supremum of
    ``|corr(e, L.Z(F) + M.Z(N))|`` and equals ``sqrt(1 - ratio)``, which is
    returned as ``via_ratio`` from an independent kriging solve.  ``far_only``
    restricts the supremum to combinations of ``Z(F_eps)`` alone.
    """
    near, far = config.materialize(eps)
    scr = screening(model, config, eps, precision=precision)
    via_ratio = math.sqrt(max(0.0, 1.0 - scr.ratio))
    if not far:
        return ResidualCorrelation(0.0, via_ratio, 0.0)
    policy = resolve_precision(precision)
    ops = NativeOps if policy == "native" else ExtendedOps
    try:
        table = _CovTable(model, ops, VALUE)
        table.site_site(near[0], near[0])
    except NotImplementedError:
        ops = NativeOps
        table = _CovTable(model, ops, VALUE)
    origin = tuple(ext(0.0) for _ in near[0])
    gnn = [[table.site_site(a, b) for b in near] for a in near]
    gff = [[table.site_site(a, b) for b in far] for a in far]
    gnf = [[table.site_site(a, b) for b in far] for a in near]
    kn = [table.site_site(a, origin) for a in near]
    kf = [table.site_site(a, origin) for a in far]
    k0 = table.site_site(origin, origin)
    sols, _ = spd_solve(gnn, [kn] + [[gnf[i][j] for i in range(len(near))] for j in range(len(far))])
    w = sols[0]
    mse_n = k0 - sum((wi * ki for wi, ki in zip(w, kn)), ops.num(0.0))
    # cov(Z(F), e(N)) and the conditional covariance of Z(F) given Z(N)
    c = [kf[j] - sum((gnf[i][j] * w[i] for i in range(len(near))), ops.num(0.0)) for j in range(len(far))]
    cond = [
        [gff[a][b] - sum((gnf[i][a] * sols[1 + b][i] for i in range(len(near))), ops.num(0.0)) for b in range(len(far))]
        for a in range(len(far))
    ]
    (z,), _ = spd_solve(cond, [c])
    rho2 = sum((ci * zi for ci, zi in zip(c, z)), ops.num(0.0)) / mse_n
    (zf,), _ = spd_solve(gff, [c])
    far2 = sum((ci * zi for ci, zi in zip(c, zf)), ops.num(0.0)) / mse_n
    return ResidualCorrelation(
        math.sqrt(max(0.0, float(rho2))), via_ratio, math.sqrt(max(0.0, float(far2)))
    )

"""Stationary covariance models.

Every model exposes the covariance ``K`` (``eval_cov``), a spectral density
``f`` with ``K(x) = int exp(i w.x) f(w) dw`` (no 2*pi factor, ``eval_spec``),
directional derivatives of ``K`` and the small-lag behaviour of
``2 (K(0) - K(eps u))``.

Kernels are written once against a small scalar backend (:class:`NativeOps`
or :class:`ExtendedOps`) so the same code path produces double and
double-double values.  Kriging relies on the double-double path when the
Gram matrices become nearly singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import NamedTuple, Optional

import numpy as np

from .specfun import (
    DD_PI,
    DD_SQRT_PI,
    ExtendedReal,
    erfc,
    ext,
    ext_erfc,
    ext_erfcx,
    ext_exp,
    ext_log,
    ext_sqrt,
    ext_xnu_bessel_k,
    log_gamma,
    xnu_bessel_k,
)

__all__ = [
    "CovarianceModel",
    "DerivativeUnavailable",
    "DimensionError",
    "DoublyMatern",
    "Exponential",
    "ExtendedOps",
    "KernelDerivatives",
    "Matern",
    "MseRate",
    "NativeOps",
    "SpaceTime",
    "TensorExponential",
    "Triangular",
    "eval_cov",
    "eval_spec",
    "kernel_derivative",
    "kernel_derivatives",
    "model_from_spec",
    "small_lag_mse_rate",
]


class DimensionError(ValueError):
    """Lag or frequency has the wrong number of coordinates."""


class DerivativeUnavailable(ValueError):
    """The requested derivative does not exist or has no analytic form here."""


# -- scalar backends ------------------------------------------------------


class NativeOps:
    """Double precision backend."""

    name = "native"
    pi = math.pi
    sqrt_pi = math.sqrt(math.pi)

    @staticmethod
    def num(x):
        return float(x)

    exp = staticmethod(math.exp)
    sqrt = staticmethod(math.sqrt)
    log = staticmethod(math.log)

    @staticmethod
    def erfc(x):
        return erfc(x)

    @staticmethod
    def xnu_k(nu, x):
        return xnu_bessel_k(nu, x)

    @staticmethod
    def to_float(x):
        return float(x)


class ExtendedOps:
    """Double-double backend."""

    name = "extended"
    pi = DD_PI
    sqrt_pi = DD_SQRT_PI

    num = staticmethod(ext)
    exp = staticmethod(ext_exp)
    sqrt = staticmethod(ext_sqrt)
    log = staticmethod(ext_log)
    erfc = staticmethod(ext_erfc)

    @staticmethod
    def xnu_k(nu, x):
        return ext_xnu_bessel_k(nu, x)

    @staticmethod
    def to_float(x):
        return float(x)


def _backend(precision):
    if precision in ("native", None):
        return NativeOps
    if precision == "extended":
        return ExtendedOps
    raise ValueError(f"unknown precision {precision!r}")


class MseRate(NamedTuple):
    """``2 (K(0) - K(eps u)) ~ c eps**p (-log eps)**log``; ``p is None`` means unknown."""

    p: Optional[float]
    log: bool
    c: Optional[float]

    @property
    def known(self):
        return self.p is not None

    @property
    def differentiable(self):
        """Mean-square differentiable in the direction."""
        return self.p is not None and self.p >= 2.0 and not self.log


UNKNOWN_RATE = MseRate(None, False, None)


class KernelDerivatives(NamedTuple):
    first: float
    second: float
    source: str


class _Deriv(NamedTuple):
    value: object
    source: str


def _as_point(x, dim, what="lag"):
    if isinstance(x, (int, float, ExtendedReal)):
        pt = (x,)
    else:
        pt = tuple(x)
    if len(pt) != dim:
        raise DimensionError(f"{what} has {len(pt)} coordinates, model expects {dim}")
    return pt


def _norm(ops, pt):
    if len(pt) == 1:
        return abs(ops.num(pt[0]))
    s = ops.num(0.0)
    for c in pt:
        c = ops.num(c)
        s = s + c * c
    return ops.sqrt(s)


def _dot(a, b):
    return sum(float(x) * float(y) for x, y in zip(a, b))


# -- models ---------------------------------------------------------------


@dataclass(frozen=True)
class CovarianceModel:
    """Base class.  Subclasses are immutable parameter records."""

    family = "abstract"
    has_kernel = True

    # public API -----------------------------------------------------------
    def cov(self, lag, precision="native"):
        """Covariance at ``lag`` as a float (native) or ExtendedReal (extended)."""
        ops = _backend(precision)
        pt = _as_point(lag, self.dim)
        return self._cov(ops, pt)

    def spec(self, freq):
        pt = _as_point(freq, self.spec_dim, "frequency")
        return float(self.spec_array(np.array([[float(c) for c in pt]]))[0])

    def spec_array(self, w):
        """Density at the rows of an ``(N, spec_dim)`` array (or ``(N,)`` in 1-D)."""
        w = np.asarray(w, dtype=float)
        if w.ndim == 1:
            w = w[:, None]
        if w.shape[-1] != self.spec_dim:
            raise DimensionError(f"frequency has {w.shape[-1]} coordinates, model expects {self.spec_dim}")
        return self._spec(w)

    @property
    def variance(self):
        return float(self.cov((0.0,) * self.dim))

    @property
    def spec_dim(self):
        return self.dim

    def to_spec(self):
        out = {"family": self.family}
        back = {v: k for k, v in _RENAMES.items()}
        for f in fields(self):
            out[back.get(f.name, f.name)] = getattr(self, f.name)
        return out

    # hooks ---------------------------------------------------------------
    def _cov(self, ops, pt):  # pragma: no cover - abstract
        raise NotImplementedError

    def _spec(self, w):  # pragma: no cover - abstract
        """Vectorised density on an ``(N, spec_dim)`` array."""
        raise NotImplementedError

    def mse_rate(self, direction) -> MseRate:
        return UNKNOWN_RATE

    spectral_decay = 0.0

    def spectral_tail_parts(self):
        """Split ``f`` for |w| large as ``env(w) * sum_k a_k cos(w shift_k)``.

        Used by the spectral module for oscillatory tails of one-dimensional
        densities.  The default has a single non-oscillating part.
        """
        return ((1.0, 0.0),), self.spec

    def spectral_zeros(self, lo, hi):
        """Frequencies in ``[lo, hi]`` on the half line where a 1-D density vanishes."""
        return ()

    # derivatives ----------------------------------------------------------
    def _analytic_derivative(self, ops, pt, u, order):
        """Return the analytic directional derivative or raise DerivativeUnavailable."""
        raise DerivativeUnavailable(f"no analytic derivative for {self.family}")

    def _smooth_scale(self, pt, u):
        """Length over which K is smooth along u around pt; 0 on a non-smooth locus."""
        return 1.0


@dataclass(frozen=True)
class Exponential(CovarianceModel):
    """``K(x) = variance * exp(-alpha |x|)`` on R^dim."""

    variance_: float = 1.0
    alpha: float = 1.0
    dim: int = 1

    family = "exponential"

    def __post_init__(self):
        _check_positive(variance=self.variance_, alpha=self.alpha)
        _check_dim(self.dim)

    def _cov(self, ops, pt):
        r = _norm(ops, pt)
        return self.variance_ * ops.exp(-(r * self.alpha))

    def _spec(self, w):
        return _matern_density(0.5, self.alpha, self.dim, self.variance_, w)

    @property
    def spectral_decay(self):
        return 1.0 + self.dim

    def mse_rate(self, direction):
        _unit(direction, self.dim)
        return MseRate(1.0, False, 2.0 * self.alpha * self.variance_)

    def _analytic_derivative(self, ops, pt, u, order):
        r = _norm(ops, pt)
        if float(r) == 0.0:
            raise DerivativeUnavailable("exponential kernel is not differentiable at lag 0")
        k = self.variance_ * ops.exp(-(r * self.alpha))
        c = _dot(pt, u) / float(r)
        if order == 1:
            return -self.alpha * c * k
        g1_over_r = -self.alpha * k / r
        return (self.alpha**2) * c * c * k + g1_over_r * (1.0 - c * c)

    def _smooth_scale(self, pt, u):
        r = math.sqrt(sum(float(c) ** 2 for c in pt))
        return min(1.0, r / 4.0)


@dataclass(frozen=True)
class Triangular(CovarianceModel):
    """``K(x) = variance * max(0, 1 - |x|)`` on R."""

    variance_: float = 1.0
    dim: int = 1

    family = "triangular"

    def __post_init__(self):
        _check_positive(variance=self.variance_)
        if self.dim != 1:
            raise DimensionError("the triangular kernel is defined on R only")

    def _cov(self, ops, pt):
        r = abs(ops.num(pt[0]))
        if r >= 1.0:
            return ops.num(0.0)
        return (1.0 - r) * self.variance_

    def _spec(self, w):
        w = np.abs(w[:, 0])
        small = w < 1e-4
        w2 = w * w
        # 1 - cos w = 2 sin^2(w/2) avoids cancellation
        s = np.sin(0.5 * w)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = 2.0 * s * s / (math.pi * w2)
        out[small] = (1.0 - w2[small] / 12.0 + w2[small] ** 2 / 360.0) / (2.0 * math.pi)
        return self.variance_ * out

    spectral_decay = 2.0

    def spectral_tail_parts(self):
        v = self.variance_

        def env(w):
            return v / (math.pi * float(w) ** 2)

        return ((1.0, 0.0), (-0.5, 1.0), (-0.5, -1.0)), env

    def spectral_zeros(self, lo, hi):
        # f vanishes at 2 pi k, k != 0
        step = 2.0 * math.pi
        k0 = max(1, math.ceil(max(lo, 0.0) / step))
        k1 = math.floor(hi / step)
        return tuple(k * step for k in range(k0, k1 + 1))

    def mse_rate(self, direction):
        _unit(direction, 1)
        return MseRate(1.0, False, 2.0 * self.variance_)

    def _analytic_derivative(self, ops, pt, u, order):
        x = float(pt[0])
        r = abs(x)
        if r == 0.0 or r == 1.0:
            raise DerivativeUnavailable("triangular kernel has kinks at |x| in {0, 1}")
        if order == 2:
            return ops.num(0.0)
        if r > 1.0:
            return ops.num(0.0)
        return ops.num(-math.copysign(1.0, x) * float(u[0]) * self.variance_)

    def _smooth_scale(self, pt, u):
        r = abs(float(pt[0]))
        return min(1.0, r / 4.0, abs(1.0 - r) / 4.0)


@dataclass(frozen=True)
class Matern(CovarianceModel):
    """``K(x) = phi (alpha |x|)**nu K_nu(alpha |x|)`` on R^dim.

    ``phi`` defaults to ``2**(1-nu) / Gamma(nu)`` so that ``K(0) = 1``.  With
    the default the normalisation is carried out as a ratio, which keeps
    ``K(0) = 1`` exact in both precisions.
    """

    nu: float = 1.5
    alpha: float = 1.0
    phi: Optional[float] = None
    dim: int = 1

    family = "matern"

    def __post_init__(self):
        _check_positive(nu=self.nu, alpha=self.alpha)
        if self.phi is not None:
            _check_positive(phi=self.phi)
        _check_dim(self.dim)

    @property
    def variance(self):
        if self.phi is None:
            return 1.0
        return self.phi * math.exp(log_gamma(self.nu)) * 2.0 ** (self.nu - 1.0)

    def _amplitude(self, ops):
        """Factor A with K(r) = A * h(alpha r), h(u) = u^nu K_nu(u)."""
        if self.phi is None:
            return 1.0 / ops.xnu_k(self.nu, ops.num(0.0))
        return ops.num(self.phi)

    def _cov(self, ops, pt):
        u = _norm(ops, pt) * self.alpha
        return self._amplitude(ops) * ops.xnu_k(self.nu, u)

    def _spec(self, w):
        return _matern_density(self.nu, self.alpha, self.dim, self.variance, w)

    @property
    def spectral_decay(self):
        return 2.0 * self.nu + self.dim

    def mse_rate(self, direction):
        _unit(direction, self.dim)
        nu, a, v = self.nu, self.alpha, self.variance
        if nu < 1.0:
            c = 2.0 * math.exp(log_gamma(1.0 - nu) - log_gamma(1.0 + nu)) * (0.5 * a) ** (2.0 * nu)
            return MseRate(2.0 * nu, False, v * c)
        if nu == 1.0:
            return MseRate(2.0, True, v * a * a)
        return MseRate(2.0, False, v * a * a / (2.0 * (nu - 1.0)))

    # u^p K_m(u) for real p, m via x^|m| K_|m|
    def _upk(self, ops, p, m, u):
        m = abs(m)
        q = p - m
        base = ops.xnu_k(m, u)
        if q == 0.0:
            return base
        if float(u) == 0.0:
            if q > 0.0:
                return ops.num(0.0)
            raise DerivativeUnavailable("derivative diverges at lag 0")
        if q == math.floor(q) and abs(q) <= 8:
            return base * (u ** int(q) if isinstance(u, ExtendedReal) else u ** q)
        return base * ops.exp(ops.log(u) * q)

    def _analytic_derivative(self, ops, pt, u, order):
        nu, a = self.nu, self.alpha
        amp = self._amplitude(ops)
        r = _norm(ops, pt)
        rf = float(r)
        if rf == 0.0:
            if order == 1:
                if nu <= 0.5:
                    raise DerivativeUnavailable("Matern kernel with nu <= 1/2 has a cusp at 0")
                return ops.num(0.0)
            if nu <= 1.0:
                raise DerivativeUnavailable("Matern kernel with nu <= 1 is not twice differentiable at 0")
            return -(amp * a * a) * ops.xnu_k(nu - 1.0, ops.num(0.0))
        x = r * a
        c = _dot(pt, u) / rf
        # g'(r)/r = -A a^2 x^(nu-1) K_(nu-1)(x)
        g1_over_r = -(amp * a * a) * self._upk(ops, nu - 1.0, nu - 1.0, x)
        if order == 1:
            return g1_over_r * r * c
        # g''(r) = A a^2 (-x^(nu-1) K_(nu-1)(x) + x^nu K_(nu-2)(x))
        g2 = g1_over_r + (amp * a * a) * self._upk(ops, nu, nu - 2.0, x)
        return g2 * (c * c) + g1_over_r * (1.0 - c * c)

    def _smooth_scale(self, pt, u):
        r = math.sqrt(sum(float(c) ** 2 for c in pt))
        if r == 0.0:
            return 0.0 if self.nu <= 1.0 else 1.0
        return min(1.0, r / 4.0)


@dataclass(frozen=True)
class TensorExponential(CovarianceModel):
    """``K(s, t) = variance * exp(-alpha (|s| + |t|))`` on R^2."""

    variance_: float = 1.0
    alpha: float = 1.0
    dim: int = 2

    family = "tensor-exponential"

    def __post_init__(self):
        _check_positive(variance=self.variance_, alpha=self.alpha)
        if self.dim != 2:
            raise DimensionError("the tensor exponential kernel is defined on R^2")

    def _cov(self, ops, pt):
        s = abs(ops.num(pt[0])) + abs(ops.num(pt[1]))
        return self.variance_ * ops.exp(-(s * self.alpha))

    def _spec(self, w):
        a2 = self.alpha**2
        return self.variance_ * a2 / (math.pi**2 * (a2 + w[:, 0] ** 2) * (a2 + w[:, 1] ** 2))

    spectral_decay = 2.0

    def mse_rate(self, direction):
        u = _unit(direction, 2)
        return MseRate(1.0, False, 2.0 * self.alpha * self.variance_ * (abs(u[0]) + abs(u[1])))

    def _analytic_derivative(self, ops, pt, u, order):
        for c, uc in zip(pt, u):
            if float(c) == 0.0 and float(uc) != 0.0:
                raise DerivativeUnavailable("tensor exponential has kinks on the axes")
        k = self._cov(ops, pt)
        slope = -self.alpha * sum(math.copysign(1.0, float(c)) * float(uc) for c, uc in zip(pt, u) if float(uc))
        return k * slope if order == 1 else k * (slope * slope)

    def _smooth_scale(self, pt, u):
        scale = 1.0
        for c, uc in zip(pt, u):
            if float(uc) != 0.0:
                scale = min(scale, abs(float(c)) / 4.0)
        return scale


# -- space-time kernel ----------------------------------------------------

_PI2_8 = DD_PI * DD_PI / 8.0
_PI2_16 = DD_PI * DD_PI / 16.0
_PI32 = DD_PI * DD_SQRT_PI


def _axis_coefficients(t):
    """Taylor coefficients c0, c2, c4 of K(x, t) = c0 + c2 x^2 + c4 x^4 + ... (t > 0).

    Derived symbolically from the closed form; ``c0`` is the kernel on the
    time axis.
    """
    st = ext_sqrt(t)
    ec = ext_erfc(st)
    em = ext_exp(-t)
    t2 = t * t
    t32 = t * st
    pi2 = DD_PI * DD_PI
    c0 = (pi2 * (1.0 + 4.0 * t2) * ec + em * _PI32 * (2.0 * st - 4.0 * t32)) / 8.0
    c2 = (pi2 * (4.0 * t2 - 3.0) * ec + em * _PI32 * (2.0 * st - 4.0 * t32)) / 48.0
    c4 = (
        pi2 * (4.0 * t2 - 15.0) * ec
        + em * _PI32 * (2.0 * t * (1.0 - 2.0 * t) + 12.0) / st
    ) / 960.0
    return c0, c2, c4


def _spacetime_full(x, t):
    """Closed form for x > 0, t > 0 in double-double, written without overflow."""
    st = ext_sqrt(t)
    h = x / (2.0 * st)
    a = st + h
    b = st - h
    g = ext_exp(-(t + x * x / (4.0 * t)))
    plus = g * ext_erfcx(a)  # e^x erfc(A)
    if b.hi >= 0.0:
        minus = g * ext_erfcx(b)  # e^-x erfc(B)
    else:
        minus = 2.0 * ext_exp(-x) - g * ext_erfcx(-b)
    q = 4.0 * t * t / x
    return _PI2_16 * (plus * (1.0 - x + q) + minus * (1.0 + x - q)) + (_PI32 / 4.0) * st * g


# The closed form loses about log10(t^2 / x) digits to cancellation between
# its 1/x terms; the x-series truncated after x^4 has relative error of order
# x^6 t^(-3/2).  Balancing both at double-double level (unit roundoff 1e-32)
# gives a crossover near x = 3e-5 sqrt(t).  Against a 300-bit reference the
# blend has worst relative error 8e-26 over t in [1e-12, 10], attained at the
# crossover for t of order 1.
_AXIS_DELTA = 3e-5


def _spacetime_ext(x, t):
    x = abs(ext(x))
    t = abs(ext(t))
    if t.hi == 0.0:
        return _PI2_8 * ext_exp(-x) * (1.0 + x)
    if x.hi < _AXIS_DELTA * math.sqrt(t.hi):
        c0, c2, c4 = _axis_coefficients(t)
        x2 = x * x
        return c0 + x2 * (c2 + x2 * c4)
    d = x.hi - 2.0 * t.hi
    if d > 0.0 and d * d > 320.0 * t.hi:
        # the Gaussian factor is below e^-80 relative to e^-x; also avoids
        # overflow in x^2 / 4t for tiny t
        return _PI2_8 * ext_exp(-x) * (1.0 + x - 4.0 * t * t / x)
    return _spacetime_full(x, t)


@dataclass(frozen=True)
class SpaceTime(CovarianceModel):
    """Planar slice ``K(x, t)`` of the space-time covariance with spectral density
    ``{(1 + |w1|^2)^2 + w2^2}^(-2)`` on R^3 x R, one spatial coordinate kept.

    ``K(x, 0) = (pi^2/8) e^(-|x|) (1 + |x|)`` and
    ``K(0, t) = pi^2/8 - (2/3) pi^(3/2) |t|^(3/2) + O(t^2)``.
    Values are always computed in double-double and rounded for the native
    backend.
    """

    dim: int = 2

    family = "spacetime"

    def __post_init__(self):
        if self.dim != 2:
            raise DimensionError("the space-time kernel is used on the (x, t) plane")

    @property
    def variance(self):
        return float(_PI2_8)

    def _cov(self, ops, pt):
        v = _spacetime_ext(pt[0], pt[1])
        return float(v) if ops is NativeOps else v

    def _spec(self, w):
        # marginal of the R^3 x R density over two spatial frequency coordinates:
        # int_a^inf (u^2 + b^2)^-2 du with a = 1 + w1^2, b = |w2|
        a = 1.0 + w[:, 0] ** 2
        b = np.abs(w[:, 1])
        q = b / a
        small = q < 0.05
        series = np.zeros_like(q)
        qq = q * q
        for k in range(7, -1, -1):
            series = series * (-qq) + (k + 1) / (2 * k + 3)
        series /= a**3
        with np.errstate(divide="ignore", invalid="ignore"):
            closed = (np.arctan(q) - a * b / (a * a + b * b)) / (2.0 * b**3)
        return np.where(small, series, closed)

    spectral_decay = 3.0

    def mse_rate(self, direction):
        u = _unit(direction, 2)
        if u[1] != 0.0:
            return MseRate(1.5, False, (4.0 / 3.0) * math.pi**1.5 * abs(u[1]) ** 1.5)
        return MseRate(2.0, False, math.pi**2 / 8.0)

    def _analytic_derivative(self, ops, pt, u, order):
        if float(pt[1]) != 0.0 or float(u[1]) != 0.0:
            raise DerivativeUnavailable("analytic derivatives only along the spatial axis")
        m = Matern(1.5)
        amp = _PI2_8 if ops is ExtendedOps else float(_PI2_8)
        return amp * m._analytic_derivative(ops, (pt[0],), (u[0],), order)

    def _smooth_scale(self, pt, u):
        x, t = abs(float(pt[0])), abs(float(pt[1]))
        if float(u[1]) != 0.0:
            return min(1.0, t / 4.0)
        if t == 0.0:
            return 1.0 if x == 0.0 else min(1.0, x / 4.0)
        return min(1.0, math.sqrt(t) / 4.0)


# -- spectrally defined model ---------------------------------------------


@dataclass(frozen=True)
class DoublyMatern(CovarianceModel):
    """Spectral density ``scale * [c1 (a1^2 + |w1|^2)^alpha1 + c2 (a2^2 + |w2|^2)^alpha2]^(-nu)``
    with ``w1`` in R^d1 and ``w2`` in R^d2.

    ``eval_spec`` takes ``(|w1|, |w2|)``.  There is no closed-form kernel:
    covariances come from :func:`screenlab.spectral.cov_from_spectrum`, and the
    lag is ``(|x|, |t|)``.
    """

    c1: float = 1.0
    c2: float = 1.0
    a1: float = 1.0
    a2: float = 1.0
    alpha1: float = 2.0
    alpha2: float = 1.0
    nu: float = 2.0
    d1: int = 1
    d2: int = 1
    scale: float = 1.0
    dim: int = field(default=2, init=False)

    family = "doubly-matern"
    has_kernel = False

    def __post_init__(self):
        _check_positive(c1=self.c1, c2=self.c2, alpha1=self.alpha1, alpha2=self.alpha2, nu=self.nu, scale=self.scale)
        if self.a1**2 + self.a2**2 <= 0.0:
            raise ValueError("need a1^2 + a2^2 > 0")
        if self.d1 < 1 or self.d2 < 1:
            raise ValueError("d1 and d2 must be positive integers")
        bound = self.d1 / (2.0 * self.alpha1) + self.d2 / (2.0 * self.alpha2)
        if not self.nu > bound:
            raise ValueError(f"integrability requires nu > {bound:g}, got nu = {self.nu:g}")

    def to_spec(self):
        out = super().to_spec()
        out.pop("dim")
        return out

    def _cov(self, ops, pt):
        # quadrature value, accurate to about 1e-10 absolute; no extended path
        if ops is not NativeOps:
            raise NotImplementedError("doubly Matern covariances are only available by quadrature")
        from .spectral import cov_from_spectrum

        return cov_from_spectrum(self, pt).value

    def _spec(self, w):
        r1, r2 = w[:, 0], w[:, 1]
        s = self.c1 * (self.a1**2 + r1 * r1) ** self.alpha1 + self.c2 * (self.a2**2 + r2 * r2) ** self.alpha2
        return self.scale * s ** (-self.nu)

    @property
    def spectral_decay(self):
        return 2.0 * self.nu * min(self.alpha1, self.alpha2)

    @property
    def variance(self):
        from .spectral import cov_from_spectrum

        return cov_from_spectrum(self, (0.0, 0.0)).value


# -- helpers --------------------------------------------------------------


def _check_positive(**kw):
    for k, v in kw.items():
        if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
            raise ValueError(f"{k} must be a finite positive number, got {v!r}")


def _check_dim(dim):
    if not isinstance(dim, int) or dim < 1:
        raise DimensionError(f"dim must be a positive integer, got {dim!r}")


def _unit(direction, dim):
    u = tuple(float(c) for c in _as_point(direction, dim, "direction"))
    n = math.sqrt(sum(c * c for c in u))
    if abs(n - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    return u


def _matern_density(nu, alpha, dim, variance, w):
    w2 = np.sum(w * w, axis=1)
    logc = log_gamma(nu + 0.5 * dim) - log_gamma(nu) - 0.5 * dim * math.log(math.pi)
    return variance * math.exp(logc) * alpha ** (2.0 * nu) * (alpha * alpha + w2) ** (-nu - 0.5 * dim)


# -- module-level API -----------------------------------------------------


def eval_cov(model: CovarianceModel, lag, precision="native"):
    """Covariance ``K(lag)``.

    Parameters
    ----------
    model : CovarianceModel
    lag : float or sequence of float
        Point in R^dim.
    precision : {"native", "extended"}
        ``"extended"`` returns an :class:`ExtendedReal`.
    """
    return model.cov(lag, precision)


def eval_spec(model: CovarianceModel, freq) -> float:
    """Spectral density at ``freq``; ``K(x) = int exp(i w.x) f(w) dw``."""
    return model.spec(freq)


def small_lag_mse_rate(model: CovarianceModel, direction) -> MseRate:
    """Leading behaviour of ``2 (K(0) - K(eps u))``; ``MseRate(None, ...)`` if unknown."""
    return model.mse_rate(direction)


_UNIT_ROUNDOFF = {"native": 1.1e-16, "extended": 1e-32}


def _fd(model, ops, pt, u, order, precision):
    scale = model._smooth_scale(pt, u)
    at_zero = all(float(c) == 0.0 for c in pt)
    if scale == 0.0:
        if order == 1 and at_zero:
            return ops.num(0.0)  # even kernel: symmetric difference vanishes
        raise DerivativeUnavailable(f"{model.family} kernel is not smooth at lag {tuple(map(float, pt))}")
    eps = _UNIT_ROUNDOFF[precision]
    if order == 1:
        h = scale * eps ** (1.0 / 3.0)
    else:
        h = scale * eps**0.25
    h = ops.num(h)

    def at(k):
        return model._cov(ops, tuple(ops.num(c) + h * (k * uc) for c, uc in zip(pt, u)))

    if order == 1:
        return (at(1) - at(-1)) / (2.0 * h)
    return (at(1) - 2.0 * at(0) + at(-1)) / (h * h)


def kernel_derivative(model: CovarianceModel, lag, direction, order, mode="auto", precision="native"):
    """Directional derivative of ``K`` at ``lag`` along the unit vector ``direction``.

    Parameters
    ----------
    order : {1, 2}
    mode : {"auto", "analytic", "finite-difference"}
        ``auto`` uses the analytic form when available and falls back to a
        central difference with an error-balanced step.

    Returns
    -------
    (value, source)
        ``source`` is ``"analytic"`` or ``"finite-difference"``.

    Raises
    ------
    DerivativeUnavailable
        On a non-smooth locus, or when ``mode="analytic"`` and no analytic
        form exists.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if mode not in ("auto", "analytic", "finite-difference"):
        raise ValueError(f"unknown mode {mode!r}")
    ops = _backend(precision)
    pt = tuple(ops.num(c) for c in _as_point(lag, model.dim))
    u = _unit(direction, model.dim)
    if not model.has_kernel:
        raise DerivativeUnavailable(f"{model.family} has no closed-form kernel")
    if mode != "finite-difference":
        try:
            return _Deriv(model._analytic_derivative(ops, pt, u, order), "analytic")
        except DerivativeUnavailable:
            if mode == "analytic":
                raise
    if precision == "native":
        # the stencil is far more accurate when the kernel has a double-double route
        try:
            xpt = tuple(ext(c) for c in pt)
            return _Deriv(float(_fd(model, ExtendedOps, xpt, u, order, "extended")), "finite-difference")
        except NotImplementedError:
            pass
    return _Deriv(_fd(model, ops, pt, u, order, precision), "finite-difference")


def kernel_derivatives(model, lag, direction, mode="auto") -> KernelDerivatives:
    """First and second directional derivatives as a :class:`KernelDerivatives`."""
    d1 = kernel_derivative(model, lag, direction, 1, mode)
    d2 = kernel_derivative(model, lag, direction, 2, mode)
    source = "analytic" if d1.source == d2.source == "analytic" else "finite-difference"
    return KernelDerivatives(float(d1.value), float(d2.value), source)


# -- specification schema -------------------------------------------------

_FAMILIES = {
    "exponential": Exponential,
    "triangular": Triangular,
    "matern": Matern,
    "tensor-exponential": TensorExponential,
    "spacetime": SpaceTime,
    "doubly-matern": DoublyMatern,
}

_RENAMES = {"variance": "variance_"}


def model_from_spec(spec: dict) -> CovarianceModel:
    """Build a model from ``{"family": name, **params}``.

    Unknown families or parameters raise ``ValueError``.
    """
    if not isinstance(spec, dict) or "family" not in spec:
        raise ValueError("model spec needs a 'family' key")
    family = spec["family"]
    cls = _FAMILIES.get(family)
    if cls is None:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(_FAMILIES)}")
    allowed = {f.name for f in fields(cls) if f.init}
    kwargs = {}
    for k, v in spec.items():
        if k == "family":
            continue
        name = _RENAMES.get(k, k)
        if name not in allowed:
            raise ValueError(f"unknown parameter {k!r} for family {family!r}")
        kwargs[name] = v
    return cls(**kwargs)


def family_names():
    return sorted(_FAMILIES)

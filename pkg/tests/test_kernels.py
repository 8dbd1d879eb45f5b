import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from screenlab.kernels import (
    DerivativeUnavailable,
    DimensionError,
    DoublyMatern,
    Exponential,
    Matern,
    SpaceTime,
    TensorExponential,
    Triangular,
    eval_cov,
    eval_spec,
    kernel_derivative,
    kernel_derivatives,
    model_from_spec,
    small_lag_mse_rate,
)
from screenlab.kriging import gram_matrix
from screenlab.specfun import EULER_GAMMA, ExtendedReal

mp.mp.dps = 30
PI2_8 = math.pi**2 / 8


def spacetime_oracle(x, t):
    """Kernel of the space-time density by direct mpmath quadrature.

    The time integral is done in closed form; the spatial part is the
    three-dimensional radial transform.
    """
    x, t = abs(mp.mpf(x)), abs(mp.mpf(t))

    def g(r):
        a = 1 + r * r
        return mp.pi / (2 * a**3) * (1 + a * t) * mp.exp(-a * t)

    # t > 0 gives Gaussian decay in r, so plain splitting suffices
    cuts = [0, 1, 2, 4, 8, 16, 32, 64, mp.inf]
    if x == 0:
        raw = 4 * mp.pi * mp.quad(lambda r: r * r * g(r), cuts)
    else:
        raw = 4 * mp.pi * mp.quad(lambda r: r * mp.sin(r * x) / x * g(r), cuts)
    # the shipped kernel is normalised to K(0, 0) = pi^2 / 8
    return float(raw / mp.pi)


# -- values -------------------------------------------------------------------------


def test_exponential_origin():
    assert eval_cov(Exponential(), 0.0) == 1.0


def test_spacetime_spatial_axis():
    m = SpaceTime()
    for x in (0.0, 0.3, 1.0, 2.5):
        assert eval_cov(m, (x, 0.0)) == pytest.approx(PI2_8 * math.exp(-x) * (1 + x), rel=1e-14)


def test_spacetime_time_axis_expansion():
    m = SpaceTime()
    for t in (1e-3, 1e-4, 1e-5):
        lead = PI2_8 - 2.0 / 3.0 * math.pi**1.5 * t**1.5
        assert abs(eval_cov(m, (0.0, t)) - lead) <= 5 * t * t


@pytest.mark.parametrize("x,t", [(0.0, 0.2), (0.5, 0.3), (1.0, 1.0), (2.0, 0.1), (0.05, 0.02), (1e-4, 0.5)])
def test_spacetime_against_quadrature(x, t):
    assert eval_cov(SpaceTime(), (x, t)) == pytest.approx(spacetime_oracle(x, t), rel=1e-9, abs=1e-12)


def test_spacetime_axis_continuity():
    m = SpaceTime()
    xs = np.linspace(0.1, 3.0, 30)
    prev = math.inf
    for t in (1e-3, 1e-5, 1e-7, 1e-9):
        gap = max(abs(eval_cov(m, (x, t)) - eval_cov(m, (x, 0.0))) for x in xs)
        assert gap <= prev
        prev = gap
    assert prev < 1e-8


def test_spacetime_extended_matches_native():
    m = SpaceTime()
    for p in [(0.3, 0.2), (1e-6, 1e-3), (2.0, 0.0)]:
        v = eval_cov(m, p, "extended")
        assert isinstance(v, ExtendedReal)
        assert float(v) == eval_cov(m, p)


def test_matern_nu1_small_lag():
    m = Matern(1.0)
    for x in (1e-2, 1e-3):
        want = 1 + 0.5 * x * x * math.log(0.5 * x) + 0.25 * (2 * EULER_GAMMA - 1) * x * x
        assert abs(eval_cov(m, x) - want) <= 10 * x**4 * abs(math.log(x))


def test_matern_closed_forms():
    for x in (0.0, 0.1, 1.0, 3.0):
        assert eval_cov(Matern(0.5), x) == pytest.approx(math.exp(-x), rel=1e-15, abs=1e-300)
        assert eval_cov(Matern(1.5), x) == pytest.approx(math.exp(-x) * (1 + x), rel=1e-15)
        assert eval_cov(Matern(2.5), x) == pytest.approx(math.exp(-x) * (1 + x + x * x / 3), rel=1e-15)


def test_matern_explicit_phi():
    m = Matern(1.5, alpha=2.0, phi=3.0)
    x = 0.7
    assert eval_cov(m, x) == pytest.approx(3.0 * (2 * x) ** 1.5 * float(mp.besselk(1.5, 2 * x)), rel=1e-14)
    assert m.variance == pytest.approx(3.0 * math.gamma(1.5) * 2**0.5, rel=1e-14)


@given(st.floats(-5.0, 5.0), st.floats(-5.0, 5.0))
def test_even_and_bounded(x, t):
    for m in (Exponential(dim=2), Matern(1.5, dim=2), TensorExponential(), SpaceTime()):
        a, b = eval_cov(m, (x, t)), eval_cov(m, (-x, -t))
        assert a == pytest.approx(b, rel=1e-13, abs=1e-300)
        assert a <= m.variance * (1 + 1e-15)


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        eval_cov(Exponential(), (1.0, 2.0))
    with pytest.raises(DimensionError):
        Triangular(dim=2)
    with pytest.raises(DimensionError):
        SpaceTime(dim=3)
    with pytest.raises(DimensionError):
        eval_spec(Matern(1.5, dim=2), 1.0)


# -- spectral densities ----------------------------------------------------------------


def test_doubly_matern_origin_and_spacetime_density():
    assert eval_spec(DoublyMatern(), (0.0, 0.0)) == 0.25
    # a2 = 0 is the choice that reproduces the space-time density
    dm = DoublyMatern(a2=0.0)
    for w1, w2 in [(0.3, 0.0), (1.0, 2.0), (5.0, 0.5)]:
        assert eval_spec(dm, (w1, w2)) == pytest.approx(((1 + w1**2) ** 2 + w2**2) ** -2, rel=1e-15)


def test_doubly_matern_integrability():
    DoublyMatern(nu=1.0)  # bound 1/4 + 1/2
    with pytest.raises(ValueError):
        DoublyMatern(nu=0.7)
    with pytest.raises(ValueError):
        DoublyMatern(a1=0.0, a2=0.0)


def test_triangular_density():
    m = Triangular()
    assert eval_spec(m, 2 * math.pi) == pytest.approx(0.0, abs=1e-18)
    assert eval_spec(m, 0.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    for w in (1e-5, 1e-3, 0.5, 3.0):
        assert eval_spec(m, w) == pytest.approx(float((1 - mp.cos(w)) / (mp.pi * w * w)), rel=1e-13)
    assert m.spectral_zeros(0.0, 20.0) == pytest.approx([2 * math.pi, 4 * math.pi, 6 * math.pi])


def test_one_dimensional_densities_against_closed_forms():
    w = 1.7
    assert eval_spec(Exponential(alpha=2.0), w) == pytest.approx(2.0 / (math.pi * (4 + w * w)), rel=1e-14)
    assert eval_spec(Matern(1.5), w) == pytest.approx(2.0 / (math.pi * (1 + w * w) ** 2), rel=1e-14)
    assert eval_spec(TensorExponential(), (w, 0.0)) == pytest.approx(1 / (math.pi**2 * (1 + w * w)), rel=1e-14)


def _fourier_1d(model, x):
    # QUADPACK directly on the density, independent of the package quadrature
    f = lambda w: eval_spec(model, w)
    if x == 0:
        return 2 * sum(integrate.quad(f, a, b, epsabs=1e-13, limit=200)[0] for a, b in ((0, 1), (1, 10), (10, np.inf)))
    head = integrate.quad(f, 0, 10, weight="cos", wvar=x, epsabs=1e-13, limit=200)[0]
    tail = integrate.quad(f, 10, np.inf, weight="cos", wvar=x, epsabs=1e-13, limlst=100)[0]
    return 2 * (head + tail)


def _triangular_fourier(x):
    # (1 - cos w) cos(wx) = cos(wx) - cos(w(1+x))/2 - cos(w(1-x))/2 over pi w^2
    a = 10.0
    head = integrate.quad(lambda w: eval_spec(Triangular(), w) * math.cos(w * x), 0, a, epsabs=1e-13, limit=400)[0]
    tail = 0.0
    for lam, c in ((x, 1.0), (1 + x, -0.5), (1 - x, -0.5)):
        lam = abs(lam)
        if lam == 0:
            tail += c / (math.pi * a)
        else:
            tail += c * integrate.quad(lambda w: 1 / (math.pi * w * w), a, np.inf, weight="cos", wvar=lam, epsabs=1e-14)[0]
    return 2 * (head + tail)


@pytest.mark.parametrize("model", [Exponential(), Matern(0.5), Matern(1.0), Matern(1.5), Matern(2.5), Triangular()],
                         ids=lambda m: f"{m.family}-{getattr(m, 'nu', '')}")
@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 2.0])
def test_fourier_consistency(model, x):
    got = _triangular_fourier(x) if isinstance(model, Triangular) else _fourier_1d(model, x)
    assert got == pytest.approx(eval_cov(model, x), rel=1e-6, abs=1e-9)


# -- small-lag rates --------------------------------------------------------------------


def test_mse_rates():
    assert tuple(small_lag_mse_rate(Exponential(), 1.0)) == (1.0, False, 2.0)
    assert tuple(small_lag_mse_rate(Matern(1.0), 1.0)) == (2.0, True, 1.0)
    r = small_lag_mse_rate(SpaceTime(), (0.0, 1.0))
    assert (r.p, r.log) == (1.5, False)
    assert r.c == pytest.approx(4.0 / 3.0 * math.pi**1.5)
    assert not small_lag_mse_rate(DoublyMatern(), (1.0, 0.0)).known


def test_spacetime_time_rate_numerically():
    m = SpaceTime()
    c = 4.0 / 3.0 * math.pi**1.5
    k0 = m.cov((0.0, 0.0), "extended")
    dev = []
    for t in (1e-6, 1e-8, 1e-10):
        y = 2 * float(k0 - m.cov((0.0, t), "extended"))
        dev.append(abs(y / (c * t**1.5) - 1))
    # next term is O(t^2), a relative correction of order sqrt(t)
    assert dev[0] > dev[1] > dev[2]
    assert dev[2] < 1e-4


@pytest.mark.parametrize("model,direction", [(Exponential(), 1.0), (Matern(1.5), 1.0), (Matern(1.0), 1.0), (Matern(0.3), 1.0), (SpaceTime(), (1.0, 0.0))],
                         ids=["exp", "m15", "m1", "m03", "st-space"])
def test_mse_rate_matches_kernel(model, direction):
    rate = small_lag_mse_rate(model, direction)
    u = np.atleast_1d(direction)
    eps = 1e-5
    lag = tuple(eps * u) if u.size > 1 else eps
    try:
        k = float(model.variance - eval_cov(model, lag, "extended"))
    except NotImplementedError:
        k = model.variance - eval_cov(model, lag)
    got = 2 * k
    want = rate.c * eps**rate.p * ((-math.log(eps)) if rate.log else 1.0)
    assert got == pytest.approx(want, rel=0.1 if rate.log else 1e-3)


# -- derivatives ----------------------------------------------------------------------------


def test_derivative_examples():
    v, src = kernel_derivative(Exponential(), 1.0, 1.0, 1)
    assert src == "analytic" and v == pytest.approx(-math.exp(-1), rel=1e-15)
    v, _ = kernel_derivative(Matern(1.5), 0.0, 1.0, 2)
    assert v == pytest.approx(-1.0, rel=1e-15)
    for m in (Matern(1.5), Matern(2.5, dim=2), SpaceTime(), Triangular()):
        lag = (0.0,) * m.dim
        u = (1.0,) + (0.0,) * (m.dim - 1)
        assert float(kernel_derivative(m, lag, u, 1).value) == 0.0


def test_derivative_non_smooth_locus():
    with pytest.raises(DerivativeUnavailable):
        kernel_derivative(Exponential(), 0.0, 1.0, 2)
    with pytest.raises(DerivativeUnavailable):
        kernel_derivative(TensorExponential(), (0.0, 0.5), (1.0, 0.0), 1, mode="analytic")


@pytest.mark.parametrize("model,lag,u", [
    (Matern(1.5), 0.7, 1.0),
    (Matern(1.0), 0.4, 1.0),
    (Matern(2.5, dim=2), (0.3, -0.2), (0.6, 0.8)),
    (Exponential(dim=2), (0.5, 0.5), (1.0, 0.0)),
    (SpaceTime(), (0.8, 0.0), (1.0, 0.0)),
], ids=["m15", "m1", "m25-2d", "exp-2d", "st"])
def test_analytic_derivative_matches_finite_difference(model, lag, u):
    d = kernel_derivatives(model, lag, u)
    assert d.source == "analytic"
    lag = np.atleast_1d(np.asarray(lag, float))
    u = np.atleast_1d(np.asarray(u, float))
    k = lambda p: float(eval_cov(model, tuple(p), "extended") if model.dim > 1 else eval_cov(model, p[0], "extended"))
    errs = []
    for h in (1e-2, 1e-3):
        fd1 = (k(lag + h * u) - k(lag - h * u)) / (2 * h)
        errs.append(abs(fd1 - d.first))
    # central differences are second order
    assert errs[1] < errs[0] / 50
    assert errs[1] < 1e-5
    h = 1e-3
    fd2 = (k(lag + h * u) - 2 * k(lag) + k(lag - h * u)) / h**2
    assert fd2 == pytest.approx(d.second, rel=1e-5, abs=1e-6)


def test_finite_difference_fallback():
    v, src = kernel_derivative(SpaceTime(), (0.5, 0.3), (0.0, 1.0), 1)
    assert src == "finite-difference"
    h = 1e-5
    m = SpaceTime()
    fd = (eval_cov(m, (0.5, 0.3 + h)) - eval_cov(m, (0.5, 0.3 - h))) / (2 * h)
    assert float(v) == pytest.approx(fd, rel=1e-6)


# -- schema and positive definiteness ---------------------------------------------------------


@pytest.mark.parametrize("model", [Exponential(alpha=2.0), Triangular(variance_=3.0), Matern(1.0, dim=2), TensorExponential(),
                                   SpaceTime(), DoublyMatern(nu=3.0, d1=3, a2=0.0)], ids=lambda m: m.family)
def test_spec_round_trip(model):
    assert model_from_spec(model.to_spec()) == model


@pytest.mark.parametrize("spec", [{}, {"family": "gaussian"}, {"family": "matern", "kappa": 1}, {"family": "matern", "nu": -1}])
def test_bad_specs(spec):
    with pytest.raises(ValueError):
        model_from_spec(spec)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_gram_matrices_positive_semidefinite(seed):
    rng = np.random.default_rng(seed)
    for m in (Exponential(), Triangular(), Matern(1.0), Matern(2.5), Matern(1.5, dim=2), TensorExponential(), SpaceTime()):
        pts = rng.uniform(-2, 2, (6, m.dim))
        sites = [p[0] for p in pts] if m.dim == 1 else [tuple(p) for p in pts]
        g = gram_matrix(m, sites)
        assert np.allclose(g, g.T)
        assert np.linalg.eigvalsh(g).min() >= -1e-9

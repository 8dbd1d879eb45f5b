import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from screenlab.experiments import get_scenario
from screenlab.kernels import DoublyMatern, Exponential, Matern, SpaceTime, TensorExponential, Triangular, eval_cov
from screenlab.kriging import SiteConfiguration, simple_krige
from screenlab.spectral import (
    FrequencyBand,
    QuadratureError,
    TrigPolynomial,
    band_fraction,
    band_fraction_estimate,
    cov_from_spectrum,
    covariance_quadratic_form,
    fcond_profile,
    residual_correlation,
    spectral_mse,
)

E = math.e


def band_limit(w0):
    return 2 / math.pi * (math.atan(w0) - w0 / (1 + w0 * w0))


def near_residual(name, eps):
    sc = get_scenario(name)
    near, _ = sc.sites.materialize(eps)
    return sc.model, TrigPolynomial.residual(simple_krige(sc.model, near))


# -- trigonometric polynomials ------------------------------------------------------------


def test_residual_polynomial_structure():
    sol = simple_krige(Exponential(), [0.1, 0.5])
    p = TrigPolynomial.residual(sol)
    assert p.nodes[:, 0].tolist() == [0.0, 0.1, 0.5]
    assert p.coefficients[0] == 1
    assert p.coefficients[1:] == pytest.approx(-sol.weights)


@given(st.floats(-50, 50))
def test_conjugate_symmetry(w):
    p = TrigPolynomial([0.0, 0.3, -1.2], [1.0, -0.4, 2.5])
    assert abs(p(w)) ** 2 == pytest.approx(abs(p(-w)) ** 2, rel=1e-12, abs=1e-12)
    assert p(-w) == pytest.approx(np.conj(p(w)))


def test_polynomial_shape_checks():
    with pytest.raises(ValueError):
        TrigPolynomial([0.0, 1.0], [1.0])


# -- isometry ---------------------------------------------------------------------------------


def test_constant_and_zero_polynomials():
    for m in (Exponential(), Matern(1.5), Triangular(), Matern(1.5, dim=2)):
        one = TrigPolynomial(np.zeros((1, m.dim)), [1.0])
        assert spectral_mse(one, m).value == pytest.approx(m.variance, rel=1e-8)
        zero = TrigPolynomial(np.zeros((1, m.dim)), [0.0])
        assert spectral_mse(zero, m).value == 0.0


def test_exponential_single_site_residual():
    sol = simple_krige(Exponential(), [0.1])
    res = spectral_mse(TrigPolynomial.residual(sol), Exponential())
    assert res.value == pytest.approx(-math.expm1(-0.2), rel=1e-6)
    assert res.error < 1e-8


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31))
def test_isometry_random_polynomials(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    nodes = rng.uniform(-2, 2, k)
    coeffs = rng.normal(size=k)
    p = TrigPolynomial(nodes, coeffs)
    for m in (Exponential(), Triangular(), Matern(1.0), Matern(2.5)):
        assert spectral_mse(p, m).value == pytest.approx(covariance_quadratic_form(p, m), rel=1e-6)


@pytest.mark.parametrize("model", [Matern(1.5, dim=2), SpaceTime(), Exponential(dim=2)], ids=lambda m: m.family)
def test_isometry_two_dimensional(model):
    rng = np.random.default_rng(3)
    p = TrigPolynomial(rng.uniform(-1, 1, (3, 2)), rng.normal(size=3))
    assert spectral_mse(p, model).value == pytest.approx(covariance_quadratic_form(p, model), rel=1e-6)


def test_tensor_model_rejected_in_two_dimensions():
    p = TrigPolynomial([(0.0, 0.0), (0.5, 0.5)], [1.0, -0.5])
    with pytest.raises((ValueError, QuadratureError)):
        spectral_mse(p, TensorExponential())


# -- band fractions -------------------------------------------------------------------------------


@pytest.mark.parametrize("w0", [0.5, 1.0, 2.0])
def test_band_fraction_fig2a_limit(w0):
    m, p = near_residual("fig2a-matern32", 2.0**-10)
    assert band_fraction(p, m, FrequencyBand(w0)) == pytest.approx(band_limit(w0), abs=1e-3)


def test_band_fraction_at_one_numeric():
    assert band_limit(1.0) == pytest.approx(2 / math.pi * (math.pi / 4 - 0.5))
    assert band_limit(1.0) == pytest.approx(0.18169, abs=1e-5)


def test_band_fraction_whole_line():
    m, p = near_residual("fig2a-matern32", 2.0**-4)
    assert band_fraction(p, m, FrequencyBand(1e7)) == pytest.approx(1.0, abs=1e-6)


def test_band_fraction_bounds_and_monotone():
    for name in ("fig2a-matern32", "fig1-triangular", "matern-nu1-fig2a"):
        m, p = near_residual(name, 2.0**-5)
        fr = [band_fraction(p, m, FrequencyBand(w)) for w in np.geomspace(0.05, 500, 12)]
        assert all(0 <= f <= 1 for f in fr)
        assert all(b >= a - 1e-12 for a, b in zip(fr, fr[1:]))


def test_band_fraction_error_estimate():
    m, p = near_residual("fig2a-matern32", 2.0**-6)
    res = band_fraction_estimate(p, m, FrequencyBand(1.0))
    assert res.error < 1e-6
    with pytest.raises(ValueError):
        FrequencyBand(0.0)


@pytest.mark.parametrize("name", ["fig2b-matern32", "fig1-triangular-y0off", "fig3a"])
def test_band_fraction_vanishes_when_screening_holds(name):
    fr = []
    for k in (4, 7, 10):
        m, p = near_residual(name, 2.0**-k)
        fr.append(band_fraction(p, m, FrequencyBand(1.0)))
    assert fr[0] > fr[1] > fr[2]
    assert fr[2] < 1e-3


def test_band_fraction_matern_nu1_logarithmic():
    fr = []
    for k in (4, 7, 10, 13):
        m, p = near_residual("matern-nu1-fig2a", 2.0**-k)
        fr.append(band_fraction(p, m, FrequencyBand(1.0)))
    assert all(a > b for a, b in zip(fr, fr[1:]))
    # slow decay: far from zero at eps = 2^-13, in contrast to power rates
    assert fr[-1] > 0.01
    assert fr[-1] < 0.5 * fr[0]


def test_band_fraction_fig2a_persists():
    fr = []
    for k in (4, 7, 10):
        m, p = near_residual("fig2a-matern32", 2.0**-k)
        fr.append(band_fraction(p, m, FrequencyBand(1.0)))
    assert min(fr) > 0.18


# -- slow variation ---------------------------------------------------------------------------------


def test_fcond_matern_at_100():
    # 1-D densities are proportional to (1 + w^2)^-(nu + 1/2); sup at the inner edge of the ball
    for nu in (1.0, 1.5):
        want = ((1 + 100.0**2) / (1 + 99.0**2)) ** (nu + 0.5) - 1
        c = fcond_profile(Matern(nu), 1.0, [100.0]).values[0]
        assert c == pytest.approx(want, rel=1e-10)
    assert fcond_profile(Matern(1.0), 1.0, [100.0]).values[0] == pytest.approx(0.0306, abs=1e-4)


def test_fcond_triangular_violations():
    prof = fcond_profile(Triangular(), 1.0)
    assert prof.verdict == "violated"
    for w in prof.violations:
        k = round(w / (2 * math.pi))
        assert abs(w - 2 * math.pi * k) <= 1.0
    assert prof.heuristic


@pytest.mark.parametrize("model", [Matern(0.5), Matern(2.5), Matern(1.5, dim=2), SpaceTime(), DoublyMatern(),
                                   DoublyMatern(alpha1=1.0, nu=1.6)], ids=str)
def test_fcond_consistent(model):
    prof = fcond_profile(model, 1.0)
    assert prof.verdict == "consistent"
    assert np.all(np.diff(prof.values[-10:]) <= 0)
    assert np.all(prof.errors <= prof.values + 1e-15)


def test_fcond_tensor_violated():
    assert fcond_profile(TensorExponential(), 1.0).verdict == "violated"


def test_fcond_input_checks():
    with pytest.raises(ValueError):
        fcond_profile(Matern(1.5), 0.0)
    with pytest.raises(ValueError):
        fcond_profile(Matern(1.5), 1.0, [10.0, 5.0])


# -- covariance from the density ------------------------------------------------------------------


def test_cov_from_spectrum_matern():
    res = cov_from_spectrum(Matern(1.5), 1.0)
    assert res.value == pytest.approx(2 * math.exp(-1), rel=1e-6)
    assert res.error < 1e-6
    assert cov_from_spectrum(Matern(1.0), 1.0).value == pytest.approx(eval_cov(Matern(1.0), 1.0), rel=1e-6)


@pytest.mark.parametrize("model", [Exponential(), Triangular(), Matern(2.5), Matern(1.5, dim=2), SpaceTime()], ids=lambda m: m.family)
def test_cov_from_spectrum_origin(model):
    lag = (0.0,) * model.dim
    assert cov_from_spectrum(model, lag).value == pytest.approx(model.variance, rel=1e-6)


def test_doubly_matern_reproduces_spacetime_kernel():
    dm = DoublyMatern(a2=0.0, d1=3, scale=1 / math.pi)
    st = SpaceTime()
    for lag in [(0.0, 0.0), (0.7, 0.0), (2.0, 0.0), (0.3, 0.2), (1.0, 1.0)]:
        got = cov_from_spectrum(dm, lag)
        assert got.value == pytest.approx(eval_cov(st, lag), abs=1e-6 * st.variance)
    assert eval_cov(dm, (0.7, 0.0)) == pytest.approx(math.pi**2 / 8 * math.exp(-0.7) * 1.7, rel=1e-8)


def test_doubly_matern_not_krigable():
    dm = DoublyMatern()
    assert not dm.has_kernel
    with pytest.raises(NotImplementedError):
        dm.cov((0.1, 0.0), "extended")


# -- residual correlation ---------------------------------------------------------------------


def test_residual_correlation_examples():
    sc = get_scenario("fig1-exponential")
    for eps in (0.5, 0.1, 2.0**-10):
        assert residual_correlation(sc.model, sc.sites, eps).value < 1e-10
    sc = get_scenario("fig1-triangular")
    rc = residual_correlation(sc.model, sc.sites, 2.0**-14)
    assert rc.value == pytest.approx(0.5, abs=1e-3)
    assert rc.value == pytest.approx(rc.via_ratio, abs=1e-10)
    rc = residual_correlation(Matern(1.5), SiteConfiguration([1.0], 1.0), 0.1)
    assert rc.value == 0.0


@pytest.mark.parametrize("name,limit", [("fig2a-matern32", (E * E - 5) / (E * E - 4)), ("fig2b-matern32", 1.0),
                                        ("fig3b", (E * E - 5) / (E * E - 4)), ("fig3a", 1.0)])
def test_residual_correlation_tracks_limit(name, limit):
    sc = get_scenario(name)
    rc = [residual_correlation(sc.model, sc.sites, 2.0**-k) for k in (6, 10, 14)]
    for r in rc:
        assert r.value == pytest.approx(r.via_ratio, abs=1e-8)
    assert rc[-1].value == pytest.approx(math.sqrt(1 - limit), abs=5e-3)

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from screenlab.experiments import (
    DEFAULT_EPSILONS,
    Lemma1Instance,
    Scenario,
    catalog,
    catalog_models,
    epsilon_grid,
    extrapolate_limit,
    get_scenario,
    lemma1_instances,
    load_catalog,
    run_sweep,
    verify_lemma1,
)
from screenlab.kernels import Exponential, Matern, Triangular
from screenlab.kriging import SiteConfiguration

E = math.e
FIG2A = (E * E - 5) / (E * E - 4)


# -- grids and catalog -------------------------------------------------------------------


def test_default_grid():
    assert DEFAULT_EPSILONS == tuple(2.0**-k for k in range(2, 13))
    assert epsilon_grid(None) == list(DEFAULT_EPSILONS)
    assert epsilon_grid({"k_min": 1, "k_max": 3, "base": 10}) == [0.1, 0.01, 0.001]
    assert epsilon_grid({"k_min": 4, "k_max": 8, "step": 2}) == [2.0**-4, 2.0**-6, 2.0**-8]


@pytest.mark.parametrize("bad", [[0.1, 0.2], [0.1, -0.1], [], {"k_min": 3, "k_max": 2}, {"k_min": 1, "k_max": 2, "scale": 1}, "2..12"])
def test_bad_grids(bad):
    with pytest.raises(ValueError):
        epsilon_grid(bad)


def test_catalog_contents():
    ids = [sc.id for sc in catalog()]
    assert len(ids) == len(set(ids))
    for name in ("fig1-exponential", "fig1-triangular", "fig1-triangular-y0off", "figtensor", "fig2a-matern32",
                 "fig2b-matern32", "matern-nu1-fig2a", "fig3a", "fig3b", "fig3c", "fig3c-spacetime", "fig4a", "fig4b"):
        assert name in ids
    assert get_scenario("fig1-exponential").reference_limit == 1.0
    assert get_scenario("figtensor").fcond_violating
    y0off = get_scenario("fig1-triangular-y0off")
    assert y0off.reference_limit == 1.0 and y0off.sites.far_anchor == (0.8,)
    for name in ("fig3b", "fig4a", "fig4b"):
        assert get_scenario(name).geometry_approximate
    assert get_scenario("matern-nu1-fig2a").fit == "log"


def test_catalog_round_trip():
    for sc in catalog():
        again = Scenario.from_dict(sc.to_dict())
        assert again.model == sc.model and again.sites == sc.sites
        assert again.epsilons == sc.epsilons and again.reference_limit == sc.reference_limit


def test_unknown_scenario_and_keys():
    with pytest.raises(KeyError):
        get_scenario("fig9")
    data = get_scenario("fig1-triangular").to_dict()
    data["colour"] = "red"
    with pytest.raises(ValueError):
        Scenario.from_dict(data)


def test_catalog_file_is_plain_json():
    data = load_catalog()
    assert data["format"] == 1
    assert {m["id"] for m in data["models"]} == {cm.id for cm in catalog_models()}
    assert len(lemma1_instances()) == len(data["lemma1"])


def test_scenarios_have_sane_geometry():
    for sc in catalog():
        assert sc.sites.dim == sc.model.dim
        near, far = sc.sites.materialize(sc.epsilons[0])
        assert near and far


# -- extrapolation ---------------------------------------------------------------------------


def test_extrapolate_constant():
    ex = extrapolate_limit([0.5, 0.25, 0.125], [0.75, 0.75, 0.75])
    assert (ex.limit, ex.uncertainty, ex.verdict) == (0.75, 0.0, "ok")


def test_extrapolate_linear_synthetic():
    eps = [2.0**-k for k in range(2, 13)]
    ex = extrapolate_limit(eps, [0.7 + 0.1 * e for e in eps])
    assert ex.limit == pytest.approx(0.7, abs=1e-6)
    assert ex.exponent == pytest.approx(1.0, abs=1e-3)
    assert ex.uncertainty < 1e-6
    assert ex.aitken == pytest.approx(0.7, abs=1e-6)


@given(st.floats(0.2, 1.0), st.floats(-1.0, 1.0).filter(lambda c: abs(c) > 0.01), st.floats(0.3, 3.0))
def test_extrapolate_power_family(limit, c, q):
    eps = [2.0**-k for k in range(2, 15)]
    ex = extrapolate_limit(eps, [limit + c * e**q for e in eps])
    assert ex.verdict == "ok"
    assert abs(ex.limit - limit) <= max(1e-6, 2 * ex.uncertainty)


def test_extrapolate_log_model():
    eps = np.array([2.0**-k for k in range(2, 21)])
    rho = 1.0 - 0.3 / (-np.log(eps))
    ex = extrapolate_limit(eps, rho, log_factor=True)
    assert ex.model == "log"
    assert ex.limit == pytest.approx(1.0, abs=0.02)


def test_extrapolate_noisy_tail_inconclusive():
    eps = [2.0**-k for k in range(2, 10)]
    rho = [0.8, 0.79, 0.81, 0.78, 0.82, 0.77, 0.83, 0.76]
    assert extrapolate_limit(eps, rho).verdict == "inconclusive"


def test_extrapolate_too_short():
    ex = extrapolate_limit([0.5, 0.25], [0.9, 0.8])
    assert ex.verdict == "insufficient data" and math.isnan(ex.limit)


def test_extrapolate_sorts_and_drops_nan():
    eps = [2.0**-k for k in range(2, 12)]
    rho = [0.7 + 0.1 * e for e in eps]
    eps.append(2.0**-13)
    rho.append(math.nan)
    ex = extrapolate_limit(eps[::-1], rho[::-1])
    assert ex.limit == pytest.approx(0.7, abs=1e-6)


# -- sweeps -------------------------------------------------------------------------------------


def test_sweep_fig1_triangular():
    sw = run_sweep(get_scenario("fig1-triangular"))
    assert sw.verdict == "pass"
    assert abs(sw.extrapolation.limit - 0.75) < 0.01
    eps = sw.epsilons
    assert all(b < a for a, b in zip(eps, eps[1:]))
    tail = [r.ratio for r in sw.successful[-6:]]
    ex = sw.extrapolation
    # the limit sits beyond the last ratio by no more than the spread of the tail
    assert abs(ex.limit - tail[-1]) <= abs(tail[0] - tail[-1]) + ex.uncertainty


def test_sweep_is_deterministic():
    sc = get_scenario("fig2a-matern32")
    a = run_sweep(sc, epsilon_grid({"k_min": 2, "k_max": 10}))
    b = run_sweep(sc, epsilon_grid({"k_min": 2, "k_max": 10}))
    assert a.records == b.records and a.extrapolation == b.extrapolation


def test_sweep_records_failures():
    sc = Scenario("custom", Matern(2.5), SiteConfiguration([1.0, 2.0, 3.0], 1.0, [0.0]))
    sw = run_sweep(sc, [2.0**-k for k in (2, 4, 30, 40)])
    assert [r.ok for r in sw.records] == [True, True, False, False]
    assert sw.records[-1].error
    assert sw.extrapolation is None and sw.verdict == "inconclusive"


def test_sweep_custom_and_reference():
    sw = run_sweep("mine", model=Exponential(), sites=SiteConfiguration([1.0], 1.0, [0.0, 1.0]), epsilons=[0.5, 0.25, 0.125, 0.0625])
    assert sw.verdict == "no reference"
    assert sw.extrapolation.limit == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        run_sweep("mine", model=Exponential())
    with pytest.raises(ValueError):
        run_sweep(get_scenario("fig1-triangular"), [0.1, 0.2])


def test_sweep_ordinary_kriging():
    sw = run_sweep(get_scenario("fig2a-matern32"), epsilon_grid({"k_min": 2, "k_max": 16}), mean_model="ordinary")
    assert sw.mean_model == "ordinary"
    assert all(r.mse_full <= r.mse_near + 1e-10 for r in sw.successful)


def test_general_y0_formula():
    y0 = 2.0
    want = 1 - y0 * y0 / (math.exp(2 * y0) - 1 - 2 * y0 - y0 * y0)
    assert want == pytest.approx(1 - 4 / (math.exp(4) - 1 - 4 - 4))
    sw = run_sweep(get_scenario("fig2a-matern32-y0-2"))
    assert sw.extrapolation.limit == pytest.approx(want, abs=0.01)


def test_fig2b_near_rate():
    sw = run_sweep(get_scenario("fig2b-matern32"))
    r = sw.successful[-1]
    assert r.mse_near / (8 / 3 * r.epsilon**3) == pytest.approx(1.0, abs=0.05)


# -- covariance limits ---------------------------------------------------------------------------


def _inst(name):
    return next(i for i in lemma1_instances() if i.id == name)


def test_lemma1_fig3a():
    inst = _inst("fig3a")
    rep = verify_lemma1(inst)
    assert rep.verdict == "converged"
    m = rep.final.matrix
    assert m[0, 0] == pytest.approx(8 / 3, abs=0.02)
    assert m[1, 3] == pytest.approx(2 / E, abs=0.02)
    assert m[1, 4] == pytest.approx(-1 / E, abs=0.02)
    assert np.allclose(m, m.T)
    devs = [s.max_abs_deviation for s in rep.steps]
    assert devs[-1] < devs[0]


def test_lemma1_fig3c():
    rep = verify_lemma1(_inst("fig3c-matern32"))
    assert rep.final.matrix[0, 0] == pytest.approx((10 * math.sqrt(5) - 8 * math.sqrt(2)) / 3, abs=0.02)
    assert (10 * math.sqrt(5) - 8 * math.sqrt(2)) / 3 == pytest.approx(3.682324, abs=1e-6)


def test_lemma1_spacetime():
    rep = verify_lemma1(_inst("fig3c-spacetime"))
    assert rep.verdict == "converged"
    d = np.diag(rep.final.matrix)
    want = [math.pi**2 / 8, math.pi**2 / 8, 8 / 3 * (2 - math.sqrt(2)) * math.pi**1.5]
    assert d == pytest.approx(want, abs=0.02)
    assert want[2] == pytest.approx(8.698269, abs=1e-6)
    for s in rep.steps:
        assert s.min_eigenvalue > -1e-9


def test_cross_covariance_of_slopes_vanishes():
    inst = Lemma1Instance.from_dict({
        "id": "slopes",
        "model": {"family": "matern", "nu": 1.5, "dim": 2},
        "rows": [
            {"power": 1, "terms": [{"coef": 1, "offset": [0, 2]}, {"coef": -1, "offset": [0, 1]}]},
            {"power": 1, "terms": [{"coef": 1, "anchor": [1, 0], "offset": [1, 0]}, {"coef": -1, "anchor": [1, 0], "offset": [0, 0]}]},
        ],
        "target": [[1, 0], [0, 1]],
    })
    covs = [abs(inst.covariance(2.0**-k)[0, 1]) for k in (4, 8, 12, 16)]
    assert all(b < a for a, b in zip(covs, covs[1:]))
    assert covs[-1] < 1e-3
    assert verify_lemma1(inst).verdict == "converged"


def test_lemma1_bad_instances():
    base = {"id": "x", "model": {"family": "exponential"}, "rows": [{"power": 0, "terms": [{"coef": 1, "offset": [1]}]}], "target": [[1]]}
    Lemma1Instance.from_dict(base)
    with pytest.raises(ValueError):
        Lemma1Instance.from_dict({**base, "target": [[1, 0], [0, 1]]})
    with pytest.raises(ValueError):
        Lemma1Instance.from_dict({**base, "limit": 1})
    with pytest.raises(ValueError):
        verify_lemma1(Lemma1Instance.from_dict(base), [0.1, 0.2])


def test_lemma1_not_converged_reported():
    inst = Lemma1Instance.from_dict({"id": "wrong", "model": {"family": "triangular"},
                                     "rows": [{"power": 0, "terms": [{"coef": 1, "offset": [1]}]}], "target": [[2]]})
    rep = verify_lemma1(inst, [0.1, 0.01])
    assert rep.verdict == "not converged"
    assert rep.final.max_abs_deviation == pytest.approx(1.0)
    assert Triangular().variance == 1.0

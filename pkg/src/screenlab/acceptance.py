"""Acceptance checks shared by the test suite and ``screenlab selfcheck``.

Each ``check_N`` returns a :class:`CriterionResult`; :func:`run_all` runs
them in order.  Tolerances are fixed here and are not configurable.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .experiments import (
    catalog_models,
    extrapolate_limit,
    get_scenario,
    lemma1_instances,
    run_sweep,
    verify_lemma1,
)
from .kernels import Exponential, Matern, SpaceTime, Triangular, eval_cov
from .kriging import SiteConfiguration, ordinary_krige, simple_krige
from .spectral import FrequencyBand, TrigPolynomial, band_fraction, covariance_quadratic_form, fcond_profile, spectral_mse
from .specfun import bessel_k, erfc

__all__ = ["CHECKS", "CriterionResult", "run_all", "run_check"]

E = math.e
FIG2A_LIMIT = (E * E - 5.0) / (E * E - 4.0)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: tuple
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number:2d}: {self.title} ({self.seconds:.1f}s)"


class _Collector:
    def __init__(self):
        self.ok = True
        self.lines = []

    def expect(self, cond, message):
        self.ok = self.ok and bool(cond)
        self.lines.append(("ok   " if cond else "FAIL ") + message)
        return bool(cond)


def _limit_check(c, name, target, tol):
    sw = run_sweep(get_scenario(name))
    ex = sw.extrapolation
    good = ex is not None and ex.verdict == "ok" and abs(ex.limit - target) <= tol
    lim = math.nan if ex is None else ex.limit
    c.expect(good, f"{name}: limit {lim:.6f} vs {target:.6f} (tol {tol:g})")
    return sw


def check_1(c):
    sw = run_sweep(get_scenario("fig1-exponential"))
    dev = max(abs(r.ratio - 1.0) for r in sw.records)
    c.expect(all(r.ok for r in sw.records), "fig1-exponential: every eps solved")
    c.expect(dev <= 1e-10, f"fig1-exponential: max |ratio - 1| = {dev:.2e} over {len(sw.records)} eps")


def check_2(c):
    _limit_check(c, "fig1-triangular", 0.75, 0.01)
    _limit_check(c, "fig1-triangular-y0off", 1.0, 0.01)


def check_3(c):
    _limit_check(c, "figtensor", 1.0 - math.exp(-2.0), 0.01)


def _general_y0(y0):
    return 1.0 - y0 * y0 / (math.exp(2.0 * y0) - 1.0 - 2.0 * y0 - y0 * y0)


def check_4(c):
    sw = _limit_check(c, "fig2a-matern32", FIG2A_LIMIT, 0.005)
    r = sw.successful[-1]
    q = r.mse_near / r.epsilon**2
    c.expect(abs(q - 1.0) <= 0.02, f"fig2a-matern32: mse_near/eps^2 = {q:.6f} at eps = {r.epsilon:.3g}")
    for y0, name in ((0.5, "fig2a-matern32-y0-0.5"), (2.0, "fig2a-matern32-y0-2")):
        _limit_check(c, name, _general_y0(y0), 0.01)


def check_5(c):
    sw = _limit_check(c, "fig2b-matern32", 1.0, 0.005)
    r = sw.successful[-1]
    q = r.mse_near / (8.0 / 3.0 * r.epsilon**3)
    c.expect(abs(q - 1.0) <= 0.05, f"fig2b-matern32: mse_near/((8/3) eps^3) = {q:.6f} at eps = {r.epsilon:.3g}")


def check_6(c):
    sw = _limit_check(c, "matern-nu1-fig2a", 1.0, 0.02)
    good = sw.successful
    eps = [r.epsilon for r in good]
    q = [r.mse_near / (-r.epsilon**2 * math.log(r.epsilon)) for r in good]
    ex = extrapolate_limit(eps, q, log_factor=True)
    c.expect(
        ex.verdict == "ok" and abs(ex.limit - 1.0) <= 0.1,
        f"matern-nu1: mse_near/(-eps^2 log eps) -> {ex.limit:.4f} (log fit; {q[-1]:.4f} at eps = {eps[-1]:.3g})",
    )


def check_7(c):
    _limit_check(c, "fig3a", 1.0, 0.01)
    _limit_check(c, "fig3c", 1.0, 0.01)
    _limit_check(c, "fig3b", FIG2A_LIMIT, 0.01)


def check_8(c):
    _limit_check(c, "fig3c-spacetime", FIG2A_LIMIT, 0.02)
    _limit_check(c, "fig4b", FIG2A_LIMIT, 0.02)
    _limit_check(c, "fig4a", 1.0, 0.02)


def check_9(c):
    named = {
        "fig3a": [((0, 0), 8.0 / 3.0)],
        "fig3c-matern32": [((0, 0), (10.0 * math.sqrt(5.0) - 8.0 * math.sqrt(2.0)) / 3.0)],
        "fig3c-spacetime": [
            ((0, 0), math.pi**2 / 8.0),
            ((2, 2), 8.0 / 3.0 * (2.0 - math.sqrt(2.0)) * math.pi**1.5),
        ],
    }
    seen = set()
    for inst in lemma1_instances():
        rep = verify_lemma1(inst)
        fin = rep.final
        c.expect(
            rep.verdict == "converged" and fin.max_abs_deviation < 0.02,
            f"{inst.id}: max deviation {fin.max_abs_deviation:.4f} at eps = {fin.epsilon:.3g}",
        )
        c.expect(fin.min_eigenvalue > 0, f"{inst.id}: smallest eigenvalue {fin.min_eigenvalue:.4g} > 0")
        for (i, j), value in named.get(inst.id, []):
            got = fin.matrix[i, j]
            c.expect(abs(got - value) < 0.02, f"{inst.id}[{i},{j}] = {got:.5f} vs {value:.5f}")
        seen.add(inst.id)
    c.expect(set(named) <= seen, "all required instances present")


def _isometry_models():
    return [Exponential(), Triangular(), Matern(0.5), Matern(1.0), Matern(1.5), Matern(2.5)]


def check_10(c, n=20, seed=20240601):
    rng = np.random.default_rng(seed)
    for m in _isometry_models():
        worst = 0.0
        for _ in range(n):
            k = int(rng.integers(1, 6))
            nodes = rng.uniform(-2.0, 2.0, k)
            coeffs = rng.normal(size=k)
            p = TrigPolynomial(nodes, coeffs)
            a = spectral_mse(p, m).value
            b = covariance_quadratic_form(p, m)
            worst = max(worst, abs(a - b) / abs(b))
        label = m.family + (f" nu={m.nu:g}" if isinstance(m, Matern) else "")
        c.expect(worst <= 1e-6, f"{label}: worst relative isometry gap {worst:.2e} over {n} polynomials")


def _band_formula(w0):
    return 2.0 / math.pi * (math.atan(w0) - w0 / (1.0 + w0 * w0))


def check_11(c):
    sc = get_scenario("fig2a-matern32")
    eps = 2.0**-10
    near, _ = sc.sites.materialize(eps)
    poly = TrigPolynomial.residual(simple_krige(sc.model, near))
    for w0 in (0.5, 1.0, 2.0):
        got = band_fraction(poly, sc.model, FrequencyBand(w0))
        want = _band_formula(w0)
        c.expect(abs(got - want) <= 1e-3, f"omega0 = {w0:g}: band fraction {got:.6f} vs {want:.6f}")


def check_12(c):
    for cm in catalog_models():
        prof = fcond_profile(cm.model, 1.0)
        c.expect(prof.verdict == cm.fcond, f"{cm.id}: {prof.verdict} (expected {cm.fcond})")


def check_13(c):
    from .specfun import ext

    # monotone information across the catalog
    worst = -math.inf
    for name in ("fig1-triangular", "figtensor", "fig2a-matern32", "fig2b-matern32", "fig3a", "fig3b", "fig3c", "fig4b"):
        sc = get_scenario(name)
        for eps in (0.25, 2.0**-6, 2.0**-12):
            sw = run_sweep(sc, [eps])
            r = sw.records[0]
            worst = max(worst, r.mse_full - r.mse_near)
    c.expect(worst <= 1e-10, f"monotone information: max mse_full - mse_near = {worst:.2e}")

    # BLP orthogonality: cov(residual, Z(s_i)) = 0 relative to the scales involved
    worst = 0.0
    rng = np.random.default_rng(7)
    for m in (Matern(1.5, dim=2), SpaceTime(), Exponential(dim=2)):
        sites = [tuple(p) for p in rng.uniform(-1.0, 1.0, (5, 2))]
        sol = simple_krige(m, sites)
        k0 = eval_cov(m, (0.0, 0.0))
        for i, si in enumerate(sites):
            cv = eval_cov(m, si) - sum(w * eval_cov(m, tuple(a - b for a, b in zip(si, sj))) for w, sj in zip(sol.weights, sites))
            worst = max(worst, abs(cv) / math.sqrt(max(sol.mse, 1e-300) * k0))
    c.expect(worst <= 1e-8, f"BLP orthogonality: max |corr(residual, Z(s))| = {worst:.2e}")

    # ordinary kriging weights sum to one
    worst = 0.0
    for m, sites in (
        (Matern(1.5), [0.01, 0.02, 1.0]),
        (Exponential(), [0.1, 0.5, 1.3, 2.0]),
        (SpaceTime(), [(0.001, 0.0), (0.002, 0.001), (0.002, -0.001), (1.0, 0.0)]),
    ):
        sol = ordinary_krige(m, sites)
        total = ext(0.0)
        for w in sol.weights:
            total = total + w
        worst = max(worst, abs(float(total - 1.0)))
    c.expect(worst <= 1e-14, f"ordinary kriging: max |sum w - 1| = {worst:.2e}")

    # mirror-symmetric geometries give equal weights on mirror pairs
    worst = 0.0
    for name, pair in (("fig3b", (0, 2)), ("fig3c", (1, 2)), ("fig3c-spacetime", (1, 2))):
        sc = get_scenario(name)
        for eps in (0.1, 2.0**-8):
            near, far = sc.sites.materialize(eps)
            sol = simple_krige(sc.model, near + far)
            w = sol.weights
            worst = max(worst, abs(w[pair[0]] - w[pair[1]]) / max(1.0, float(np.max(np.abs(w)))))
    c.expect(worst <= 1e-10, f"mirror symmetry: max weight difference {worst:.2e}")

    # Bessel K recurrence
    worst = 0.0
    for nu, x in zip(rng.uniform(1.0, 4.0, 200), np.exp(rng.uniform(math.log(1e-3), math.log(50.0), 200))):
        lhs = bessel_k(nu + 1.0, x)
        rhs = bessel_k(nu - 1.0, x) + 2.0 * nu / x * bessel_k(nu, x)
        worst = max(worst, abs(lhs - rhs) / abs(lhs))
    c.expect(worst <= 1e-10, f"K_nu recurrence: worst relative residual {worst:.2e}")

    # erfc symmetry and small-x expansion
    xs = np.linspace(-6.0, 6.0, 1201)
    sym = max(abs(erfc(x) + erfc(-x) - 2.0) for x in xs)
    c.expect(sym <= 1e-15, f"erfc(x) + erfc(-x) = 2: max deviation {sym:.2e}")
    ratio = 0.0
    for x in (1e-1, 3e-2, 1e-2):
        approx = 1.0 - 2.0 / math.sqrt(math.pi) * (x - x**3 / 3.0)
        ratio = max(ratio, abs(erfc(x) - approx) / x**5)
    c.expect(ratio <= 0.2, f"erfc small-x expansion: max |remainder|/x^5 = {ratio:.4f}")

    # space-time kernel continuous across the spatial axis
    st = SpaceTime()
    gaps = []
    for t in (1e-4, 1e-6, 1e-8):
        gaps.append(max(abs(st.cov((x, t)) - st.cov((x, 0.0))) for x in np.linspace(0.1, 3.0, 59)))
    c.expect(
        gaps[-1] <= 1e-6 and gaps[0] >= gaps[1] >= gaps[2],
        "space-time axis continuity: sup |K(x,t) - K(x,0)| = " + ", ".join(f"{g:.1e}" for g in gaps),
    )

    # band fraction monotone in the radius and within [0, 1]
    m = Matern(1.5)
    sol = simple_krige(m, [0.05, 1.0])
    poly = TrigPolynomial.residual(sol)
    fr = [band_fraction(poly, m, FrequencyBand(w)) for w in np.geomspace(0.1, 1e3, 13)]
    ok = all(0.0 <= f <= 1.0 for f in fr) and all(b >= a - 1e-12 for a, b in zip(fr, fr[1:]))
    c.expect(ok, "band fraction monotone in omega0 and within [0, 1]")


CHECKS: dict = {
    1: ("fig1-exponential ratio is exactly 1", check_1),
    2: ("fig1-triangular limits 3/4 and (y0 = 0.8) 1", check_2),
    3: ("figtensor limit 1 - exp(-2)", check_3),
    4: ("fig2a-matern32 limit, near rate and general y0", check_4),
    5: ("fig2b-matern32 limit and (8/3) eps^3 rate", check_5),
    6: ("matern nu = 1 logarithmic rate and limit", check_6),
    7: ("fig3a, fig3c and fig3b limits", check_7),
    8: ("space-time kernel limits", check_8),
    9: ("covariance limits of rescaled combinations", check_9),
    10: ("spectral isometry", check_10),
    11: ("band fraction of the fig2a near residual", check_11),
    12: ("slow-variation verdicts", check_12),
    13: ("property suite", check_13),
}


def run_check(number: int) -> CriterionResult:
    title, fn = CHECKS[number]
    c = _Collector()
    t0 = time.perf_counter()
    try:
        fn(c)
    except Exception as exc:  # report, do not hide
        c.expect(False, f"raised {type(exc).__name__}: {exc}")
    return CriterionResult(number, title, c.ok, tuple(c.lines), time.perf_counter() - t0)


def run_all(numbers=None, progress: Callable = None) -> list:
    out = []
    for n in numbers or sorted(CHECKS):
        res = run_check(n)
        if progress is not None:
            progress(res)
        out.append(res)
    return out

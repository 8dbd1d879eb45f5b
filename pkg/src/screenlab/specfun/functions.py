"""Log-gamma, complementary error function and a few zeta-series helpers."""

import math

from .extended import ext_erfc

__all__ = ["log_gamma", "erfc", "EULER_GAMMA"]

EULER_GAMMA = 0.5772156649015329

# Bernoulli numbers B_2 .. B_20
_BERNOULLI = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
]


def _zeta_minus_one(k, n_direct=10):
    """zeta(k) - 1 for integer k >= 2 by Euler-Maclaurin summation."""
    n = n_direct
    s = math.fsum(j ** -float(k) for j in range(2, n))
    tail = n ** (1.0 - k) / (k - 1) + 0.5 * n ** -float(k)
    # rising factorial k (k+1) ... (k+2j-2) / (2j)!
    rising = float(k)
    fact = 2.0
    for j, b in enumerate(_BERNOULLI[:8], start=1):
        tail += b / fact * rising * n ** (-k - 2.0 * j + 1.0)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
        fact *= (2 * j + 1) * (2 * j + 2)
    return s + tail


_ZETA_M1 = [0.0, 0.0] + [_zeta_minus_one(k) for k in range(2, 64)]


def _lgamma1p_small(z):
    """log Gamma(1 + z) for |z| <= 1/2."""
    # log Gamma(1+z) = -log1p(z) + z (1 - gamma) + sum_k (zeta(k) - 1) (-z)^k / k
    mz = -z
    p = mz
    s = 0.0
    for k in range(2, 64):
        p *= mz
        term = _ZETA_M1[k] * p / k
        s += term
        if abs(term) <= 1e-18 * abs(s):
            break
    return -math.log1p(z) + z * (1.0 - EULER_GAMMA) + s


def _lgamma_odd_even(mu):
    """Even part of log Gamma(1 + mu) and odd part divided by mu, |mu| <= 1/2."""
    even = 0.0
    odd_mu = -EULER_GAMMA
    p = mu  # mu**(k-1)
    for k in range(2, 64):
        zeta_k = 1.0 + _ZETA_M1[k]
        if k % 2 == 0:
            even += zeta_k * p * mu / k
        else:
            odd_mu -= zeta_k * p / k
        p *= mu
        if abs(p) < 1e-18:
            break
    return even, odd_mu


def temme_gammas(mu):
    """Auxiliary gamma combinations for Temme's Bessel series, |mu| <= 1/2.

    Returns ``(gam1, gam2, 1/Gamma(1+mu), 1/Gamma(1-mu))`` with
    ``gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)`` and
    ``gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2``.
    """
    even, odd_mu = _lgamma_odd_even(mu)
    odd = odd_mu * mu
    scale = math.exp(-even)
    sinh_over = odd_mu if odd == 0.0 else math.sinh(odd) / mu
    gam1 = scale * sinh_over
    gam2 = scale * math.cosh(odd)
    gampl = scale * math.exp(-odd)
    gammi = scale * math.exp(odd)
    return gam1, gam2, gampl, gammi


def log_gamma(x):
    """Natural log of the gamma function for real ``x > 0``.

    Accurate to a few ulps in relative terms on [0.5, 50], including the
    neighbourhoods of the zeros at 1 and 2.
    """
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma requires a finite x > 0, got {x!r}")
    if x < 0.5:
        return _lgamma1p_small(x) - math.log(x)
    if x < 1.5:
        return _lgamma1p_small(x - 1.0)
    if x < 2.5:
        z = x - 2.0
        return math.log1p(z) + _lgamma1p_small(z)
    if x < 10.0:
        prod = 1.0
        while x >= 2.5:
            x -= 1.0
            prod *= x
        return math.log(prod) + log_gamma(x)
    # Stirling series
    s = (x - 0.5) * math.log(x) - x + 0.9189385332046728
    inv = 1.0 / x
    inv2 = inv * inv
    p = inv
    for j, b in enumerate(_BERNOULLI[:8], start=1):
        s += b / (2 * j * (2 * j - 1)) * p
        p *= inv2
    return s


def erfc(x):
    """Complementary error function, accurate to about one ulp.

    Evaluated through the double-double routine and rounded, so that
    ``erfc(x) + erfc(-x) == 2`` up to rounding of the final result.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("erfc of NaN")
    if x == math.inf:
        return 0.0
    if x == -math.inf:
        return 2.0
    return float(ext_erfc(x))

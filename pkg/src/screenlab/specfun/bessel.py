"""Modified Bessel function of the second kind.

``bessel_k(nu, x)`` uses three routes:

* half-integer orders: the terminating closed form
  ``K_{n+1/2}(x) = sqrt(pi/(2x)) e^{-x} sum_k (n+k)!/(k!(n-k)!) (2x)^{-k}``;
* ``x <= 2``: Temme's series for ``K_mu, K_{mu+1}`` with ``|mu| <= 1/2``;
* ``x > 2``: Steed's continued fraction (Temme's CF2 form).

Both general routes finish with upward recurrence in the order, which is
stable for ``K``.  The crossover ``x = 2`` balances the two error sources:
below it the CF2 iteration count grows like ``1/x`` and above it the Temme
series loses digits to cancellation roughly like ``e^{x}``.  With the
crossover at 2 both stay within a few ulps.

``ext_xnu_bessel_k`` returns ``x**nu K_nu(x)`` in double-double for the
orders the Matérn kernels need in extended precision (half-integers and
integers).
"""

import math

from .extended import DD_EULER, ExtendedReal, ext, ext_exp, ext_log
from .functions import log_gamma, temme_gammas

__all__ = ["bessel_k", "ext_xnu_bessel_k", "half_integer_order", "xnu_bessel_k"]

_EPS = 1e-17
_MAXIT = 10000
_CROSSOVER = 2.0


def half_integer_order(nu):
    """Return n if nu == n + 1/2 for an integer n >= 0, else None."""
    twice = 2.0 * abs(nu)
    if twice == math.floor(twice) and int(twice) % 2 == 1:
        return (int(twice) - 1) // 2
    return None


def _half_integer_poly(n):
    """Coefficients a_k = (n+k)! / (k! (n-k)! 2^k), k = 0..n."""
    return [
        math.factorial(n + k) / (math.factorial(k) * math.factorial(n - k) * 2.0**k)
        for k in range(n + 1)
    ]


def _kv_half_integer(n, x):
    coeffs = _half_integer_poly(n)
    s = 0.0
    for a in reversed(coeffs):
        s = s / x + a
    return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) * s


def _temme_series(mu, x):
    x2 = 0.5 * x
    pimu = math.pi * mu
    fact = 1.0 if abs(pimu) < _EPS else pimu / math.sin(pimu)
    d = -math.log(x2)
    e = mu * d
    fact2 = 1.0 if abs(e) < _EPS else math.sinh(e) / e
    gam1, gam2, gampl, gammi = temme_gammas(mu)
    ff = fact * (gam1 * math.cosh(e) + gam2 * fact2 * d)
    total = ff
    e = math.exp(e)
    p = 0.5 * e / gampl
    q = 0.5 / (e * gammi)
    c = 1.0
    d = x2 * x2
    total1 = p
    for i in range(1, _MAXIT):
        ff = (i * ff + p + q) / (i * i - mu * mu)
        c *= d / i
        p /= i - mu
        q /= i + mu
        delta = c * ff
        total += delta
        total1 += c * (p - i * ff)
        if abs(delta) < abs(total) * _EPS:
            break
    else:  # pragma: no cover - series always converges for x <= 2
        raise ArithmeticError("Temme series failed to converge")
    return total, total1 * (2.0 / x)


def _steed_cf2(mu, x):
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25 - mu * mu
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, _MAXIT):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:  # pragma: no cover
        raise ArithmeticError("Steed continued fraction failed to converge")
    h = a1 * h
    kmu = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = kmu * (mu + x + 0.5 - h) / x
    return kmu, k1


def bessel_k(nu, x):
    """Modified Bessel function of the second kind ``K_nu(x)`` for real x > 0.

    Parameters
    ----------
    nu : float
        Order; ``K_{-nu} = K_nu`` so the sign is ignored.
    x : float
        Argument, strictly positive.

    Returns
    -------
    float
    """
    nu = float(nu)
    x = float(x)
    if not (math.isfinite(nu) and math.isfinite(x)):
        raise ValueError("bessel_k requires finite arguments")
    if x <= 0.0:
        raise ValueError(f"bessel_k requires x > 0, got {x!r}")
    nu = abs(nu)
    n_half = half_integer_order(nu)
    if n_half is not None:
        return _kv_half_integer(n_half, x)
    nl = int(nu + 0.5)
    mu = nu - nl
    if x <= _CROSSOVER:
        kmu, k1 = _temme_series(mu, x)
    else:
        kmu, k1 = _steed_cf2(mu, x)
    xi2 = 2.0 / x
    for i in range(1, nl + 1):
        kmu, k1 = k1, (mu + i) * xi2 * k1 + kmu
    return kmu


def xnu_bessel_k(nu, x):
    """``x**nu K_nu(x)``, continuous at x = 0 for nu > 0."""
    if x == 0.0:
        if nu <= 0.0:
            raise ValueError("x**nu K_nu(x) diverges at 0 for nu <= 0")
        return math.exp(log_gamma(nu)) * 2.0 ** (nu - 1.0)
    return x**nu * bessel_k(nu, x)


# -- extended precision ---------------------------------------------------

_DD_SQRT_PI_2 = ExtendedReal(1.2533141373155003, -9.164289990229583e-17)
_EXT_SERIES_LIMIT = 8.0


def _ext_half_integer_xnu(n, x):
    """x**(n+1/2) K_{n+1/2}(x) = sqrt(pi/2) e^{-x} sum_k a_k x^(n-k)."""
    poly = ext(0.0)
    for a in _half_integer_poly(n):
        poly = poly * x + a
    return _DD_SQRT_PI_2 * ext_exp(-x) * poly


def _ext_integer_xnu(n, x):
    """x**n K_n(x) in double-double for integer n >= 0, by the ascending series."""
    x = ext(x)
    half = x * 0.5
    q = half * half  # x^2/4
    log_half = ext_log(half)
    # finite part: 1/2 (x/2)^(-n) sum_{k<n} (n-k-1)!/k! (-x^2/4)^k, times x^n
    finite = ext(0.0)
    for k in range(n):
        finite = finite + (-q) ** k * (math.factorial(n - k - 1) / math.factorial(k))
    finite = finite * 0.5 * ext(2.0) ** n
    # I_n(x) = (x/2)^n sum q^k / (k! (n+k)!)
    psi_k = -DD_EULER  # psi(k+1) at k = 0
    psi_nk = -DD_EULER + sum((1.0 / ext(j) for j in range(1, n + 1)), ext(0.0))
    term = ext(1.0) / math.factorial(n)
    i_sum = ext(0.0)
    psi_sum = ext(0.0)
    k = 0
    while True:
        i_sum = i_sum + term
        psi_sum = psi_sum + term * (psi_k + psi_nk)
        k += 1
        term = term * q / (k * (n + k))
        psi_k = psi_k + 1.0 / ext(k)
        psi_nk = psi_nk + 1.0 / ext(n + k)
        if abs(term.hi) < 1e-34 * abs(i_sum.hi) or k > 500:
            break
    half_n = half**n
    # K_n = finite_part + (-1)^(n+1) ln(x/2) I_n + (-1)^n 1/2 (x/2)^n sum [psi+psi] q^k/(k!(n+k)!)
    sign = -1.0 if n % 2 == 0 else 1.0
    log_part = sign * log_half * half_n * i_sum
    psi_part = (-sign) * 0.5 * half_n * psi_sum
    return finite + x**n * (log_part + psi_part)


def ext_xnu_bessel_k(nu, x):
    """``x**nu K_nu(x)`` in double-double.

    Parameters
    ----------
    nu : float
        Order, a positive half-integer or a nonnegative integer.
    x : ExtendedReal or float
        Nonnegative argument.  ``x = 0`` is allowed when ``nu > 0``.

    Raises
    ------
    NotImplementedError
        For orders with no double-double route.
    """
    x = ext(x)
    if x.hi < 0.0:
        raise ValueError("negative argument")
    n_half = half_integer_order(nu)
    if n_half is not None:
        return _ext_half_integer_xnu(n_half, x)
    if float(nu) == math.floor(nu) and nu >= 0:
        n = int(nu)
        if x.hi == 0.0:
            if n == 0:
                raise ValueError("K_0 diverges at 0")
            return ext(2.0) ** (n - 1) * math.factorial(n - 1)
        if x.hi > _EXT_SERIES_LIMIT:
            return ext(xnu_bessel_k(n, x.hi))
        return _ext_integer_xnu(n, x)
    raise NotImplementedError(f"no extended-precision route for order {nu}")

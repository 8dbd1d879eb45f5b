"""Double-double ("extended") real arithmetic.

An :class:`ExtendedReal` is an unevaluated sum ``hi + lo`` of two doubles with
``|lo| <= ulp(hi)/2``, giving roughly 32 significant decimal digits.  The
algorithms are the classical error-free transformations of Dekker and Knuth
as used in the QD library.  Everything here is pure Python; the matrices in
this package are tiny, so speed is not a concern.
"""

from __future__ import annotations

import math
from numbers import Real

__all__ = [
    "ExtendedReal",
    "ext",
    "ext_sqrt",
    "ext_exp",
    "ext_expm1",
    "ext_log",
    "ext_erfc",
    "ext_erfcx",
    "DD_PI",
    "DD_LN2",
    "DD_SQRT_PI",
    "DD_EULER",
]

_SPLITTER = 134217729.0  # 2**27 + 1
_SPLIT_THRESH = 6.69692879491417e299  # 2**996


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    if a > _SPLIT_THRESH or a < -_SPLIT_THRESH:
        a *= 3.7252902984619140625e-09  # 2**-28
        t = _SPLITTER * a
        hi = t - (t - a)
        lo = a - hi
        return hi * 268435456.0, lo * 268435456.0
    t = _SPLITTER * a
    hi = t - (t - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


class ExtendedReal:
    """Double-double number ``hi + lo``.

    Supports ``+ - * /``, unary minus, ``abs``, comparisons and mixing with
    ordinary Python numbers.  ``float(x)`` rounds to the nearest double.
    """

    __slots__ = ("hi", "lo")

    def __init__(self, hi=0.0, lo=0.0):
        hi = float(hi)
        lo = float(lo)
        if lo != 0.0:
            hi, lo = _quick_two_sum(hi, lo) if abs(hi) >= abs(lo) else _two_sum(hi, lo)
        self.hi = hi
        self.lo = lo

    @classmethod
    def _raw(cls, hi, lo):
        obj = object.__new__(cls)
        obj.hi = hi
        obj.lo = lo
        return obj

    # -- conversions ---------------------------------------------------
    def __float__(self):
        return self.hi + self.lo

    def __repr__(self):
        return f"ExtendedReal({self.hi!r}, {self.lo!r})"

    def __bool__(self):
        return self.hi != 0.0

    def is_finite(self):
        return math.isfinite(self.hi)

    # -- arithmetic ----------------------------------------------------
    def __neg__(self):
        return ExtendedReal._raw(-self.hi, -self.lo)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.hi < 0.0 else self

    def __add__(self, other):
        if isinstance(other, ExtendedReal):
            s1, s2 = _two_sum(self.hi, other.hi)
            t1, t2 = _two_sum(self.lo, other.lo)
            s2 += t1
            s1, s2 = _quick_two_sum(s1, s2)
            s2 += t2
            return ExtendedReal._raw(*_quick_two_sum(s1, s2))
        if isinstance(other, Real):
            s1, s2 = _two_sum(self.hi, float(other))
            s2 += self.lo
            return ExtendedReal._raw(*_quick_two_sum(s1, s2))
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, (ExtendedReal, Real)):
            return self + (-other)
        return NotImplemented

    def __rsub__(self, other):
        if isinstance(other, Real):
            return (-self) + other
        return NotImplemented

    def __mul__(self, other):
        if isinstance(other, ExtendedReal):
            p1, p2 = _two_prod(self.hi, other.hi)
            p2 += self.hi * other.lo + self.lo * other.hi
            return ExtendedReal._raw(*_quick_two_sum(p1, p2))
        if isinstance(other, Real):
            b = float(other)
            p1, p2 = _two_prod(self.hi, b)
            p2 += self.lo * b
            return ExtendedReal._raw(*_quick_two_sum(p1, p2))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Real):
            other = ExtendedReal._raw(float(other), 0.0)
        if not isinstance(other, ExtendedReal):
            return NotImplemented
        if other.hi == 0.0:
            raise ZeroDivisionError("ExtendedReal division by zero")
        q1 = self.hi / other.hi
        r = self - other * q1
        q2 = r.hi / other.hi
        r = r - other * q2
        q3 = r.hi / other.hi
        q1, q2 = _quick_two_sum(q1, q2)
        return ExtendedReal._raw(q1, q2) + q3

    def __rtruediv__(self, other):
        if isinstance(other, Real):
            return ExtendedReal._raw(float(other), 0.0) / self
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("only integer powers are supported")
        if n < 0:
            return 1.0 / (self ** (-n))
        result = ExtendedReal._raw(1.0, 0.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def ldexp(self, k):
        """Exact scaling by ``2**k``."""
        return ExtendedReal._raw(math.ldexp(self.hi, k), math.ldexp(self.lo, k))

    # -- comparisons ---------------------------------------------------
    def _cmp(self, other):
        if isinstance(other, ExtendedReal):
            d = self - other
        elif isinstance(other, Real):
            d = self - float(other)
        else:
            return NotImplemented
        return (d.hi > 0.0) - (d.hi < 0.0)

    def __eq__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return c if c is NotImplemented else c >= 0

    def __hash__(self):
        return hash((self.hi, self.lo))


def ext(x) -> ExtendedReal:
    """Promote a number (or pass through an ExtendedReal)."""
    if isinstance(x, ExtendedReal):
        return x
    return ExtendedReal._raw(float(x), 0.0)


DD_LN2 = ExtendedReal(0.6931471805599453, 2.3190468138462996e-17)
DD_PI = ExtendedReal(3.141592653589793, 1.2246467991473532e-16)
DD_SQRT_PI = ExtendedReal(1.772453850905516, -7.666586499825799e-17)
DD_INV_SQRT_PI = ExtendedReal(0.5641895835477563, 7.66772980658294e-18)
DD_EULER = ExtendedReal(0.5772156649015329, -4.942915152430645e-18)

_EPS = 4.93038065763132e-32  # 2**-104


def ext_sqrt(a) -> ExtendedReal:
    a = ext(a)
    if a.hi < 0.0:
        raise ValueError("ext_sqrt of a negative number")
    if a.hi == 0.0:
        return ExtendedReal._raw(0.0, 0.0)
    x = 1.0 / math.sqrt(a.hi)
    ax = a.hi * x
    p1, p2 = _two_prod(ax, ax)
    diff = a - ExtendedReal._raw(p1, p2)
    return ext(ax) + diff.hi * (x * 0.5)


def _expm1_reduced(r):
    """expm1 for |r| <= ln2/2**10 by Taylor series (r is ExtendedReal)."""
    s = r
    term = r
    k = 1
    while True:
        k += 1
        term = term * r / k
        s = s + term
        if abs(term.hi) <= _EPS * abs(s.hi) or k > 40:
            break
    return s


_EXP_SQUARINGS = 10


def ext_expm1(a) -> ExtendedReal:
    """``exp(a) - 1`` without cancellation for small ``a``."""
    a = ext(a)
    if abs(a.hi) > 0.34657359027997264:  # ln2 / 2
        return ext_exp(a) - 1.0
    s = _expm1_reduced(a.ldexp(-_EXP_SQUARINGS))
    for _ in range(_EXP_SQUARINGS):
        s = s * (s + 2.0)
    return s


def ext_exp(a) -> ExtendedReal:
    a = ext(a)
    if a.hi > 709.0:
        raise OverflowError("ext_exp overflow")
    if a.hi < -745.0:
        return ExtendedReal._raw(0.0, 0.0)
    k = math.floor(a.hi / DD_LN2.hi + 0.5)
    r = a - DD_LN2 * k
    s = _expm1_reduced(r.ldexp(-_EXP_SQUARINGS))
    for _ in range(_EXP_SQUARINGS):
        s = s * (s + 2.0)
    return (s + 1.0).ldexp(k)


def ext_log(a) -> ExtendedReal:
    a = ext(a)
    if a.hi <= 0.0:
        raise ValueError("ext_log of a non-positive number")
    y = ext(math.log(a.hi))
    # one Newton step on exp(y) = a doubles the number of correct digits
    return y + a * ext_exp(-y) - 1.0


def _erf_series_scaled(z):
    """sum_n 2^n z^(2n+1) / (2n+1)!!  so that erf(z) = 2/sqrt(pi) e^(-z^2) * sum."""
    z2 = z * z * 2.0
    term = z
    s = z
    n = 0
    while True:
        n += 1
        term = term * z2 / (2 * n + 1)
        s = s + term
        if abs(term.hi) <= _EPS * abs(s.hi) or n > 400:
            break
    return s


_CF_SWITCH = 2.5


def _erfcx_cf(z):
    """Continued fraction for exp(z^2) erfc(z), z >= _CF_SWITCH."""
    # erfc(z) = exp(-z^2)/sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))
    zf = z.hi
    depth = int(40 + 1600.0 / (zf * zf))
    t = z
    for k in range(depth, 0, -1):
        t = z + (0.5 * k) / t
    return DD_INV_SQRT_PI / t


def ext_erfcx(z) -> ExtendedReal:
    """Scaled complementary error function ``exp(z**2) * erfc(z)`` for z >= 0."""
    z = ext(z)
    if z.hi < 0.0:
        raise ValueError("ext_erfcx is only provided for z >= 0")
    if z.hi >= _CF_SWITCH:
        return _erfcx_cf(z)
    ez2 = ext_exp(z * z)
    erf = 2.0 * DD_INV_SQRT_PI * _erf_series_scaled(z) / ez2
    return ez2 * (1.0 - erf)


def ext_erfc(z) -> ExtendedReal:
    z = ext(z)
    if z.hi < 0.0:
        return 2.0 - ext_erfc(-z)
    if z.hi >= _CF_SWITCH:
        if z.hi > 27.3:
            return ExtendedReal._raw(0.0, 0.0)
        return ext_exp(-(z * z)) * _erfcx_cf(z)
    erf = 2.0 * DD_INV_SQRT_PI * _erf_series_scaled(z) * ext_exp(-(z * z))
    return 1.0 - erf

"""Exact and precision-tracked scalar types.

Two coefficient kinds live here besides ``Fraction`` and ``mpmath.mpf``:
``QuadraticNumber`` for exact arithmetic in Q(sqrt(D)), and ``PAdicNumber``
for truncated p-adic numbers that know how many digits they carry.
"""

from fractions import Fraction
from math import gcd, isqrt

import mpmath


class PrecisionError(ArithmeticError):
    """Raised when a p-adic comparison falls below the tracked precision."""


def valuation(x, p):
    """p-adic valuation of a nonzero integer or Fraction."""
    x = Fraction(x)
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def exact_sqrt(x):
    """Square root of a nonnegative Fraction when it is rational, else None."""
    x = Fraction(x)
    if x < 0:
        return None
    rn, rd = isqrt(x.numerator), isqrt(x.denominator)
    if rn * rn == x.numerator and rd * rd == x.denominator:
        return Fraction(rn, rd)
    return None


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"not a rational: {x!r}")


class QuadraticNumber:
    """a + b*sqrt(D) with rational a, b and squarefree D != 1."""

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b, D):
        self.a = _as_fraction(a)
        self.b = _as_fraction(b)
        self.D = int(D)

    def _coerce(self, other):
        if isinstance(other, QuadraticNumber):
            if other.D != self.D:
                raise ValueError("mixing different quadratic fields")
            return other
        if isinstance(other, (int, Fraction)):
            return QuadraticNumber(other, 0, self.D)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.D)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.a - o.a, self.b - o.b, self.D)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticNumber(self.a * o.a + self.D * self.b * o.b,
                               self.a * o.b + self.b * o.a, self.D)

    __rmul__ = __mul__

    def conj(self):
        return QuadraticNumber(self.a, -self.b, self.D)

    def norm(self):
        return self.a * self.a - self.D * self.b * self.b

    def trace(self):
        return 2 * self.a

    def inverse(self):
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadraticNumber(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, e):
        if not isinstance(e, int):
            return NotImplemented
        base = self if e >= 0 else self.inverse()
        out = QuadraticNumber(1, 0, self.D)
        for _ in range(abs(e)):
            out = out * base
        return out

    def __eq__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __bool__(self):
        return bool(self.a) or bool(self.b)

    def is_rational(self):
        return self.b == 0

    def embed(self, sign=1):
        """Image under sqrt(D) -> sign*sqrt(D), at the current mpmath precision."""
        root = mpmath.sqrt(mpmath.mpf(self.D)) if self.D > 0 else mpmath.sqrt(mpmath.mpc(self.D))
        a = mpmath.mpf(self.a.numerator) / self.a.denominator
        b = mpmath.mpf(self.b.numerator) / self.b.denominator
        return a + sign * b * root

    def __repr__(self):
        return f"QuadraticNumber({self.a}, {self.b}, D={self.D})"

    def __str__(self):
        if self.b == 0:
            return str(self.a)
        return f"{self.a}+{self.b}*sqrt({self.D})"


class PAdicNumber:
    """A p-adic number p^e * r known modulo p^prec (absolute precision)."""

    __slots__ = ("p", "e", "r", "prec")

    def __init__(self, p, e, r, prec):
        self.p = p
        self.e = e
        self.prec = prec
        m = prec - e
        self.r = r % (p ** m) if m > 0 else 0

    @classmethod
    def from_rational(cls, x, p, prec):
        x = Fraction(x)
        if x == 0:
            return cls(p, prec, 0, prec)
        v = valuation(x, p)
        num = x.numerator // p ** max(v, 0)
        den = x.denominator // p ** max(-v, 0)
        m = prec - v
        if m <= 0:
            return cls(p, prec, 0, prec)
        mod = p ** m
        return cls(p, v, num * pow(den, -1, mod), prec)

    def _coerce(self, other):
        if isinstance(other, PAdicNumber):
            if other.p != self.p:
                raise ValueError("mixing different primes")
            return other
        if isinstance(other, (int, Fraction)):
            return PAdicNumber.from_rational(other, self.p, max(self.prec, 0) + 64)
        return NotImplemented

    def _lower_valuation(self):
        m = self.prec - self.e
        if m <= 0 or self.r == 0:
            return self.prec
        r, v = self.r, 0
        while r % self.p == 0:
            r //= self.p
            v += 1
        return self.e + v

    def valuation(self):
        m = self.prec - self.e
        if m <= 0 or self.r == 0:
            raise PrecisionError(f"value is O({self.p}^{self.prec}); valuation unknown")
        return self._lower_valuation()

    def is_zero(self):
        """True only when exactly representable zero is impossible; raises when undecidable."""
        self.valuation()
        return False

    def __bool__(self):
        return not self.is_zero()

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.p
        e = min(self.e, o.e)
        prec = min(self.prec, o.prec)
        r = self.r * p ** (self.e - e) + o.r * p ** (o.e - e)
        return PAdicNumber(p, e, r, prec)

    __radd__ = __add__

    def __neg__(self):
        return PAdicNumber(self.p, self.e, -self.r, self.prec)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        prec = min(self.prec + o._lower_valuation(), o.prec + self._lower_valuation())
        return PAdicNumber(self.p, self.e + o.e, self.r * o.r, prec)

    __rmul__ = __mul__

    def abs_value(self):
        """|x|_p as an exact Fraction p^(-v)."""
        return Fraction(self.p) ** (-self.valuation())

    def residue(self, k):
        """Integer congruent to x modulo p^k (requires x integral to precision k)."""
        if k > self.prec:
            raise PrecisionError("requested residue beyond precision")
        if self.e < 0 and self.r % self.p ** (-self.e) != 0:
            raise ValueError("not integral")
        if self.e >= 0:
            return (self.r * self.p ** self.e) % self.p ** k
        return (self.r // self.p ** (-self.e)) % self.p ** k

    def __repr__(self):
        return f"PAdicNumber(p={self.p}, e={self.e}, r={self.r}, prec={self.prec})"


def hensel_root(coeffs, p, k, r0):
    """Lift a simple root r0 of the integer polynomial (constant term first) modulo p^k."""
    def f(x):
        return sum(c * x ** i for i, c in enumerate(coeffs))

    def df(x):
        return sum(i * c * x ** (i - 1) for i, c in enumerate(coeffs) if i)

    if f(r0) % p != 0 or df(r0) % p == 0:
        raise ValueError("not a simple root modulo p")
    r, m = r0 % p, 1
    while m < k:
        m = min(2 * m, k)
        mod = p ** m
        r = (r - f(r) * pow(df(r), -1, mod)) % mod
    return r


def roots_mod_p(coeffs, p):
    """All roots modulo a small prime p of an integer polynomial, ascending."""
    return [x for x in range(p) if sum(c * x ** i for i, c in enumerate(coeffs)) % p == 0]


def is_squarefree(n):
    """Return True when |n| is squarefree (n != 0)."""
    n = abs(int(n))
    if n == 0:
        return False
    d = 2
    while d * d <= n:
        if n % (d * d) == 0:
            return False
        d += 1
    return True


def content(values):
    g = 0
    for v in values:
        g = gcd(g, int(v))
    return g

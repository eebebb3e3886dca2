"""Q and quadratic fields: places, absolute values, heights, and D_xi.

Absolute values are normalized so that |p|_v = p^(-1) for v above p, and
the height of a nonzero x in K^n is H(x) = prod_v ||x||_v^(d_v/d).  Exact
routines return the rational number H(x)^(2d) so that identities between
heights can be checked without rounding.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt
from typing import Optional

import mpmath
import sympy

from . import exterior
from .exterior import GradedVector, PlaceMetric, as_graded, contract, wedge, wedge_all
from .scalars import (PAdicNumber, PrecisionError, QuadraticNumber, exact_sqrt, hensel_root,
                      is_squarefree, roots_mod_p, valuation)

DEFAULT_PREC = 128


@dataclass(frozen=True)
class FieldContext:
    """Q (D = 1) or Q(sqrt(D)) for a squarefree D != 0, 1."""

    D: int = 1

    def __post_init__(self):
        if self.D != 1 and (self.D == 0 or not is_squarefree(self.D)):
            raise ValueError(f"D={self.D} is not a squarefree integer != 0, 1")

    @classmethod
    def rational(cls):
        return cls(1)

    @classmethod
    def quadratic(cls, D):
        if D == 1:
            raise ValueError("D=1 gives Q, use FieldContext.rational()")
        return cls(D)

    @property
    def kind(self):
        return "rational" if self.D == 1 else "quadratic"

    @property
    def degree(self):
        return 1 if self.D == 1 else 2

    @property
    def is_real(self):
        return self.D > 0

    @property
    def omega(self):
        """Second element of the integral basis (1, omega)."""
        if self.D % 4 == 1:
            return QuadraticNumber(Fraction(1, 2), Fraction(1, 2), self.D)
        return QuadraticNumber(0, 1, self.D)

    @property
    def discriminant(self):
        if self.D == 1:
            return 1
        return self.D if self.D % 4 == 1 else 4 * self.D

    def omega_polynomial(self):
        """Minimal polynomial of omega, constant term first."""
        if self.D % 4 == 1:
            return (-(self.D - 1) // 4, -1, 1)
        return (-self.D, 0, 1)

    def element(self, a, b=0):
        """The element a + b*sqrt(D) (just a for Q)."""
        if self.D == 1:
            if b:
                raise ValueError("Q has no sqrt(D) part")
            return Fraction(a)
        return QuadraticNumber(a, b, self.D)

    def to_basis(self, a):
        """Rational coordinates (u, v) with a = u + v*omega."""
        if isinstance(a, QuadraticNumber):
            if self.D % 4 == 1:
                return (a.a - a.b, 2 * a.b)
            return (a.a, a.b)
        return (Fraction(a), Fraction(0))

    def from_basis(self, u, v):
        if self.D == 1:
            return Fraction(u)
        return self.element(u) + v * self.omega

    def is_integral(self, a):
        return all(c.denominator == 1 for c in self.to_basis(a))

    def norm(self, a):
        return a.norm() if isinstance(a, QuadraticNumber) else Fraction(a)

    def fundamental_unit(self):
        """Smallest unit > 1 under the first real embedding (real quadratic only)."""
        if self.D <= 1:
            raise ValueError("fundamental unit only for real quadratic fields")
        return _fundamental_unit(self.D)

    def minkowski_bound(self):
        disc = abs(self.discriminant)
        if self.D == 1:
            return mpmath.mpf(1)
        if self.D > 0:
            return mpmath.sqrt(disc) / 2
        return 2 * mpmath.sqrt(disc) / mpmath.pi

    def parse_element(self, text):
        expr = sympy.sympify(str(text).replace("^", "**"))
        expr = sympy.expand(expr)
        if expr.is_Rational:
            return self.element(Fraction(int(expr.p), int(expr.q)))
        if self.D == 1:
            raise ValueError(f"{text!r} is not rational")
        root = sympy.sqrt(self.D)
        b = sympy.expand(expr).coeff(root)
        a = sympy.simplify(expr - b * root)
        if not (a.is_Rational and b.is_Rational):
            raise ValueError(f"{text!r} is not in Q(sqrt({self.D}))")
        return self.element(Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q)))


@lru_cache(maxsize=None)
def _fundamental_unit(D):
    # Smallest solution of x^2 - D y^2 = ±1 (or ±4 with x, y same parity when D ≡ 1 mod 4).
    four = 4 if D % 4 == 1 else 1
    y = 1
    while True:
        for sgn in (-1, 1):
            t = D * y * y + sgn * four
            if t > 0:
                x = isqrt(t)
                if x * x == t:
                    if four == 4:
                        return QuadraticNumber(Fraction(x, 2), Fraction(y, 2), D)
                    return QuadraticNumber(x, y, D)
        y += 1


@dataclass(frozen=True)
class Place:
    """A place of K: an archimedean embedding or a prime above p."""

    archimedean: bool
    local_degree: int
    index: int = 0
    complex: bool = False
    p: Optional[int] = None
    splitting: Optional[str] = None
    root: Optional[int] = None

    @property
    def label(self):
        if self.archimedean:
            return f"inf{self.index}"
        if self.splitting == "split":
            return f"p{self.p}r{self.root}"
        return f"p{self.p}"


def infinite_places(K):
    if K.D == 1:
        return [Place(True, 1)]
    if K.D > 0:
        return [Place(True, 1, index=0), Place(True, 1, index=1)]
    return [Place(True, 2, index=0, complex=True)]


def places_above(K, u):
    """Places of K above the rational place u ('inf' or a prime)."""
    if u in ("inf", "infinity", None):
        return infinite_places(K)
    p = int(u)
    if not sympy.isprime(p):
        raise ValueError(f"{p} is not prime")
    if K.D == 1:
        return [Place(False, 1, p=p, splitting="rational")]
    if K.discriminant % p == 0:
        return [Place(False, 2, p=p, splitting="ramified")]
    roots = roots_mod_p(K.omega_polynomial(), p)
    if roots:
        return [Place(False, 1, p=p, splitting="split", root=r) for r in roots]
    return [Place(False, 2, p=p, splitting="inert")]


def finite_place(K, p, root="+"):
    """Pick the place above p; for split primes '+' is the smaller residue root."""
    places = places_above(K, p)
    if len(places) == 1:
        return places[0]
    return places[0] if root in ("+", 0, "0") else places[1]


def embed(a, v, K):
    """Image of a field element in R or C under an archimedean place."""
    if isinstance(a, QuadraticNumber):
        return a.embed(1 if v.index == 0 else -1)
    a = Fraction(a)
    return mpmath.mpf(a.numerator) / a.denominator


def _integral_coords(a, K):
    u, v = K.to_basis(a)
    m = u.denominator * v.denominator // gcd(u.denominator, v.denominator)
    return int(u * m), int(v * m), m


def _split_image_residue(U, V, r, p, k):
    return (U + V * r) % p ** k


def valuation_at(a, v, K):
    """Rational e with |a|_v = p^(-e) at a finite place v."""
    if v.archimedean:
        raise ValueError("archimedean place has no valuation")
    if K.D == 1:
        return Fraction(valuation(a, v.p))
    if not isinstance(a, QuadraticNumber):
        return Fraction(valuation(a, v.p))
    if a.norm() == 0:
        raise ValueError("valuation of zero")
    if v.splitting in ("inert", "ramified"):
        return Fraction(valuation(a.norm(), v.p), 2)
    U, V, m = _integral_coords(a, K)
    k = 8
    while True:
        r = hensel_root(K.omega_polynomial(), v.p, k, v.root)
        res = _split_image_residue(U, V, r, v.p, k)
        if res != 0:
            return Fraction(valuation(res, v.p) - valuation(m, v.p))
        k *= 2


def abs_at(a, v, K):
    """|a|_v as an mpmath number (exact Fraction at finite places of integral exponent)."""
    if v.archimedean:
        z = embed(a, v, K)
        return abs(z)
    e = valuation_at(a, v, K)
    if e.denominator == 1:
        return Fraction(v.p) ** (-int(e))
    return mpmath.power(v.p, -mpmath.mpf(e.numerator) / e.denominator)


def padic_image(a, v, K, prec):
    """Image of a in Q_p (d_v = 1 places only) as a PAdicNumber."""
    if K.D == 1 or not isinstance(a, QuadraticNumber):
        return PAdicNumber.from_rational(Fraction(a) if not isinstance(a, QuadraticNumber) else a.a, v.p, prec)
    if v.splitting != "split":
        raise ValueError("only split places embed K into Q_p")
    U, V, m = _integral_coords(a, K)
    r = hensel_root(K.omega_polynomial(), v.p, prec + valuation(m, v.p) + 2, v.root)
    return PAdicNumber.from_rational(U + V * r, v.p, prec) * PAdicNumber.from_rational(Fraction(1, m), v.p, prec + 8)


def place_metric(K, v):
    if v.archimedean:
        return PlaceMetric(archimedean=True, embed=lambda c: embed(c, v, K))
    return PlaceMetric(archimedean=False, p=v.p, val=lambda c: valuation_at(c, v, K))


def product_formula_terms(a, K):
    """Exact archimedean factor prod_{v|inf}|a|_v^(d_v) = |N(a)| and the finite factors."""
    if not a:
        raise ValueError("product formula needs a nonzero element")
    arch = abs(K.norm(a))
    primes = set()
    n = K.norm(a)
    for x in (n.numerator, n.denominator):
        primes.update(sympy.factorint(abs(x)))
    for c in K.to_basis(a):
        primes.update(sympy.factorint(c.denominator))
    finite = Fraction(1)
    for p in sorted(primes):
        for v in places_above(K, p):
            e = v.local_degree * valuation_at(a, v, K)
            if e.denominator != 1:
                raise ArithmeticError("non-integral local exponent")
            finite *= Fraction(p) ** (-int(e))
    return arch, finite


def product_formula_residual(a, K):
    """prod_v |a|_v^(d_v), which must equal 1 exactly."""
    arch, finite = product_formula_terms(a, K)
    return arch * finite


def product_formula_log(a, K):
    """sum_v (d_v/d) log|a|_v computed place by place in floating point."""
    total = mpmath.mpf(0)
    for v in infinite_places(K):
        total += mpmath.mpf(v.local_degree) / K.degree * mpmath.log(abs(embed(a, v, K)))
    _, finite = product_formula_terms(a, K)
    primes = set(sympy.factorint(finite.numerator)) | set(sympy.factorint(finite.denominator))
    n = K.norm(a)
    for x in (n.numerator, n.denominator):
        primes.update(sympy.factorint(abs(x)))
    for c in K.to_basis(a):
        primes.update(sympy.factorint(c.denominator))
    for p in primes:
        for v in places_above(K, p):
            total -= mpmath.mpf(v.local_degree) / K.degree * valuation_at(a, v, K) * mpmath.log(p)
    return total


def _coords(x):
    return as_graded(x).coords if isinstance(x, GradedVector) else tuple(x)


def make_integral(x, K):
    """Multiply x by a positive integer so that all coordinates lie in O_K."""
    m = 1
    for c in _coords(x):
        for t in K.to_basis(c):
            m = m * t.denominator // gcd(m, t.denominator)
    return tuple(c * m for c in _coords(x))


def content_ideal_norm(x, K):
    """Norm of the ideal generated by the coordinates of an integral vector."""
    x = _coords(x)
    if K.D == 1:
        g = 0
        for c in x:
            g = gcd(g, int(Fraction(c)))
        return g
    rows = []
    for c in x:
        for mult in (1, K.omega):
            u, v = K.to_basis(c * mult)
            if u.denominator != 1 or v.denominator != 1:
                raise ValueError("vector is not integral")
            rows.append((int(u), int(v)))
    g = 0
    for i in range(len(rows)):
        for j in range(i + 1, len(rows)):
            g = gcd(g, abs(rows[i][0] * rows[j][1] - rows[i][1] * rows[j][0]))
    return g


def archimedean_power(x, K):
    """prod_{v|inf} ||x||_v^(2 d_v), exact."""
    x = _coords(x)
    if K.D == 1:
        return sum(Fraction(c) ** 2 for c in x)
    if K.D > 0:
        s = sum((c * c for c in x), QuadraticNumber(0, 0, K.D))
        return (s if isinstance(s, QuadraticNumber) else QuadraticNumber(s, 0, K.D)).norm()
    s = sum(K.norm(c) for c in x)
    return Fraction(s) ** 2


def _check_nonzero(x):
    if all(exterior.is_zero(c) for c in _coords(x)):
        raise ValueError("zero vector has no height")


def height_power(x, K):
    """H(x)^(2d) through the content ideal of an integral multiple of x."""
    _check_nonzero(x)
    y = make_integral(x, K)
    return archimedean_power(y, K) / Fraction(content_ideal_norm(y, K)) ** 2


def height_power_all_places(x, K):
    """H(x)^(2d) as a product over all places, using per-place valuations."""
    _check_nonzero(x)
    y = make_integral(x, K)
    g = 0
    for c in y:
        if c:
            g = gcd(g, abs(int(K.norm(c))))
    finite = Fraction(1)
    for p in sympy.factorint(g):
        for v in places_above(K, p):
            e = min(valuation_at(c, v, K) for c in y if c)
            finite *= Fraction(p) ** (-int(2 * v.local_degree * e))
    return archimedean_power(y, K) * finite


def _root(value, k):
    value = Fraction(value)
    return mpmath.root(mpmath.mpf(value.numerator) / value.denominator, k)


def height_vector(x, K=None):
    """H(x) as an mpmath real."""
    K = K or FieldContext.rational()
    return _root(height_power(x, K), 2 * K.degree)


def log_height(x, K=None):
    K = K or FieldContext.rational()
    h = height_power(x, K)
    return (mpmath.log(h.numerator) - mpmath.log(h.denominator)) / (2 * K.degree)


def plucker(basis):
    if len(basis) == 0:
        return None
    top = wedge_all([tuple(b) for b in basis])
    if top.is_zero():
        raise ValueError("rank-deficient basis")
    return top


def height_subspace_power(basis, K=None):
    K = K or FieldContext.rational()
    if len(basis) == 0:
        return Fraction(1)
    return height_power(plucker(basis).coords, K)


def height_subspace(basis, K=None):
    K = K or FieldContext.rational()
    return _root(height_subspace_power(basis, K), 2 * K.degree)


def parse_real(text, prec=DEFAULT_PREC):
    """Decimal, 'p/q', or a closed-form expression such as '2^(1/4)'."""
    text = str(text).strip()
    try:
        q = Fraction(text)
        with mpmath.workprec(prec):
            return mpmath.mpf(q.numerator) / q.denominator
    except ValueError:
        pass
    expr = sympy.sympify(text.replace("^", "**"))
    digits = int(prec * 0.30103) + 10
    val = sympy.N(expr, digits)
    if not val.is_real:
        with mpmath.workprec(prec):
            return mpmath.mpc(str(sympy.re(val)), str(sympy.im(val)))
    with mpmath.workprec(prec):
        return mpmath.mpf(str(val))


def parse_padic(text, p, prec, root="+"):
    """A p-adic number from a rational or an expression a + b*sqrt(m)."""
    text = str(text).strip()
    try:
        return PAdicNumber.from_rational(Fraction(text), p, prec)
    except ValueError:
        pass
    expr = sympy.expand(sympy.sympify(text.replace("^", "**")))
    radicals = [a for a in expr.atoms(sympy.Pow) if a.exp == sympy.Rational(1, 2) and a.base.is_Integer]
    if len(radicals) != 1:
        raise ValueError(f"cannot read {text!r} as a + b*sqrt(m)")
    rad = radicals[0]
    m = int(rad.base)
    b = expr.coeff(rad)
    a = sympy.simplify(expr - b * rad)
    if valuation(m, p) != 0 or m % p == 0:
        raise ValueError(f"sqrt({m}) must be a p-adic unit")
    roots = roots_mod_p((-m, 0, 1), p)
    if not roots or p == 2:
        raise ValueError(f"{m} has no square root in Q_{p} (or p=2)")
    r0 = roots[0] if root in ("+", 0, "0") else roots[-1]
    r = hensel_root((-m, 0, 1), p, prec + 4, r0)
    return (PAdicNumber.from_rational(Fraction(int(a.p), int(a.q)), p, prec)
            + PAdicNumber.from_rational(Fraction(int(b.p), int(b.q)), p, prec) * PAdicNumber.from_rational(r, p, prec))


@dataclass(frozen=True)
class ApproximationTarget:
    """A point xi of K_w^n at a distinguished place w."""

    field: FieldContext
    place: Place
    xi: tuple
    prec: int = DEFAULT_PREC
    norm_w_xi: object = field(default=None, compare=False)
    name: str = ""

    @property
    def n(self):
        return len(self.xi)

    @property
    def metric(self):
        if self.place.archimedean:
            return PlaceMetric(archimedean=True)
        return PlaceMetric(archimedean=False, p=self.place.p)

    @property
    def weight(self):
        """d_w / d."""
        return Fraction(self.place.local_degree, self.field.degree)


def make_target(K, place, xi, prec=DEFAULT_PREC, name=""):
    """Build a target; archimedean xi is rescaled to unit norm, p-adic xi to a primitive vector."""
    if place.archimedean:
        with mpmath.workprec(prec):
            vals = [v if isinstance(v, (mpmath.mpf, mpmath.mpc)) else parse_real(v, prec) for v in xi]
            nrm = mpmath.sqrt(sum(abs(v) ** 2 for v in vals))
            if nrm == 0:
                raise ValueError("xi must be nonzero")
            vals = tuple(v / nrm for v in vals)
        return ApproximationTarget(K, place, vals, prec, mpmath.mpf(1), name)
    vals = [v if isinstance(v, PAdicNumber) else PAdicNumber.from_rational(Fraction(v), place.p, prec) for v in xi]
    vmin = min(c.valuation() for c in vals if not exterior.is_zero(c))
    shift = PAdicNumber.from_rational(Fraction(place.p) ** (-vmin), place.p, prec + abs(vmin) + 8)
    vals = tuple(c * shift for c in vals)
    return ApproximationTarget(K, place, vals, prec, Fraction(1), name)


def parse_target(obj, prec=DEFAULT_PREC):
    """Read the JSON target descriptor."""
    f = obj.get("field", {"kind": "rational"})
    K = FieldContext.rational() if f.get("kind", "rational") == "rational" else FieldContext.quadratic(int(f["D"]))
    pl = obj.get("place", {"kind": "inf", "index": 0})
    if pl.get("kind", "inf") == "inf":
        places = infinite_places(K)
        place = places[int(pl.get("index", 0))]
        xi = [parse_real(s, prec) for s in obj["xi"]]
    else:
        place = finite_place(K, int(pl["p"]), pl.get("root", "+"))
        if place.local_degree != 1:
            raise ValueError("finite w must have local degree 1")
        if K.D != 1:
            xi = [padic_image(K.parse_element(s), place, K, prec) for s in obj["xi"]]
        else:
            xi = [parse_padic(s, place.p, prec, pl.get("root", "+")) for s in obj["xi"]]
    return make_target(K, place, xi, prec, obj.get("name", ""))


def _w_image(c, target):
    K, v = target.field, target.place
    if v.archimedean:
        return embed(c, v, K) if isinstance(c, QuadraticNumber) else (
            c if isinstance(c, (mpmath.mpf, mpmath.mpc)) else mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator)
    return padic_image(c, v, K, target.prec)


def _norm_w(values, target):
    if target.place.archimedean:
        return mpmath.sqrt(sum(abs(c) ** 2 for c in values))
    vals = [c.valuation() for c in values if not exterior.is_zero(c)]
    if not vals:
        return mpmath.mpf(0)
    return mpmath.power(target.place.p, -min(vals))


def _weighted(ratio, target):
    w = target.weight
    if ratio == 0:
        return mpmath.mpf(0)
    return ratio if w == 1 else mpmath.power(ratio, mpmath.mpf(w.numerator) / w.denominator)


def _dx_ratio(X, target, mode):
    """|x·xi|_w/(||x||_w ||xi||_w), or its wedge / contraction analogue."""
    X = as_graded(X)
    with mpmath.workprec(target.prec):
        img = tuple(_w_image(c, target) for c in X.coords)
        Xw = GradedVector(X.n, X.k, img)
        if mode == "dot":
            if X.k == 1:
                top = [sum((a * b for a, b in zip(img, target.xi)), mpmath.mpf(0) if target.place.archimedean else 0)]
            else:
                top = contract(target.xi, Xw).coords
        else:
            top = wedge(Xw, GradedVector.from_vector(target.xi)).coords
        try:
            num = _norm_w(top, target)
        except PrecisionError:
            num = mpmath.mpf(0)
        return num / (_norm_w(img, target) * _norm_w(target.xi, target))


def D_xi(x, target):
    """D_xi(x) for a vector or a graded element (contraction) of K^n."""
    _check_nonzero(x)
    with mpmath.workprec(target.prec):
        return height_vector(_coords(x), target.field) * _weighted(_dx_ratio(x, target, "dot"), target)


def D_star_xi(x, target):
    """D*_xi(x), built from ||x ∧ xi||_w."""
    _check_nonzero(x)
    with mpmath.workprec(target.prec):
        return height_vector(_coords(x), target.field) * _weighted(_dx_ratio(x, target, "wedge"), target)

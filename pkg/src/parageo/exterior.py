"""Exterior algebra over a field with an absolute value.

Plücker coordinates of a grade-k element are indexed by the increasing
k-subsets of {0, ..., n-1} in lexicographic order.  All operations only use
ring arithmetic on the coordinates, so they work unchanged for ``Fraction``,
``QuadraticNumber``, ``PAdicNumber`` and ``mpmath.mpf`` scalars.  Norms and
distances need a ``PlaceMetric`` that says how to take absolute values.
"""

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import comb
from typing import Callable, Optional

import mpmath

from .scalars import PAdicNumber, PrecisionError, QuadraticNumber, exact_sqrt, valuation


@lru_cache(maxsize=None)
def subsets(n, k):
    return tuple(combinations(range(n), k))


@lru_cache(maxsize=None)
def subset_index(n, k):
    return {s: i for i, s in enumerate(subsets(n, k))}


def permutation_sign(seq):
    """Signature of the permutation that sorts ``seq`` (distinct entries)."""
    seq = list(seq)
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def scalar_kind(values):
    kind = "exact-rational"
    for c in values:
        if isinstance(c, QuadraticNumber):
            kind = "quadratic-exact"
        elif isinstance(c, PAdicNumber):
            return "p-adic-approx"
        elif isinstance(c, (float, mpmath.mpf, mpmath.mpc)):
            return "float-real"
    return kind


def is_zero(c):
    if isinstance(c, PAdicNumber):
        try:
            c.valuation()
        except PrecisionError:
            return True
        return False
    return c == 0


@dataclass(frozen=True)
class GradedVector:
    """Element of the k-th exterior power of an n-dimensional space."""

    n: int
    k: int
    coords: tuple

    def __post_init__(self):
        if not 0 <= self.k <= self.n:
            raise ValueError(f"grade {self.k} outside [0, {self.n}]")
        if len(self.coords) != comb(self.n, self.k):
            raise ValueError(f"expected {comb(self.n, self.k)} coordinates, got {len(self.coords)}")

    @classmethod
    def from_vector(cls, x):
        return cls(len(x), 1, tuple(x))

    @classmethod
    def scalar(cls, n, c):
        return cls(n, 0, (c,))

    @classmethod
    def basis_element(cls, n, index_set, one=1):
        index_set = tuple(sorted(index_set))
        coords = [0] * comb(n, len(index_set))
        coords[subset_index(n, len(index_set))[index_set]] = one
        return cls(n, len(index_set), tuple(coords))

    @property
    def scalar_kind(self):
        return scalar_kind(self.coords)

    def is_zero(self):
        return all(is_zero(c) for c in self.coords)

    def __add__(self, other):
        _check_same(self, other)
        return GradedVector(self.n, self.k, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        _check_same(self, other)
        return GradedVector(self.n, self.k, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        return GradedVector(self.n, self.k, tuple(-a for a in self.coords))

    def scale(self, c):
        return GradedVector(self.n, self.k, tuple(c * a for a in self.coords))

    def dot(self, other):
        _check_same(self, other)
        return _sum(a * b for a, b in zip(self.coords, other.coords))

    def items(self):
        return zip(subsets(self.n, self.k), self.coords)


def _check_same(x, y):
    if x.n != y.n or x.k != y.k:
        raise ValueError("dimension or grade mismatch")


def _sum(terms):
    it = iter(terms)
    total = next(it, 0)
    for t in it:
        total = total + t
    return total


def as_graded(x):
    return x if isinstance(x, GradedVector) else GradedVector.from_vector(tuple(x))


def wedge(X, Y):
    X, Y = as_graded(X), as_graded(Y)
    if X.n != Y.n:
        raise ValueError("ambient dimension mismatch")
    n, k = X.n, X.k + Y.k
    if k > n:
        raise ValueError(f"grade overflow: {X.k} + {Y.k} > {n}")
    index = subset_index(n, k)
    out = [0] * comb(n, k)
    for I, a in X.items():
        if is_zero(a):
            continue
        for J, b in Y.items():
            if is_zero(b) or set(I) & set(J):
                continue
            merged = I + J
            sign = permutation_sign(merged)
            pos = index[tuple(sorted(merged))]
            term = a * b
            out[pos] = out[pos] + term if sign > 0 else out[pos] - term
    return GradedVector(n, k, tuple(out))


def wedge_all(vectors):
    vectors = [as_graded(v) for v in vectors]
    if not vectors:
        raise ValueError("empty product")
    out = vectors[0]
    for v in vectors[1:]:
        out = wedge(out, v)
    return out


def contract(y, X):
    """Contraction y ⌟ X, lowering the grade of X by one."""
    X = as_graded(X)
    if X.k < 1:
        raise ValueError("cannot contract a grade-0 element")
    if len(y) != X.n:
        raise ValueError("ambient dimension mismatch")
    n, k = X.n, X.k - 1
    index = subset_index(n, k)
    out = [0] * comb(n, k)
    for I, a in X.items():
        if is_zero(a):
            continue
        for m, i in enumerate(I):
            if is_zero(y[i]):
                continue
            pos = index[I[:m] + I[m + 1:]]
            term = y[i] * a
            out[pos] = out[pos] + term if m % 2 == 0 else out[pos] - term
    return GradedVector(n, k, tuple(out))


def hodge(X):
    """The duality map with (X ∧ Y)·E = hodge(X)·Y for every Y of complementary grade."""
    X = as_graded(X)
    n = X.n
    index = subset_index(n, n - X.k)
    out = [0] * comb(n, n - X.k)
    for I, a in X.items():
        J = tuple(i for i in range(n) if i not in I)
        sign = permutation_sign(I + J)
        out[index[J]] = a if sign > 0 else -a
    return GradedVector(n, n - X.k, tuple(out))


@dataclass(frozen=True)
class PlaceMetric:
    """How to measure coordinates at one place.

    ``embed`` maps a scalar to a real or complex number (archimedean case);
    ``val`` maps a nonzero scalar to its normalized valuation, a rational
    number e with |c| = p^(-e) (non-archimedean case).
    """

    archimedean: bool = True
    p: Optional[int] = None
    embed: Optional[Callable] = None
    val: Optional[Callable] = None

    @property
    def kind(self):
        return "archimedean" if self.archimedean else "nonarchimedean"

    @property
    def delta(self):
        return 1 if self.archimedean else 0

    def abs_sq(self, c):
        """|c|^2 at an archimedean place, exact when possible."""
        if self.embed is not None:
            z = self.embed(c)
            return z.real ** 2 + z.imag ** 2 if isinstance(z, mpmath.mpc) else z * z
        if isinstance(c, QuadraticNumber):
            z = c.embed(1)
            return z.real ** 2 + z.imag ** 2 if isinstance(z, mpmath.mpc) else z * z
        if isinstance(c, mpmath.mpc):
            return c.real ** 2 + c.imag ** 2
        return c * c

    def valuation(self, c):
        if self.val is not None:
            return Fraction(self.val(c))
        if isinstance(c, PAdicNumber):
            return Fraction(c.valuation())
        return Fraction(valuation(c, self.p))


ARCHIMEDEAN = PlaceMetric()


def padic_metric(p):
    return PlaceMetric(archimedean=False, p=p)


def _power_of_p(p, e):
    e = Fraction(e)
    if e.denominator == 1:
        return Fraction(p) ** (-int(e))
    return mpmath.power(p, -mpmath.mpf(e.numerator) / e.denominator)


def _sqrt(s):
    if isinstance(s, (int, Fraction)):
        r = exact_sqrt(s)
        if r is not None:
            return r
        return mpmath.sqrt(mpmath.mpf(s.numerator) / s.denominator if isinstance(s, Fraction) else s)
    return mpmath.sqrt(s)


def norm_sq(X, metric=ARCHIMEDEAN):
    """Squared archimedean norm; an exact Fraction for rational coordinates."""
    coords = as_graded(X).coords
    return _sum(metric.abs_sq(c) for c in coords)


def min_valuation(X, metric):
    vals = [metric.valuation(c) for c in as_graded(X).coords if not is_zero(c)]
    if not vals:
        return None
    return min(vals)


def norm_at(X, metric=ARCHIMEDEAN):
    """Euclidean norm at archimedean places, max norm at finite places."""
    if metric.archimedean:
        return _sqrt(norm_sq(X, metric))
    v = min_valuation(X, metric)
    return Fraction(0) if v is None else _power_of_p(metric.p, v)


def _nonzero(x, what="vector"):
    if as_graded(x).is_zero():
        raise ValueError(f"zero {what}")


def _exact_div(a, b):
    if isinstance(a, int) and isinstance(b, int):
        return Fraction(a, b)
    return a / b


def _ratio_value(top, factors, metric):
    """‖top‖ / ∏‖f‖, exact when possible."""
    if metric.archimedean:
        den = 1
        for f in factors:
            den = den * norm_sq(f, metric)
        return _sqrt(_exact_div(norm_sq(top, metric), den))
    vt = min_valuation(top, metric)
    if vt is None:
        return Fraction(0)
    return _power_of_p(metric.p, vt - sum(min_valuation(f, metric) for f in factors))


def _projective_point(x):
    """Coordinates of x as a point of P(K^N); a k-vector is read through its Pluecker coordinates."""
    x = as_graded(x)
    return x if x.k == 1 else GradedVector.from_vector(x.coords)


def dist_sq(x, y, metric=ARCHIMEDEAN):
    """Squared archimedean projective distance (exact for rational input)."""
    _nonzero(x)
    _nonzero(y)
    x, y = _projective_point(x), _projective_point(y)
    return _exact_div(norm_sq(wedge(x, y), metric), norm_sq(x, metric) * norm_sq(y, metric))


def dist(x, y, metric=ARCHIMEDEAN):
    _nonzero(x)
    _nonzero(y)
    x, y = _projective_point(x), _projective_point(y)
    return _ratio_value(wedge(x, y), [x, y], metric)


def _top_wedge(basis):
    if len(basis) == 0:
        raise ValueError("empty basis")
    top = wedge_all(basis)
    if top.is_zero():
        raise ValueError("rank-deficient basis")
    return top


def dist_point_subspace(x, basis, metric=ARCHIMEDEAN):
    _nonzero(x)
    top = _top_wedge(basis)
    return _ratio_value(wedge(x, top), [as_graded(x), top], metric)


def dist_point_subspace_sq(x, basis, metric=ARCHIMEDEAN):
    _nonzero(x)
    top = _top_wedge(basis)
    return _exact_div(norm_sq(wedge(x, top), metric), norm_sq(x, metric) * norm_sq(top, metric))


def dist_subspaces(B1, B2, metric=ARCHIMEDEAN):
    if len(B1) != len(B2):
        raise ValueError("subspaces of different dimensions")
    return dist(_top_wedge(B1), _top_wedge(B2), metric)


def dist_subspaces_sq(B1, B2, metric=ARCHIMEDEAN):
    if len(B1) != len(B2):
        raise ValueError("subspaces of different dimensions")
    return dist_sq(_top_wedge(B1), _top_wedge(B2), metric)


def _abs_key(c):
    if isinstance(c, (mpmath.mpf, mpmath.mpc, float)):
        return abs(c)
    return 0 if is_zero(c) else 1


def _inverse(c):
    if isinstance(c, int):
        return Fraction(1, c)
    return 1 / c


def row_reduce(rows):
    """Reduced row echelon form over the coefficient field; returns (rref, pivots)."""
    A = [list(r) for r in rows]
    m = len(A)
    ncols = len(A[0]) if m else 0
    pivots = []
    r = 0
    for col in range(ncols):
        if r == m:
            break
        best = max(range(r, m), key=lambda i: _abs_key(A[i][col]))
        if is_zero(A[best][col]):
            continue
        A[r], A[best] = A[best], A[r]
        inv = _inverse(A[r][col])
        A[r] = [c * inv for c in A[r]]
        for i in range(m):
            if i != r and not is_zero(A[i][col]):
                f = A[i][col]
                A[i] = [a - f * b for a, b in zip(A[i], A[r])]
        pivots.append(col)
        r += 1
    return A[:r], pivots


def rank(rows):
    return len(row_reduce(rows)[1])


def orthogonal_complement(basis):
    """A basis of the vectors y with y·x = 0 for every x in the span of ``basis``."""
    basis = [list(b) for b in basis]
    n = len(basis[0])
    R, pivots = row_reduce(basis)
    if len(pivots) != len(basis):
        raise ValueError("rank-deficient basis")
    free = [c for c in range(n) if c not in pivots]
    out = []
    for f in free:
        y = [0] * n
        y[f] = 1
        for row, pc in zip(R, pivots):
            y[pc] = -row[f]
        out.append(tuple(y))
    return out


def is_almost_orthogonal(seq, metric=ARCHIMEDEAN, tol=0):
    """Independent, with dist(x_j, span(x_1..x_{j-1})) >= 1 - delta/2^(j-1)."""
    seq = [tuple(x) for x in seq]
    if not seq:
        raise ValueError("empty sequence")
    if wedge_all(seq).is_zero():
        return False
    exact = scalar_kind([c for x in seq for c in x]) == "exact-rational"
    for j in range(2, len(seq) + 1):
        bound = 1 - Fraction(metric.delta, 2 ** (j - 1))
        if metric.archimedean and exact:
            if dist_point_subspace_sq(seq[j - 1], seq[:j - 1]) < bound * bound:
                return False
        else:
            d = dist_point_subspace(seq[j - 1], seq[:j - 1], metric)
            if d < bound - tol:
                return False
    return True

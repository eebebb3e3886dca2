"""Extension of scalars from Q to a quadratic field K.

A basis alpha = (alpha_1, ..., alpha_d) of K over Q identifies Q^(dn) with
K^n through T(x_1, ..., x_d) = sum_i alpha_i x_i.  A point xi in K_w^n
(w real, so d_w = 1) becomes Xi = (alpha_1 xi, ..., alpha_d xi) in R^(dn),
with x.Xi = T(x).xi for every rational x.  The successive minima of Xi at
parameter dq then track those of xi at q, each one repeated d times.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import lattice
from .minima import EnumerationBudget, FieldIndependence, _greedy, _mpq, _required_prec, profile
from .numberfield import FieldContext, embed, infinite_places, make_target
from .scalars import PrecisionError, QuadraticNumber

INF = math.inf


@dataclass(frozen=True)
class ScalarExtension:
    field: FieldContext
    alpha: tuple = None
    place_index: int = 0

    def __post_init__(self):
        K = self.field
        if K.D != 1 and K.D < 0:
            raise ValueError("w must be real (d_w = 1): use a real quadratic field")
        if self.alpha is None:
            alpha = (K.element(1),) if K.D == 1 else (K.element(1), K.omega)
            object.__setattr__(self, "alpha", alpha)
        if len(self.alpha) != self.d:
            raise ValueError(f"alpha needs {self.d} elements")
        if self.basis_matrix_det() == 0:
            raise ValueError("alpha is not a basis of K over Q")

    @property
    def d(self):
        return self.field.degree

    @property
    def place(self):
        return infinite_places(self.field)[self.place_index]

    def basis_matrix(self):
        """Rows: coordinates of alpha_i on the integral basis (1, omega)."""
        return [list(self.field.to_basis(a))[:self.d] for a in self.alpha]

    def basis_matrix_det(self):
        M = self.basis_matrix()
        if self.d == 1:
            return Fraction(M[0][0])
        return Fraction(M[0][0] * M[1][1] - M[0][1] * M[1][0])

    @property
    def is_integral_basis(self):
        M = self.basis_matrix()
        return all(Fraction(c).denominator == 1 for r in M for c in r) and abs(self.basis_matrix_det()) == 1

    def embed_alpha(self):
        return [embed(a, self.place, self.field) for a in self.alpha]

    def T_apply(self, x):
        """(x_1, ..., x_d) in Q^(dn), blocks of length n, to sum_i alpha_i x_i in K^n."""
        d = self.d
        if len(x) % d:
            raise ValueError("length must be a multiple of d")
        n = len(x) // d
        zero = self.field.element(0)
        out = []
        for j in range(n):
            acc = zero
            for i in range(d):
                acc = acc + self.alpha[i] * Fraction(x[i * n + j])
            out.append(acc)
        return tuple(out)

    def T_invert(self, y, integral=False):
        """Rational (or, for an integral basis, integer) coordinates of y in K^n."""
        if integral and not self.is_integral_basis:
            raise ValueError("alpha is not an integral basis; integral inversion is undefined")
        d, K = self.d, self.field
        M = self.basis_matrix()
        det = self.basis_matrix_det()
        n = len(y)
        blocks = [[None] * n for _ in range(d)]
        for j, c in enumerate(y):
            u = K.to_basis(c)
            if d == 1:
                blocks[0][j] = Fraction(u[0]) / M[0][0]
            else:
                # solve (s, t) M = (u0, u1)
                s = (u[0] * M[1][1] - u[1] * M[1][0]) / det
                t = (u[1] * M[0][0] - u[0] * M[0][1]) / det
                blocks[0][j], blocks[1][j] = Fraction(s), Fraction(t)
        out = [c for b in blocks for c in b]
        if integral:
            if any(c.denominator != 1 for c in out):
                raise ValueError("y is not integral")
            return tuple(int(c) for c in out)
        return tuple(out)

    def T_matrix(self, n):
        """Rational dn x dn matrix of T in the coordinates (1, omega) of each entry of K^n.

        Row r is the image of the r-th unit vector of Q^(dn); its columns list the
        first basis coordinate of all n entries, then the second.
        """
        rows = []
        for i in range(self.d):
            for j in range(n):
                z = [0] * (self.d * n)
                z[i * n + j] = 1
                y = self.T_apply(z)
                coords = [self.field.to_basis(c) for c in y]
                rows.append([Fraction(coords[m][t]) for t in range(self.d) for m in range(n)])
        return rows

    def lattice_index(self, n=1):
        """Index of T(Z^(dn)) in O_K^n; 1 exactly when alpha is an integral basis."""
        det = self.basis_matrix_det()
        if det.denominator != 1:
            raise ValueError("alpha is not integral")
        return abs(int(det)) ** n


def alpha_norm(ext):
    return mpmath.sqrt(mpmath.fsum(a * a for a in ext.embed_alpha()))


def extend_point(xi, ext):
    """Xi = (alpha_1 xi, ..., alpha_d xi) as real numbers under the chosen embedding."""
    if not any(xi):
        raise ValueError("xi must be nonzero")
    return tuple(a * c for a in ext.embed_alpha() for c in xi)


def extended_target(target, ext, prec=None):
    """The target Xi over Q, normalized to unit length like every archimedean target."""
    K = FieldContext.rational()
    prec = prec or target.prec
    with mpmath.workprec(prec):
        Xi = extend_point(target.xi, ext)
    return make_target(K, infinite_places(K)[0], list(Xi), prec, (target.name or "xi") + "-extended")


# ---------------------------------------------------------------- bounded differences under extension

@dataclass
class BoundedDifferenceReport:
    d: int
    q_grid: list
    sup_L: object
    sup_Lstar: object
    first_half: tuple
    second_half: tuple
    stable: bool
    rows: list

    def as_dict(self):
        return {"d": self.d, "sup_L": str(self.sup_L), "sup_Lstar": str(self.sup_Lstar),
                "sup_first_half": [str(x) for x in self.first_half],
                "sup_second_half": [str(x) for x in self.second_half], "stable": self.stable}


def verify_bounded_differences(target, ext, qs, budget=None, threads=None):
    """max |L_Xi,d(i-1)+j(dq) - L_xi,i(q)| and max |L*_Xi,d(i-1)+j(dq) - L*_xi,i(q) - (d-1)q| over the grid."""
    d = ext.d
    qs = list(qs)
    big = extended_target(target, ext)
    pL = profile(target, qs, budget=budget, threads=threads)
    pS = profile(target, qs, kind="Lstar", budget=budget, threads=threads)
    if d == 1:
        qL, qS = pL, pS
    else:
        qL = profile(big, [d * q for q in qs], budget=budget, threads=threads)
        qS = profile(big, [d * q for q in qs], kind="Lstar", budget=budget, threads=threads)
    if not (pL.exact and pS.exact and qL.exact and qS.exact):
        raise ValueError("bounded-difference check needs exact profiles; raise the enumeration budget")
    n = target.n
    rows = []
    for q, a, b, A, Bv in zip(qs, pL.values, pS.values, qL.values, qS.values):
        qm = _mpq(q)
        dl = max(abs(A[d * i + j] - a[i]) for i in range(n) for j in range(d))
        ds = max(abs(Bv[d * i + j] - b[i] - (d - 1) * qm) for i in range(n) for j in range(d))
        rows.append((q, dl, ds))
    half = qs[-1] / 2
    first = (max(r[1] for r in rows if r[0] <= half), max(r[2] for r in rows if r[0] <= half))
    second = (max(r[1] for r in rows if r[0] >= half), max(r[2] for r in rows if r[0] >= half))
    stable = second[0] <= first[0] + 0.5 and second[1] <= first[1] + 0.5
    return BoundedDifferenceReport(d, qs, max(r[1] for r in rows), max(r[2] for r in rows), first, second, stable, rows)


# ---------------------------------------------------------------- exponent algebra

def _inv(x):
    if x == 0:
        return INF
    if x == INF:
        return Fraction(0)
    return 1 / x


def _field(x):
    if x == INF or x is None:
        return x
    return Fraction(x) if not isinstance(x, float) else x


def exponent_transfer(exps, d):
    """Exponents of Xi from those of xi: omega -> d(omega + 1) - 1 and 1/lambda -> d(1/lambda + 1) - 1."""
    out = {}
    for key in ("omega", "omega_hat"):
        if key in exps:
            w = _field(exps[key])
            out[key] = INF if w == INF else d * (w + 1) - 1
    for key in ("lam", "lam_hat"):
        if key in exps:
            inv = _inv(_field(exps[key]))
            out[key] = _inv(INF if inv == INF else d * (inv + 1) - 1)
    return out


def jarnik_extended_residual(omega_hat, lam_hat, d):
    """(1/lam_hat - (2d-1)) - d^2/(omega_hat - (2d-1)); zero on the extended Jarnik curve."""
    lhs = _inv(lam_hat) - (2 * d - 1)
    den = omega_hat - (2 * d - 1)
    if den == 0:
        raise ZeroDivisionError("omega_hat = 2d - 1 lies on the pole of the identity")
    return lhs - d * d / den


def bel_values(d, prec=64):
    """The extremal pair lam_hat = 1/(d g^2 - 1), omega_hat = d(g^2 + 1) - 1 with g the golden ratio."""
    with mpmath.workprec(prec):
        g = (1 + mpmath.sqrt(5)) / 2
        return 1 / (d * g ** 2 - 1), d * (g ** 2 + 1) - 1


# ---------------------------------------------------------------- Thunder comparability

@dataclass
class ThunderReport:
    q: object
    rational_minima: list      # lambda_1..lambda_dn of the pulled back body over Z^(dn)
    field_minima: list         # lambda_1..lambda_n of the K-body over O_K^n
    log_ratios: list           # log(lambda_{d(i-1)+j}(C) / lambda_i(K-body))


def thunder_gauge(x_images, q, xi, d):
    """max(||s1 x||, e^(qd)|s1 x . xi|, ||s2 x||) for the images of x under the embeddings."""
    s1 = x_images[0]
    vals = [mpmath.sqrt(mpmath.fsum(c * c for c in s1)), mpmath.exp(q * d) * abs(mpmath.fsum(a * b for a, b in zip(s1, xi)))]
    for other in x_images[1:]:
        vals.append(mpmath.sqrt(mpmath.fsum(c * c for c in other)))
    return max(vals)


def thunder_check(target, ext, q, budget=None):
    """Successive minima of the body over Z^(dn) versus over O_K^n, with the same gauge."""
    budget = budget or EnumerationBudget()
    K, d, n = ext.field, ext.d, target.n
    if not ext.is_integral_basis:
        raise ValueError("the Thunder comparison needs an integral basis alpha")
    places = infinite_places(K)
    order = [places[ext.place_index]] + [p for p in places if p.index != ext.place_index]
    prec = max(target.prec, _required_prec(d * q) + 32)
    with mpmath.workprec(prec):
        qm = _mpq(q)
        xi = list(target.xi)

        def images(z):
            x = ext.T_apply(z)
            return [[embed(c, v, K) for c in x] for v in order]

        def gauge(z):
            return thunder_gauge(images(z), qm, xi, d)

        N = d * n
        scale = mpmath.exp(qm * d)
        rows = []
        for idx in range(N):
            z = [0] * N
            z[idx] = 1
            im = images(z)
            rows.append(list(im[0]) + [scale * mpmath.fsum(a * b for a, b in zip(im[0], xi))]
                        + [c for other in im[1:] for c in other])
        red = lattice.lll(rows, prec=prec)
        basis = [tuple(int(c) for c in u) for u in red.U]
        T = max(gauge(z) for z in basis)
        Z = lattice.enumerate_short(red, 3 * T * T * (1 + 1e-9), budget.max_candidates)
        X = lattice.normalize_sign(lattice.to_original(Z, red.U))
        vecs = [tuple(int(c) for c in row) for row in X]
        vals = [float(gauge(z)) for z in vecs]
        keep = [i for i, v in enumerate(vals) if v <= float(T) * (1 + 1e-9)]
        vecs = [vecs[i] for i in keep]
        vals = [vals[i] for i in keep]
        rat = _greedy(vals, vecs, gauge, N, lattice.IndependenceTracker(N))
        kvecs = [ext.T_apply(z) for z in vecs]
        fld = _greedy(vals, kvecs, lambda x: gauge(ext.T_invert(x, integral=True)), n, FieldIndependence())
        lr = [mpmath.log(rat[d * i + j][0] / fld[i][0]) for i in range(n) for j in range(d)]
    return ThunderReport(q, [r[0] for r in rat], [f[0] for f in fld], lr)


def thunder_stability(target, ext, horizons=((0, 2), (0, 2, 4)), budget=None):
    """Max |log ratio| over each horizon; stable when the longer horizon adds at most 0.5."""
    cache = {}
    sups = []
    for hz in horizons:
        worst = 0
        for q in hz:
            if q not in cache:
                cache[q] = thunder_check(target, ext, Fraction(q), budget)
            worst = max(worst, max(abs(x) for x in cache[q].log_ratios))
        sups.append(worst)
    return {"sups": sups, "stable": all(b <= a + 0.5 for a, b in zip(sups, sups[1:])), "reports": cache}

"""Parametric successive minima L_xi,j, L*_xi,j and L^(k)_xi,j by lattice enumeration.

All three maps share one shape.  A nonzero X in K^N (N = n for L and L*,
N = C(n, k) for the compound maps) has

    L(X, q) = max(log H(X), q + log D(X)),

where D(X) is H(X) times (||A X||_w / ||X||_w)^(d_w/d) for a fixed
K_w-linear map A: the row xi for L, the wedge with xi for L*, the
contraction by xi for L^(k).  For each q the candidates with L(X, q) <= T
are enumerated exactly, T being the largest value on some set of N
independent vectors, and the minima come from the greedy (matroid) choice.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

import mpmath
import numpy as np

from . import lattice
from .exterior import GradedVector, contract, subsets, wedge
from .numberfield import (D_star_xi, D_xi, FieldContext, content_ideal_norm, embed, height_power, log_height,
                          padic_image)
from .scalars import PrecisionError, QuadraticNumber, valuation

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

LN2 = math.log(2)
TIE_WINDOW = 1e-9
TIE_CAP = 256


@dataclass
class EnumerationBudget:
    max_height_log: float = 60.0
    max_candidates: int = 5_000_000
    reduction: bool = True
    unit_twist: int = 3

    def __post_init__(self):
        if self.max_height_log <= 0 or self.max_candidates <= 0 or self.unit_twist < 0:
            raise ValueError("budget bounds must be positive")

    @classmethod
    def from_toml(cls, path):
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        data = data.get("budget", data)
        return cls(**{k: data[k] for k in ("max_height_log", "max_candidates", "reduction", "unit_twist") if k in data})


@dataclass
class MinimaProfile:
    target_id: str
    k: int
    kind: str
    q_grid: list
    values: list
    witnesses: list
    exact_per_q: list
    max_twist: object = None
    info: dict = field(default_factory=dict)

    @property
    def exact(self):
        return all(self.exact_per_q)

    @property
    def N(self):
        return len(self.values[0]) if self.values else 0

    def column(self, j):
        return [v[j] for v in self.values]

    def to_csv(self, digits=20):
        head = ["q"] + [f"L_{j + 1}" for j in range(self.N)] + ["exact"]
        lines = [",".join(head)]
        for q, vals, ex in zip(self.q_grid, self.values, self.exact_per_q):
            lines.append(",".join([_fmt(q, digits)] + [_fmt(v, digits) for v in vals] + [str(bool(ex)).lower()]))
        return "\n".join(lines) + "\n"

    def witnesses_json(self):
        def enc(c):
            if isinstance(c, QuadraticNumber):
                return str(c)
            return str(c)
        return [{"q": _fmt(q, 20), "witnesses": [[enc(c) for c in w] for w in ws]}
                for q, ws in zip(self.q_grid, self.witnesses)]


def _fmt(x, digits):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False) if isinstance(x, mpmath.mpf) else repr(float(x))


def q_grid(qmax, step=0.25, qmin=0):
    """Exact rational grid qmin, qmin + step, ..., qmax."""
    step, qmax, qmin = Fraction(str(step)), Fraction(str(qmax)), Fraction(str(qmin))
    count = int((qmax - qmin) / step)
    return [qmin + i * step for i in range(count + 1)]


# ---------------------------------------------------------------- the linear maps

def grade_dimension(n, k):
    return math.comb(n, k)


def smallness_matrix(target, kind="L", k=1):
    """Rows of A over K_w, plus N: A X = x.xi, x ^ xi or xi _| X."""
    n = target.n
    xi = list(target.xi)
    zero = 0
    if kind == "L" and k == 1:
        return [xi], n
    if kind == "Lstar":
        rows = []
        for i, j in combinations(range(n), 2):
            r = [zero] * n
            r[i], r[j] = xi[j], -xi[i]
            rows.append(r)
        return rows, n
    if kind in ("L", "compound"):
        N = grade_dimension(n, k)
        cols = []
        for idx in range(N):
            e = GradedVector.basis_element(n, subsets(n, k)[idx])
            cols.append(list(contract(tuple(xi), e).coords))
        m = len(cols[0])
        return [[cols[c][r] for c in range(N)] for r in range(m)], N
    raise ValueError(f"unknown kind {kind!r}")


def _mpq(q):
    if isinstance(q, Fraction):
        return mpmath.mpf(q.numerator) / q.denominator
    return mpmath.mpf(q)


def _required_prec(q):
    return int(2 * float(q) / LN2) + 48


def _required_digits(q, p):
    """p-adic digits of xi needed to resolve valuations up to q / log p."""
    return math.ceil(float(q) / math.log(p)) + 2


def _check_precision(target, q):
    if not target.place.archimedean:
        need = _required_digits(q, target.place.p)
        if target.prec < need:
            raise PrecisionError(f"q={float(q)} needs at least {need} {target.place.p}-adic digits, target has {target.prec}")
        return
    if target.prec < _required_prec(q):
        raise PrecisionError(f"q={float(q)} needs at least {_required_prec(q)} bits of xi, target has {target.prec}")


# ---------------------------------------------------------------- single-vector values

def L_value(X, q, target):
    """max(log H(X), q + log D_xi(X)) for a nonzero vector or graded element."""
    with mpmath.workprec(target.prec):
        coords = X.coords if isinstance(X, GradedVector) else tuple(X)
        lh = log_height(coords, target.field)
        d = D_xi(X, target)
        if d == 0:
            return lh
        return max(lh, _mpq(q) + mpmath.log(d))


def L_star_value(x, q, target):
    with mpmath.workprec(target.prec):
        lh = log_height(tuple(x), target.field)
        d = D_star_xi(x, target)
        if d == 0:
            return lh
        return max(lh, _mpq(q) + mpmath.log(d))


def lambda_of_point(x, q, target):
    """Smallest idele modulus bringing x into C_xi(q): max(||x||_w, r|x.xi|_w)^(d_w/d) prod_{v!=w} ||x||_v^(d_v/d)."""
    K, w = target.field, target.place
    with mpmath.workprec(target.prec):
        x = tuple(x)
        H = mpmath.root(mpmath.mpf(height_power(x, K)), 2 * K.degree)
        weight = mpmath.mpf(w.local_degree) / K.degree
        if w.archimedean:
            img = [embed(c, w, K) if isinstance(c, QuadraticNumber) else mpmath.mpf(Fraction(c).numerator) / Fraction(c).denominator
                   for c in x]
            nx = mpmath.sqrt(sum(abs(c) ** 2 for c in img))
            dot = abs(mpmath.fsum(a * b for a, b in zip(img, target.xi)))
            r = mpmath.exp(_mpq(q) * K.degree / w.local_degree)
        else:
            img = [padic_image(c, w, K, target.prec) for c in x]
            nx = mpmath.power(w.p, -min(c.valuation() for c in img if _padic_nonzero(c)))
            acc = 0
            for a, b in zip(img, target.xi):
                acc = a * b + acc
            dot = mpmath.mpf(0) if not _padic_nonzero(acc) else mpmath.power(w.p, -acc.valuation())
            e = math.ceil(float(q) * K.degree / w.local_degree / math.log(w.p) - 1e-12)
            r = mpmath.power(w.p, e)
        outside = H / mpmath.power(nx, weight)
        return mpmath.power(max(nx, r * dot), weight) * outside


def _padic_nonzero(c):
    try:
        c.valuation()
        return True
    except PrecisionError:
        return False


# ---------------------------------------------------------------- exact independence over K

class FieldIndependence:
    """Incremental rank test for vectors over Q or Q(sqrt D) (exact division)."""

    def __init__(self):
        self.rows = []

    def _reduce(self, v):
        v = list(v)
        for piv, row in self.rows:
            if v[piv]:
                f = v[piv] / row[piv]
                v = [a - f * b for a, b in zip(v, row)]
        return v

    def add(self, v):
        w = self._reduce(v)
        for piv, c in enumerate(w):
            if c:
                self.rows.append((piv, w))
                return True
        return False

    @property
    def rank(self):
        return len(self.rows)


# ---------------------------------------------------------------- greedy selection

def _greedy(order_keys, vectors, exact_value, N, tracker, order=None):
    """Scan candidates by float value, refining near-ties with exact values.

    Candidates are visited by (value rounded to 1e-8, size, coordinates) so that
    exact ties resolve to the same canonical witness however they were found.
    """
    rounded = [round(float(k), 8) for k in order_keys]
    if order is None:
        order = sorted(range(len(order_keys)), key=lambda i: (rounded[i], _sort_tuple(vectors[i])))
    idx = list(order)
    chosen = []
    p = 0
    while p < len(idx) and len(chosen) < N:
        w = p + 1
        while w < len(idx) and rounded[idx[w]] <= rounded[idx[p]] + 2e-8 and w - p < TIE_CAP:
            w += 1
        window = [(exact_value(vectors[i]), _sort_tuple(vectors[i]), i) for i in idx[p:w]]
        window.sort(key=lambda t: (t[0], t[1]))
        for val, _, i in window:
            if tracker.add(vectors[i]):
                chosen.append((val, vectors[i]))
                if len(chosen) == N:
                    break
        p = w
    return chosen


def _array_order(Lf, X):
    """Same visiting order as _greedy's default, computed with numpy for integer arrays."""
    if X.dtype == object or not len(X):
        return None
    Xf = X.astype(float)
    size = np.einsum("ij,ij->i", Xf, Xf)
    keys = [X[:, j] for j in range(X.shape[1] - 1, -1, -1)] + [size, np.round(Lf, 8)]
    return np.lexsort(keys)


def _sort_tuple(v):
    """Tie-break key: shorter coordinates first, then lexicographic."""
    out = []
    for c in v:
        if isinstance(c, QuadraticNumber):
            out.append((c.a, c.b))
        else:
            out.append((c, 0))
    size = sum(a * a + b * b for a, b in out)
    return (size, tuple(out))


# ---------------------------------------------------------------- Q, archimedean w

@dataclass
class _QEngine:
    A: list            # m x N real matrix (mpf), xi of unit norm
    N: int
    prec: int
    budget: EnumerationBudget
    U: list = None

    def exact_L(self, X, q):
        X = [int(c) for c in X]
        nx = mpmath.log(mpmath.mpf(sum(c * c for c in X))) / 2
        ax = mpmath.sqrt(mpmath.fsum(mpmath.fsum(a * c for a, c in zip(row, X)) ** 2 for row in self.A))
        if ax == 0:
            return nx
        return max(nx, q + mpmath.log(ax))

    def run(self, q):
        N = self.N
        with mpmath.workprec(self.prec):
            qm = _mpq(q)
            s = qm / N
            es, eqs = mpmath.exp(-s), mpmath.exp(qm - s)
            rows = [[es if i == j else mpmath.mpf(0) for j in range(N)] + [eqs * r[i] for r in self.A] for i in range(N)]
            red = lattice.lll(rows, prec=self.prec, U=self.U)
            self.U = red.U
            Bf = red.float_rows()
            sf = float(s)
            std = [self.exact_L([int(i == j) for j in range(N)], qm) for i in range(N)]
            basis_vals = [self.exact_L(u, qm) for u in red.U]
            T = min(max(std), max(basis_vals))
            if float(T) > self.budget.max_height_log:
                return self._fallback(red, qm)
            radius = 2 * math.exp(2 * (float(T) - sf))
            try:
                Z = lattice.enumerate_short(red, radius, self.budget.max_candidates)
            except lattice.BudgetExceeded:
                return self._fallback(red, qm)
            X = lattice.to_original(Z, red.U)
            with np.errstate(divide="ignore"):
                Xf = X.astype(float)
                logx = 0.5 * np.log(np.einsum("ij,ij->i", Xf, Xf))
                Y = Z.astype(float) @ Bf[:, N:]
                logax = 0.5 * np.log(np.einsum("ij,ij->i", Y, Y)) + sf
            Lf = np.maximum(logx, logax)
            keep = (Lf <= float(T) + 1e-7) & lattice.primitive_mask(X)
            X = lattice.normalize_sign(X[keep])
            Lf = Lf[keep]
            vecs = [tuple(int(c) for c in row) for row in X]
            chosen = _greedy(list(Lf), vecs, lambda v: self.exact_L(v, qm), N, lattice.IndependenceTracker(N),
                             order=_array_order(Lf, X))
            if len(chosen) < N:
                raise RuntimeError("enumeration lost independent vectors; numerical trouble")
            return [c[0] for c in chosen], [c[1] for c in chosen], True

    def _fallback(self, red, qm):
        vecs = [tuple(u) for u in red.U] + [tuple(int(i == j) for j in range(self.N)) for i in range(self.N)]
        vals = [float(self.exact_L(v, qm)) for v in vecs]
        chosen = _greedy(vals, [lattice.normalize_sign(np.array([v], dtype=object))[0].tolist() for v in vecs],
                         lambda v: self.exact_L(v, qm), self.N, lattice.IndependenceTracker(self.N))
        return [c[0] for c in chosen], [tuple(c[1]) for c in chosen], False


# ---------------------------------------------------------------- Q, finite w = p

@dataclass
class _PadicEngine:
    residues: list     # xi_i mod p^prec, integers, xi primitive
    p: int
    prec: int          # p-adic digits of xi
    kind: str          # "L" or "Lstar"
    budget: EnumerationBudget

    def valuation_of(self, X):
        R, p, cap = self.residues, self.p, self.prec
        mod = p ** cap
        if self.kind == "L":
            vals = [sum(a * b for a, b in zip(X, R)) % mod]
        else:
            n = len(X)
            vals = [(X[i] * R[j] - X[j] * R[i]) % mod for i in range(n) for j in range(i + 1, n)]
        best = cap
        for v in vals:
            if v:
                best = min(best, valuation(v, p))
        return best

    def exact_L(self, X, q):
        nx = mpmath.log(mpmath.mpf(sum(int(c) ** 2 for c in X))) / 2
        v = self.valuation_of(X)
        if v >= self.prec:
            return nx
        return nx + max(mpmath.mpf(0), q - v * mpmath.log(self.p))

    def sublattice(self, m):
        n, p = len(self.residues), self.p
        mod = p ** m
        j0 = next(i for i, r in enumerate(self.residues) if r % p)
        inv = pow(self.residues[j0], -1, mod) if m > 0 else 0
        rows = []
        if self.kind == "L":
            for i in range(n):
                if i == j0:
                    continue
                r = [0] * n
                r[i] = 1
                r[j0] = (-self.residues[i] * inv) % mod if m > 0 else 0
                rows.append(r)
            last = [0] * n
            last[j0] = mod
            rows.append(last)
        else:
            first = [(c * inv) % mod if m > 0 else int(i == j0) for i, c in enumerate(self.residues)]
            rows.append(first)
            for i in range(n):
                if i != j0:
                    r = [0] * n
                    r[i] = mod
                    rows.append(r)
        if m == 0:
            rows = [[int(i == j) for j in range(n)] for i in range(n)]
        return rows

    def run(self, q):
        n = len(self.residues)
        qm = _mpq(q)
        logp = math.log(self.p)
        M = min(int(math.ceil(float(q) / logp)), self.prec - 1)
        if math.ceil(float(q) / logp) >= self.prec:
            raise PrecisionError("xi is not known to enough p-adic digits for this q")
        bits = 64 + int(3 * M * logp / LN2)
        reduced = []
        for m in range(M + 1):
            rows = self.sublattice(m)
            reduced.append(lattice.lll(rows, prec=bits))
        pool = [tuple(int(c) for c in row) for red in reduced for row in _int_rows(red)]
        pool += [tuple(int(i == j) for j in range(n)) for i in range(n)]
        vals = [float(self.exact_L(v, qm)) for v in pool]
        upper = _greedy(vals, [_canon(v) for v in pool], lambda v: self.exact_L(v, qm), n, lattice.IndependenceTracker(n))
        T = max(c[0] for c in upper)
        cands = {}
        exact = True
        for m, red in enumerate(reduced):
            budget_log = float(T) - max(0.0, float(q) - m * logp)
            if budget_log < 0:
                continue
            try:
                Z = lattice.enumerate_short(red, math.exp(2 * budget_log), self.budget.max_candidates)
            except lattice.BudgetExceeded:
                exact = False
                continue
            X = lattice.to_original(Z, red.U)
            rows = _int_basis_matrix(red)
            X = Z.astype(object) @ np.array(rows, dtype=object)
            X = X[lattice.primitive_mask(X)]
            for row in lattice.normalize_sign(X):
                cands[tuple(int(c) for c in row)] = None
        if not exact:
            return [c[0] for c in upper], [c[1] for c in upper], False
        vecs = list(cands)
        vals = [float(self.exact_L(v, qm)) for v in vecs]
        keep = [i for i, v in enumerate(vals) if v <= float(T) + 1e-7]
        chosen = _greedy([vals[i] for i in keep], [vecs[i] for i in keep], lambda v: self.exact_L(v, qm), n,
                         lattice.IndependenceTracker(n))
        return [c[0] for c in chosen], [c[1] for c in chosen], True


def _int_basis_matrix(red):
    return [[int(mpmath.nint(c)) for c in row] for row in red.rows]


def _int_rows(red):
    return _int_basis_matrix(red)


def _canon(v):
    for c in v:
        if c:
            return tuple(v) if c > 0 else tuple(-x for x in v)
    return tuple(v)


# ---------------------------------------------------------------- quadratic K, archimedean w

@dataclass
class _QuadraticEngine:
    target: object
    A: list
    N: int
    budget: EnumerationBudget
    U: list = None

    def __post_init__(self):
        K, w = self.target.field, self.target.place
        self.K = K
        self.real = K.D > 0
        self.other = None
        if self.real:
            from .numberfield import infinite_places
            self.other = [v for v in infinite_places(K) if v.index != w.index][0]
            eps = K.fundamental_unit()
            with mpmath.workprec(self.target.prec):
                ew = abs(embed(eps, w, K))
            self.unit = eps if ew > 1 else eps.inverse()
            self.eps_w = max(ew, 1 / ew)
        self.M = max(int(mpmath.floor(K.minkowski_bound())), 1)
        self.basis = [K.element(1), K.omega]

    def vector(self, z):
        N = self.N
        return tuple(self.K.from_basis(int(z[2 * i]), int(z[2 * i + 1])) for i in range(N))

    def exact_L(self, X, q):
        t = self.target
        hp = height_power(X, self.K)
        logH = (mpmath.log(hp.numerator) - mpmath.log(hp.denominator)) / (2 * self.K.degree)
        img = [embed(c, t.place, self.K) for c in X]
        nx = mpmath.sqrt(sum(abs(c) ** 2 for c in img))
        ax = mpmath.sqrt(mpmath.fsum(abs(mpmath.fsum(a * c for a, c in zip(row, img))) ** 2 for row in self.A))
        if ax == 0:
            return logH
        weight = mpmath.mpf(t.place.local_degree) / self.K.degree
        return max(logH, q + logH + weight * (mpmath.log(ax) - mpmath.log(nx)))

    def _embed_row(self, X, scales):
        K, w = self.K, self.target.place
        img = [embed(c, w, K) for c in X]
        ax = [mpmath.fsum(a * c for a, c in zip(row, img)) for row in self.A]
        if self.real:
            oth = [embed(c, self.other, K) for c in X]
            ra, rc, rb = scales
            return [c / ra for c in img] + [c / rc for c in ax] + [c / rb for c in oth]
        ra, rc = scales
        return ([mpmath.re(c) / ra for c in img] + [mpmath.im(c) / ra for c in img]
                + [mpmath.re(c) / rc for c in ax] + [mpmath.im(c) / rc for c in ax])

    def scales(self, T, q):
        M = mpmath.mpf(self.M)
        if self.real:
            beta = mpmath.exp(T) * mpmath.sqrt(M / self.eps_w)
            return (mpmath.exp(2 * T) * M / beta, mpmath.exp(2 * (T - q)) * M / beta, beta * self.eps_w)
        return (mpmath.exp(T) * mpmath.sqrt(M), mpmath.exp(T - q) * mpmath.sqrt(M))

    def rows(self, T, q):
        out = []
        sc = self.scales(T, q)
        for i in range(self.N):
            for g in self.basis:
                X = [self.K.element(0)] * self.N
                X[i] = g
                out.append(self._embed_row(X, sc))
        return out

    def twist(self, X):
        if not self.real:
            return 0
        a = mpmath.sqrt(sum(embed(c, self.target.place, self.K) ** 2 for c in X))
        b = mpmath.sqrt(sum(embed(c, self.other, self.K) ** 2 for c in X))
        return int(mpmath.nint(mpmath.log(a / b) / (2 * mpmath.log(self.eps_w))))

    def run(self, q):
        N, K = self.N, self.K
        prec = max(self.target.prec, _required_prec(q) + 32)
        with mpmath.workprec(prec):
            qm = _mpq(q)
            std = [[K.element(int(i == j)) for j in range(N)] for i in range(N)]
            T0 = max(self.exact_L(v, qm) for v in std)
            red = lattice.lll(self.rows(T0, qm), prec=prec, U=self.U)
            pool = [self.vector(u) for u in red.U] + [tuple(v) for v in std]
            pool = [v for v in pool if any(v)]
            vals = [float(self.exact_L(v, qm)) for v in pool]
            upper = _greedy(vals, pool, lambda v: self.exact_L(v, qm), N, FieldIndependence())
            T = min(T0, max(c[0] for c in upper))
            if float(T) > self.budget.max_height_log:
                return [c[0] for c in upper], [c[1] for c in upper], False, 0
            if T < T0:
                red = lattice.lll(self.rows(T, qm), prec=prec, U=red.U)
            self.U = red.U
            dim_a = N if self.real else 2 * N
            dim_c = len(self.A) * (1 if self.real else 2)
            radius = (3 if self.real else 2) * (1 + 1e-9)
            try:
                Z = lattice.enumerate_short(red, radius, self.budget.max_candidates)
            except lattice.BudgetExceeded:
                return [c[0] for c in upper], [c[1] for c in upper], False, 0
            Bf = red.float_rows()
            Y = Z.astype(float) @ Bf
            sc = [float(s) for s in self.scales(T, qm)]
            a = np.sqrt(np.einsum("ij,ij->i", Y[:, :dim_a], Y[:, :dim_a])) * sc[0]
            c = np.sqrt(np.einsum("ij,ij->i", Y[:, dim_a:dim_a + dim_c], Y[:, dim_a:dim_a + dim_c])) * sc[1]
            Tf, qf, M = float(T), float(q), self.M
            if self.real:
                b = np.sqrt(np.einsum("ij,ij->i", Y[:, dim_a + dim_c:], Y[:, dim_a + dim_c:])) * sc[2]
                keep = (a * b <= math.exp(2 * Tf) * M * (1 + 1e-6)) & (b * c <= math.exp(2 * (Tf - qf)) * M * (1 + 1e-6))
            else:
                keep = (a * a <= math.exp(2 * Tf) * M * (1 + 1e-6)) & (c * c <= math.exp(2 * (Tf - qf)) * M * (1 + 1e-6))
            Zk = Z[keep]
            orig = lattice.to_original(Zk, red.U)
            seen = {}
            for z in orig:
                X = self.vector(z)
                if not any(X):
                    continue
                key = _projective_key(X)
                if key in seen:
                    continue
                seen[key] = X
            vecs = list(seen.values())
            vals = [float(self.exact_L(v, qm)) for v in vecs]
            keep_idx = [i for i, v in enumerate(vals) if v <= Tf + 1e-7]
            chosen = _greedy([vals[i] for i in keep_idx], [vecs[i] for i in keep_idx],
                             lambda v: self.exact_L(v, qm), N, FieldIndependence())
            if len(chosen) < N:
                raise RuntimeError("quadratic enumeration lost independent vectors")
            twist = max(abs(self.twist(v)) for _, v in chosen)
            return [c[0] for c in chosen], [c[1] for c in chosen], True, twist


def _projective_key(X):
    first = next(c for c in X if c)
    return tuple(_sort_tuple([c / first for c in X]))


# ---------------------------------------------------------------- profiles

def _engine_for(target, kind, k, budget):
    K, w = target.field, target.place
    if kind == "Lstar" and k != 1:
        raise ValueError("L* is a grade-1 map; use kind='compound' with k=n-1 for the dual grade")
    with mpmath.workprec(target.prec):
        A, N = smallness_matrix(target, kind, k)
    if K.D == 1 and w.archimedean:
        return _QEngine(A, N, target.prec, budget)
    if K.D == 1:
        if k != 1:
            raise NotImplementedError("compound maps at a finite place are not supported")
        digits = min(c.prec for c in target.xi)
        return _PadicEngine([c.residue(digits) for c in target.xi], w.p, digits,
                            "Lstar" if kind == "Lstar" else "L", budget)
    if not w.archimedean:
        raise NotImplementedError("finite places over quadratic fields are not supported by the enumerator")
    return _QuadraticEngine(target, A, N, budget)


def _run_chunk(target, kind, k, budget, qs):
    engine = _engine_for(target, kind, k, budget)
    out = []
    for q in qs:
        _check_precision(target, q)
        res = engine.run(q)
        out.append(res)
    return out


def thread_count():
    try:
        return max(1, int(os.environ.get("PARAGEO_THREADS", "1")))
    except ValueError:
        return 1


def profile(target, qs, k=1, kind="L", budget=None, threads=None):
    """Minima of L (kind='L', k=1), L* (kind='Lstar') or L^(k) (kind='compound') on the grid qs."""
    budget = budget or EnumerationBudget()
    if kind == "compound" and k == 1:
        kind = "L"
    qs = list(qs)
    threads = threads or thread_count()
    if threads == 1:
        results = _run_chunk(target, kind, k, budget, qs)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda c: _run_chunk(target, kind, k, budget, c), _split(qs, threads)))
        results = [r for part in parts for r in part]
    values, wits, exact, twists = [], [], [], []
    for r in results:
        values.append(r[0])
        wits.append(r[1])
        exact.append(r[2])
        if len(r) > 3:
            twists.append(r[3])
    return MinimaProfile(target.name or "target", k, kind, qs, values, wits, exact,
                         max(twists) if twists else None)


def _split(qs, parts):
    size = max(1, math.ceil(len(qs) / parts))
    return [qs[i:i + size] for i in range(0, len(qs), size)]


# ---------------------------------------------------------------- derived checks

def sum_rule_sup(prof):
    """max over the grid of |L_1 + ... + L_N - q| (Minkowski's second theorem in log form)."""
    return max(abs(mpmath.fsum(v) - _mpq(q)) for q, v in zip(prof.q_grid, prof.values))


def duality_sum_check(prof_L, prof_Lstar):
    """max over the grid and j + k = n + 1 of |L*_j(q) + L_k(q) - q|."""
    if list(prof_L.q_grid) != list(prof_Lstar.q_grid):
        raise ValueError("grid mismatch")
    n = prof_L.N
    worst = mpmath.mpf(0)
    for q, a, b in zip(prof_L.q_grid, prof_L.values, prof_Lstar.values):
        for j in range(1, n + 1):
            worst = max(worst, abs(b[j - 1] + a[n - j] - _mpq(q)))
    return worst


def compound_from_minima(values, k, N):
    """Sorted sums of k distinct entries: log of the compound products Lambda_j."""
    sums = sorted(mpmath.fsum(c) for c in combinations(values, k))
    return sums[:N]


def burger_comparability_check(prof_L, prof_k):
    """max over the grid of |L^(k)_j(q) - log Lambda_j(q)|, Lambda from the grade-1 minima."""
    if list(prof_L.q_grid) != list(prof_k.q_grid):
        raise ValueError("grid mismatch")
    k, N = prof_k.k, prof_k.N
    worst = mpmath.mpf(0)
    for base, comp in zip(prof_L.values, prof_k.values):
        lam = compound_from_minima(base, k, N)
        worst = max(worst, max(abs(a - b) for a, b in zip(comp, lam)))
    return worst


def exponents_from_profile(prof):
    """Window estimates of liminf / limsup of L_1/q over the upper half of the grid."""
    tail = [(q, v) for q, v in zip(prof.q_grid, prof.values) if q >= prof.q_grid[-1] / 2 and q > 0]
    if len(tail) < 8:
        raise ValueError("grid too short: need at least 8 points in the upper half")
    ratios = [v[0] / _mpq(q) for q, v in tail]
    lo, hi = min(ratios), max(ratios)

    def inv(x):
        return mpmath.inf if x == 0 else 1 / x - 1

    names = {"L": ("omega", "omega_hat"), "Lstar": ("lambda", "lambda_hat")}
    if prof.kind in names:
        a, b = names[prof.kind]
    else:
        n = round(_solve_n(prof.N, prof.k))
        a, b = f"omega_{n - prof.k - 1}", f"omega_hat_{n - prof.k - 1}"
    return {"finite_horizon": True, "ratio_min": lo, "ratio_max": hi, a: inv(lo), b: inv(hi)}


def _solve_n(N, k):
    n = k + 1
    while math.comb(n, k) < N:
        n += 1
    return n

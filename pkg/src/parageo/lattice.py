"""LLL reduction in mpmath and Fincke-Pohst enumeration of ellipsoids.

A lattice is given by the real images of the basis of Z^N (one row per basis
vector).  ``lll`` returns the reduced rows together with the unimodular
integer matrix U such that reduced = U * rows, and ``enumerate_short`` lists
the integer coefficient vectors z (with respect to the reduced rows) whose
image has squared length at most a radius.
"""

from dataclasses import dataclass
from math import gcd

import mpmath
import numpy as np


@dataclass
class Reduced:
    rows: list          # reduced basis rows (mpf)
    U: list             # integer transform, reduced = U * original
    mu: list            # Gram-Schmidt coefficients
    bstar: list         # squared Gram-Schmidt norms

    @property
    def dim(self):
        return len(self.rows)

    def float_rows(self):
        return np.array([[float(c) for c in r] for r in self.rows], dtype=float)


def _dot(u, v):
    return mpmath.fsum(a * b for a, b in zip(u, v))


def gram_schmidt(rows, start=0, mu=None, bstar=None, star=None):
    n = len(rows)
    if mu is None:
        mu = [[mpmath.mpf(0)] * n for _ in range(n)]
        bstar = [mpmath.mpf(0)] * n
        star = [None] * n
    for i in range(start, n):
        v = list(rows[i])
        for j in range(i):
            mu[i][j] = _dot(rows[i], star[j]) / bstar[j] if bstar[j] else mpmath.mpf(0)
            if mu[i][j]:
                v = [a - mu[i][j] * b for a, b in zip(v, star[j])]
        star[i] = v
        bstar[i] = _dot(v, v)
    return mu, bstar, star


def lll(rows, delta=0.99, prec=128, U=None):
    """LLL-reduce linearly independent real rows.  U warm-starts from a previous transform."""
    with mpmath.workprec(prec):
        n = len(rows)
        rows = [[mpmath.mpf(c) for c in r] for r in rows]
        if U is None:
            U = [[int(i == j) for j in range(n)] for i in range(n)]
            B = rows
        else:
            U = [list(u) for u in U]
            B = [[mpmath.fsum(U[i][k] * rows[k][c] for k in range(n)) for c in range(len(rows[0]))]
                 for i in range(n)]
        mu, bstar, star = gram_schmidt(B)
        if any(b == 0 for b in bstar):
            raise ValueError("rows are linearly dependent")
        k = 1
        while k < n:
            for j in range(k - 1, -1, -1):
                r = int(mpmath.nint(mu[k][j]))
                if r:
                    B[k] = [a - r * b for a, b in zip(B[k], B[j])]
                    U[k] = [a - r * b for a, b in zip(U[k], U[j])]
                    for i in range(j):
                        mu[k][i] -= r * mu[j][i]
                    mu[k][j] -= r
            if bstar[k] >= (delta - mu[k][k - 1] ** 2) * bstar[k - 1]:
                k += 1
            else:
                B[k], B[k - 1] = B[k - 1], B[k]
                U[k], U[k - 1] = U[k - 1], U[k]
                mu, bstar, star = gram_schmidt(B, k - 1, mu, bstar, star)
                k = max(k - 1, 1)
        return Reduced(B, U, mu, bstar)


class BudgetExceeded(RuntimeError):
    pass


def enumerate_short(red, radius_sq, max_points=5_000_000):
    """All z != 0 with ||sum z_i b_i||^2 <= radius_sq, one of each pair ±z.

    The representative kept is the one whose last nonzero coordinate is
    positive.  Returns an int64 array of shape (count, N).  Raises
    BudgetExceeded when more than max_points would be produced.
    """
    N = red.dim
    mu = np.array([[float(c) for c in r] for r in red.mu])
    bstar = np.array([float(c) for c in red.bstar])
    R = float(radius_sq) * (1 + 1e-9) + 1e-300
    chunks = []
    count = 0
    z = np.zeros(N, dtype=np.int64)

    def emit(block):
        nonlocal count
        count += len(block)
        if count > max_points:
            raise BudgetExceeded(f"more than {max_points} lattice points")
        chunks.append(block)

    def recurse(i, partial, nonzero_above):
        centre = -float(np.dot(mu[i + 1:, i], z[i + 1:])) if i + 1 < N else 0.0
        room = R - partial
        if room < 0:
            return
        half = np.sqrt(room / bstar[i])
        lo, hi = int(np.ceil(centre - half)), int(np.floor(centre + half))
        if not nonzero_above:
            lo = max(lo, 0)
        if lo > hi:
            return
        if i == 0:
            vals = np.arange(lo, hi + 1, dtype=np.int64)
            if not nonzero_above:
                vals = vals[vals > 0]
            if len(vals):
                block = np.empty((len(vals), N), dtype=np.int64)
                block[:, 1:] = z[1:]
                block[:, 0] = vals
                emit(block)
            return
        for v in range(lo, hi + 1):
            z[i] = v
            recurse(i - 1, partial + bstar[i] * (v - centre) ** 2, nonzero_above or v != 0)
        z[i] = 0

    recurse(N - 1, 0.0, False)
    if not chunks:
        return np.zeros((0, N), dtype=np.int64)
    return np.concatenate(chunks)


def to_original(Z, U):
    """Coefficient vectors in the original basis; Python ints when int64 could overflow."""
    Uarr = np.array(U, dtype=object)
    umax = max(abs(int(c)) for row in U for c in row) if len(U) else 0
    zmax = int(np.abs(Z).max()) if len(Z) else 0
    if umax * zmax * max(len(U), 1) < 2 ** 62:
        return Z @ np.array(U, dtype=np.int64)
    return Z.astype(object) @ Uarr


def primitive_mask(X):
    """Rows with gcd 1."""
    if X.dtype == object:
        out = []
        for row in X:
            g = 0
            for c in row:
                g = gcd(g, int(c))
            out.append(g == 1)
        return np.array(out, dtype=bool)
    return np.gcd.reduce(X, axis=1) == 1


def normalize_sign(X):
    """Flip rows so that the first nonzero coordinate is positive."""
    if X.dtype != object and len(X):
        first = np.argmax(X != 0, axis=1)
        sign = np.sign(X[np.arange(len(X)), first])
        sign[sign == 0] = 1
        return X * sign[:, None]
    X = X.copy()
    for i in range(len(X)):
        for c in X[i]:
            if c != 0:
                if c < 0:
                    X[i] = -X[i]
                break
    return X


class IndependenceTracker:
    """Incremental exact rank test over Q (fraction-free integer echelon form)."""

    def __init__(self, dim):
        self.dim = dim
        self.rows = []      # (pivot, integer row)

    def _reduce(self, v):
        v = [int(c) for c in v]
        for piv, row in self.rows:
            if v[piv]:
                a, b = row[piv], v[piv]
                v = [a * x - b * y for x, y in zip(v, row)]
                g = 0
                for c in v:
                    g = gcd(g, c)
                if g > 1:
                    v = [c // g for c in v]
        return v

    def is_independent(self, v):
        return any(self._reduce(v))

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

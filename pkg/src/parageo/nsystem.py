"""n-systems: piecewise linear maps [q0, inf) -> R^n stored by their switch data.

Between two switch numbers q_i < q_{i+1} the sorted vector P(q) is
sort(a^(i) + (q - q_i) e_k) where a^(i) = P(q_i) and k = k_i is the sorted
position that starts rising at q_i.  The arrival position l_i is the sorted
position reached at q_i by the segment that was rising just before.  Both
positions are 1-based.  With ties, k is normalized to the largest index of
the tied block and l to the smallest one.

A periodic tail repeats the last m switches under the affine map
q -> rho*q + dq, a -> rho*a + dv (rho = 1 is a plain translation).
"""

import bisect
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Optional

from .contracts import ContractViolation, Violation

FLOAT_TOL = 1e-9


def to_number(x):
    """Fractions stay exact, strings like '3/2' or '0.25' become Fractions, floats stay floats."""
    if isinstance(x, (Fraction, float)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as a number")


def number_to_json(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return repr(float(x))


def _is_exact(*xs):
    return all(isinstance(x, Fraction) for x in xs)


def _eq(a, b, scale=0):
    if _is_exact(a, b):
        return a == b
    return abs(a - b) <= FLOAT_TOL * (1 + abs(scale))


def _gt(a, b):
    if _is_exact(a, b):
        return a > b
    return a - b > FLOAT_TOL


def rise_position(values, value):
    """Largest 1-based index holding value (the rising member of a tied block)."""
    pos = None
    for j, v in enumerate(values):
        if _eq(v, value, value):
            pos = j + 1
    return pos


def arrival_position(values, value):
    for j, v in enumerate(values):
        if _eq(v, value, value):
            return j + 1
    return None


@dataclass(frozen=True)
class Switch:
    q: object
    values: tuple
    k: int
    l: Optional[int] = None


@dataclass(frozen=True)
class PeriodicTail:
    m: int
    dq: object
    dv: tuple
    scale: object = Fraction(1)

    def factors(self, t):
        """(rho^t, 1 + rho + ... + rho^(t-1))."""
        rho = self.scale
        if rho == 1:
            return 1, t
        p = rho ** t
        return p, (p - 1) / (rho - 1)

    def apply(self, sw, t):
        if t == 0:
            return sw
        p, g = self.factors(t)
        return Switch(p * sw.q + g * self.dq, tuple(p * a + g * d for a, d in zip(sw.values, self.dv)), sw.k, sw.l)


@dataclass(frozen=True)
class NSystem:
    n: int
    q0: object
    switches: tuple
    tail: Optional[PeriodicTail] = None
    horizon: object = None
    mesh: object = None
    _qs: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "switches", tuple(self.switches))
        object.__setattr__(self, "_qs", tuple(sw.q for sw in self.switches))

    @property
    def exact(self):
        vals = [self.q0] + [sw.q for sw in self.switches] + [v for sw in self.switches for v in sw.values]
        if self.tail:
            vals += [self.tail.dq, self.tail.scale, *self.tail.dv]
        return all(isinstance(v, Fraction) for v in vals)

    @property
    def infinite(self):
        return self.tail is not None or self.horizon is None

    def switch(self, i):
        s = len(self.switches)
        if i < s:
            return self.switches[i]
        if self.tail is None:
            raise IndexError("no switch beyond a finite system")
        b = s - self.tail.m
        t, j = divmod(i - b, self.tail.m)
        return self.tail.apply(self.switches[b + j], t)

    def has_switch(self, i):
        return i < len(self.switches) or self.tail is not None

    def _period_of(self, q):
        """Largest t with T^t(q_b) <= q."""
        tail = self.tail
        b = len(self.switches) - tail.m
        qb = self.switches[b].q
        if tail.scale == 1:
            t = max(int(math.floor((q - qb) / tail.dq)), 0)
        else:
            shift = tail.dq / (tail.scale - 1)
            ratio = float((q + shift) / (qb + shift))
            t = max(int(math.floor(math.log(ratio) / math.log(float(tail.scale)))), 0) if ratio > 0 else 0
        while self.switch(b + (t + 1) * tail.m).q <= q:
            t += 1
        while t > 0 and self.switch(b + t * tail.m).q > q:
            t -= 1
        return t

    def segment_index(self, q):
        """Index i of the switch with q_i <= q < q_{i+1}."""
        if q < self.q0 and not _eq(q, self.q0, q):
            raise ValueError(f"q={q} lies before q0={self.q0}")
        if self.horizon is not None and self.tail is None and _gt(q, self.horizon):
            raise ValueError(f"q={q} lies beyond the finite horizon {self.horizon}")
        if self.tail is None or q < self._qs[-1]:
            return max(bisect.bisect_right(self._qs, q) - 1, 0)
        b = len(self.switches) - self.tail.m
        t = self._period_of(q)
        i = b + t * self.tail.m
        while self.switch(i + 1).q <= q:
            i += 1
        return i

    def evaluate(self, q):
        q = to_number(q) if not isinstance(q, (Fraction, float)) else q
        sw = self.switch(self.segment_index(q))
        v = list(sw.values)
        v[sw.k - 1] = v[sw.k - 1] + (q - sw.q)
        return tuple(sorted(v))

    __call__ = evaluate

    def rising_value(self, q):
        sw = self.switch(self.segment_index(q))
        return sw.values[sw.k - 1] + (q - sw.q)

    def rising_position(self, q):
        """Sorted position of the rising component just to the right of q."""
        return rise_position(self.evaluate(q), self.rising_value(q))

    def next_switch_q(self, i):
        if self.has_switch(i + 1):
            return self.switch(i + 1).q
        return self.horizon

    def breakpoints(self, lo, hi):
        """Switches and crossing abscissae in [lo, hi], plus both ends (sorted, exact when possible)."""
        pts = {lo, hi}
        i = self.segment_index(lo)
        while True:
            sw = self.switch(i)
            if sw.q > hi:
                break
            end = self.next_switch_q(i)
            if lo <= sw.q:
                pts.add(sw.q)
            base = sw.values[sw.k - 1]
            for a in sw.values:
                if a > base:
                    c = sw.q + (a - base)
                    if lo <= c <= hi and (end is None or c < end):
                        pts.add(c)
            if end is None or not self.has_switch(i + 1):
                break
            i += 1
        return sorted(pts)

    def last_stored_q(self):
        return self._qs[-1]

    def settle_point(self):
        """For a finite system without horizon: the q after which the top component rises forever."""
        sw = self.switches[-1]
        return sw.q + (sw.values[-1] - sw.values[sw.k - 1])


def canonicalize(sys):
    """Normalize k to the top of its tied block and l to the bottom of its block."""
    out = []
    for i, sw in enumerate(sys.switches):
        k = rise_position(sw.values, sw.values[sw.k - 1])
        l = arrival_position(sw.values, sw.values[sw.l - 1]) if sw.l else None
        out.append(Switch(sw.q, sw.values, k, l))
    return replace(sys, switches=tuple(out))


def validate(sys, periods=2):
    """List of violations of (S1)-(S3), domain and tail conditions (empty means valid)."""
    V = []
    n = sys.n
    if n < 1:
        return [Violation("shape", None, "n must be positive")]
    if not sys.switches:
        return [Violation("shape", None, "no switches")]
    if not _eq(sys.switches[0].q, sys.q0, sys.q0):
        V.append(Violation("domain", 0, "first switch must sit at q0"))
    total = len(sys.switches)
    if sys.tail is not None:
        t = sys.tail
        if not 1 <= t.m <= len(sys.switches):
            return V + [Violation("tail", None, f"period length m={t.m} out of range")]
        if len(t.dv) != n:
            return V + [Violation("tail", None, "dv has wrong length")]
        if t.scale < 1 or (t.scale == 1 and not _gt(t.dq, 0)):
            V.append(Violation("tail", None, "tail must move forward (scale >= 1, dq > 0 when scale = 1)"))
            return V
        if not _eq(sum(t.dv), t.dq, t.dq):
            V.append(Violation("tail", None, "sum of dv must equal dq"))
        total += periods * t.m
    prev = None
    for i in range(total):
        sw = sys.switch(i)
        where = i if i < len(sys.switches) else f"{i} (tail)"
        if len(sw.values) != n:
            V.append(Violation("shape", where, "wrong number of values"))
            return V
        if any(_gt(a, b) for a, b in zip(sw.values, sw.values[1:])):
            V.append(Violation("S1", where, "values are not nondecreasing"))
        if _gt(0, sw.values[0]):
            V.append(Violation("S1", where, "negative value"))
        if not _eq(sum(sw.values), sw.q, sw.q):
            V.append(Violation("S1", where, f"values sum to {sum(sw.values)} instead of q={sw.q}"))
        if not 1 <= sw.k <= n:
            V.append(Violation("S2", where, f"rise index k={sw.k} out of range"))
            return V
        if prev is not None:
            dq = sw.q - prev.q
            if not _gt(dq, 0):
                V.append(Violation("S2", where, "switch numbers must increase strictly"))
                return V
            moved = list(prev.values)
            moved[prev.k - 1] = moved[prev.k - 1] + dq
            moved.sort()
            if any(not _eq(a, b, sw.q) for a, b in zip(moved, sw.values)):
                V.append(Violation("S2", where, "values do not follow from the previous rise"))
            if sw.l is None or not 1 <= sw.l <= n:
                V.append(Violation("S2", where, "missing or invalid arrival index l"))
            else:
                if not _eq(sw.values[sw.l - 1], prev.values[prev.k - 1] + dq, sw.q):
                    V.append(Violation("S2", where, "arrival index l does not hold the risen value"))
                if not _gt(sw.values[sw.l - 1], sw.values[sw.k - 1]):
                    V.append(Violation("S3", where, "previous segment does not end strictly above the next start"))
        prev = sw
    if sys.horizon is not None and sys.tail is None and _gt(sys.switches[-1].q, sys.horizon):
        V.append(Violation("domain", None, "horizon precedes the last switch"))
    return V


def is_valid(sys):
    return not validate(sys)


@dataclass(frozen=True)
class DualSystem:
    """P*(q) = (q - P_n(q), ..., q - P_1(q)); stored through the original system."""

    base: NSystem

    @property
    def n(self):
        return self.base.n

    @property
    def q0(self):
        return self.base.q0

    @property
    def horizon(self):
        return self.base.horizon

    def evaluate(self, q):
        return tuple(q - x for x in reversed(self.base.evaluate(q)))

    __call__ = evaluate

    def breakpoints(self, lo, hi):
        return self.base.breakpoints(lo, hi)

    @property
    def switches(self):
        return tuple(Switch(sw.q, tuple(sw.q - x for x in reversed(sw.values)), self.n + 1 - sw.k,
                            None if sw.l is None else self.n + 1 - sw.l) for sw in self.base.switches)


def dual(sys):
    if isinstance(sys, DualSystem):
        return sys.base
    return DualSystem(sys)


def _multiple_of(x, chi):
    r = x / chi
    if isinstance(r, Fraction):
        return r.denominator == 1
    return abs(r - round(r)) <= FLOAT_TOL * (1 + abs(r))


def rigidity_violations(sys, chi, start=None, periods=2):
    V = []
    points = []
    count = len(sys.switches) + (periods * sys.tail.m if sys.tail else 0)
    for i in range(count):
        sw = sys.switch(i)
        if start is None or sw.q >= start:
            points.append((sw.q, sw.values))
    if start is not None and all(not _eq(q, start, start) for q, _ in points):
        points.append((start, sys.evaluate(start)))
    for q, vals in points:
        if any(not _gt(v, 0) for v in vals):
            V.append(Violation("rigid", q, "nonpositive value"))
        elif any(not _multiple_of(v, chi) for v in vals):
            V.append(Violation("rigid", q, f"value not a multiple of {chi}"))
        elif any(_eq(a, b, q) for a, b in zip(vals, vals[1:])):
            V.append(Violation("rigid", q, "repeated value"))
    if sys.tail is not None:
        t = sys.tail
        if not (_multiple_of(t.scale, 1) and all(_multiple_of(d, chi) for d in t.dv)):
            V.append(Violation("rigid", "tail", "tail map does not preserve the mesh"))
    return V


def is_rigid(sys, chi, start=None):
    """True iff every switch value (from start on) is a distinct positive multiple of chi."""
    return not rigidity_violations(sys, to_number(chi), start)


def template_system(n, c=1):
    """Rigid template: R(t_i) = (0,...,0,c,2c,...,ic) at t_i = (1+...+i)c, then a translation tail."""
    c = to_number(c)
    zero = c * 0
    sws = [Switch(zero, (zero,) * n, n, None)]
    for i in range(1, n):
        vals = (zero,) * (n - i) + tuple(c * j for j in range(1, i + 1))
        sws.append(Switch(c * (i * (i + 1)) / 2, vals, n - i, n))
    tn = c * (n * (n + 1)) / 2
    sws.append(Switch(tn, tuple(c * j for j in range(1, n + 1)), 1, n))
    return NSystem(n, zero, tuple(sws), PeriodicTail(1, n * c, (c,) * n), mesh=c)


def template_times(n, c=1):
    c = to_number(c)
    return [c * (i * (i + 1)) / 2 for i in range(n + 1)]


# ---------------------------------------------------------------- rigidify

def _decide(strategy, L, s, r, chi, q_units, distinct):
    n = len(s)
    if not distinct or r == 1:
        return r
    if strategy == "follow":
        target = L.rising_position(chi * q_units + chi / 2)
        return target if target < r else r
    nxt = L.evaluate(chi * (q_units + 1))
    if strategy == "deficit":
        deficits = [nxt[j] - chi * s[j] for j in range(n)]
        best = max(range(n), key=lambda j: (deficits[j], -j))
        return best + 1 if best + 1 < r else r
    best, best_err = r, None
    for cand in [r] + list(range(r - 1, 0, -1)):
        t = list(s)
        t[cand - 1] += 1
        t.sort()
        err = max(abs(nxt[j] - chi * t[j]) for j in range(n))
        if best_err is None or err < best_err:
            best, best_err = cand, err
    return best


def _rigidify_with(L, c, horizon, strategy, max_units):
    n = L.n
    chi = c / 2
    tmpl = template_system(n, c)
    out = list(tmpl.switches[:n])
    s = [2 * (j + 1) for j in range(n)]
    q_units = n * (n + 1)
    r = n
    distinct = True
    if horizon is not None:
        end_units = int(math.floor(horizon / chi))
    elif L.horizon is not None and L.tail is None:
        end_units = int(math.floor(L.horizon / chi))
    elif L.tail is not None:
        raise ValueError("a periodic system needs an explicit horizon")
    else:
        end_units = None
        settle = max(L.settle_point(), L.last_stored_q())
    first = True
    while True:
        if end_units is not None and q_units >= end_units:
            break
        if end_units is None and chi * q_units >= settle and r == n and distinct:
            break
        if q_units > max_units:
            raise ContractViolation([Violation("rigidify", q_units, "controller did not settle")], "rigidify")
        new_r = _decide(strategy, L, s, r, chi, q_units, distinct)
        if first:
            # t_n is a switch of the template unless the top keeps rising
            if new_r != n:
                out.append(Switch(chi * q_units, tuple(chi * x for x in s), new_r, n))
            first = False
        elif new_r != r:
            out.append(Switch(chi * q_units, tuple(chi * x for x in s), new_r, r))
        r = new_r
        s[r - 1] += 1
        q_units += 1
        distinct = True
        if r < n and s[r - 1] == s[r]:
            r += 1
            distinct = False
    if first:
        out.append(tmpl.switches[n])
    hz = None if end_units is None else chi * max(end_units, n * (n + 1))
    return NSystem(n, out[0].q, tuple(out), None, hz, chi)


def check_rigidify(L, R, c, horizon=None):
    """The four output clauses: valid, rigid of mesh c/2 from q0, close to L, R_1 rising after q0."""
    n = L.n
    c = to_number(c)
    V = list(validate(R))
    q0 = Fraction(n * n - n + 1, 2) * c if isinstance(c, Fraction) else (n * n - n + 1) * c / 2
    V += rigidity_violations(R, c / 2, start=q0)
    r0, r1 = R.evaluate(q0), R.evaluate(q0 + c / 2)
    if not _eq(r1[0] - r0[0], c / 2, c):
        V.append(Violation("slope", q0, "R_1 does not rise on [q0, q0 + c'/2]"))
    ends = [h for h in (R.horizon, horizon, None if L.tail else L.horizon) if h is not None]
    if ends:
        upper = min(ends)
    else:
        upper = max(L.settle_point(), R.settle_point(), L.last_stored_q(), R.last_stored_q()) + 1
    bound = 4 * n * n * c
    pts = sorted(set(L.breakpoints(L.q0, upper)) | set(R.breakpoints(R.q0, upper)))
    worst = 0
    for q in pts:
        a, b = L.evaluate(q), R.evaluate(q)
        d = max(abs(x - y) for x, y in zip(a, b))
        worst = max(worst, d)
        if _gt(d, bound):
            V.append(Violation("distance", q, f"max |L_k - R_k| = {d} exceeds {bound}"))
            break
    return V


def rigidify(L, c=1, horizon=None, strategy=None, max_units=10 ** 6):
    """A rigid n-system of mesh c/2 on [(n^2-n+1)c/2, inf) within 4n^2 c of L (contract-checked)."""
    c = to_number(c)
    bad = validate(L)
    if bad:
        raise ContractViolation(bad, "rigidify input")
    if not _eq(L.q0, 0):
        raise ValueError("rigidify expects a system on [0, inf)")
    strategies = [strategy] if strategy else ["follow", "deficit", "greedy"]
    last = None
    for st in strategies:
        R = _rigidify_with(L, c, horizon, st, max_units)
        last = check_rigidify(L, R, c, horizon)
        if not last:
            return R
    raise ContractViolation(last, "rigidify")


# ---------------------------------------------------------------- exponents

@dataclass(frozen=True)
class Exponents:
    phi_lower: tuple
    phi_upper: tuple
    psi_lower: tuple
    psi_upper: tuple
    finite_horizon: bool = False

    @staticmethod
    def _inv(x):
        return math.inf if x == 0 else 1 / x - 1

    @property
    def omega(self):
        return self._inv(self.phi_lower[0])

    @property
    def omega_hat(self):
        return self._inv(self.phi_upper[0])

    @property
    def lam(self):
        return self._inv(1 - self.phi_upper[-1])

    @property
    def lam_hat(self):
        return self._inv(1 - self.phi_lower[-1])

    @property
    def omega_k(self):
        """(omega_0, ..., omega_{n-2}) from the partial-sum liminfs."""
        n = len(self.phi_lower)
        return tuple(self._inv(self.psi_lower[n - 2 - m]) for m in range(n - 1))

    @property
    def omega_hat_k(self):
        n = len(self.phi_lower)
        return tuple(self._inv(self.psi_upper[n - 2 - m]) for m in range(n - 1))

    def as_dict(self):
        def enc(x):
            if x == math.inf:
                return "inf"
            return number_to_json(x)
        return {
            "phi_lower": [enc(x) for x in self.phi_lower], "phi_upper": [enc(x) for x in self.phi_upper],
            "psi_lower": [enc(x) for x in self.psi_lower], "psi_upper": [enc(x) for x in self.psi_upper],
            "omega": enc(self.omega), "omega_hat": enc(self.omega_hat),
            "lambda": enc(self.lam), "lambda_hat": enc(self.lam_hat),
            "omega_k": [enc(x) for x in self.omega_k], "omega_hat_k": [enc(x) for x in self.omega_hat_k],
            "finite_horizon": self.finite_horizon,
        }


def _ratio_profile(points):
    """points: list of (Q, V) with V sorted; returns per-component and partial-sum extrema."""
    n = len(points[0][1])
    phi_lo, phi_hi = [None] * n, [None] * n
    psi_lo, psi_hi = [None] * (n - 1), [None] * (n - 1)
    for Q, V in points:
        acc = 0
        for j in range(n):
            r = V[j] / Q
            phi_lo[j] = r if phi_lo[j] is None else min(phi_lo[j], r)
            phi_hi[j] = r if phi_hi[j] is None else max(phi_hi[j], r)
            if j < n - 1:
                acc = acc + V[j]
                rs = acc / Q
                psi_lo[j] = rs if psi_lo[j] is None else min(psi_lo[j], rs)
                psi_hi[j] = rs if psi_hi[j] is None else max(psi_hi[j], rs)
    return tuple(phi_lo), tuple(phi_hi), tuple(psi_lo), tuple(psi_hi)


def exponents(sys):
    """Exact liminf/limsup of P_j/q and partial sums for periodic tails; window estimates otherwise."""
    n = sys.n
    if sys.tail is not None:
        t = sys.tail
        if t.scale == 1:
            if not _gt(t.dv[0], 0):
                raise ValueError("P_1 is bounded: exponents undefined")
            pts = [(t.dq, t.dv)]
            return Exponents(*_ratio_profile(pts))
        b = len(sys.switches) - t.m
        lo, hi = sys.switch(b).q, sys.switch(b + t.m).q
        shift_q = t.dq / (t.scale - 1)
        shift_v = [d / (t.scale - 1) for d in t.dv]
        pts = []
        for q in sys.breakpoints(lo, hi):
            P = sys.evaluate(q)
            pts.append((q + shift_q, tuple(p + s for p, s in zip(P, shift_v))))
        if all(not _gt(V[0], 0) for _, V in pts):
            raise ValueError("P_1 is bounded: exponents undefined")
        return Exponents(*_ratio_profile(pts))
    if sys.horizon is None:
        raise ValueError("P_1 is bounded: a finite system ends with its top component rising forever")
    lo = max(sys.horizon / 2, sys.q0)
    pts = [(q, sys.evaluate(q)) for q in sys.breakpoints(lo, sys.horizon) if q > 0]
    return Exponents(*_ratio_profile(pts), finite_horizon=True)


def jarnik_residual(ex):
    """(1 - 2 phi_upper_1)(1 - 2 phi_lower_3) - phi_upper_1 phi_lower_3 for a 3-system."""
    x, z = ex.phi_upper[0], ex.phi_lower[-1]
    return (1 - 2 * x) * (1 - 2 * z) - x * z


# ---------------------------------------------------------------- extension of scalars

@dataclass(frozen=True)
class GeneralizedSystem:
    """R_{d(i-1)+j}(q) = P_i(q/d): nd components rising with slope 1/d."""

    base: NSystem
    d: int

    @property
    def n(self):
        return self.base.n * self.d

    @property
    def slope(self):
        return Fraction(1, self.d)

    @property
    def q0(self):
        return self.base.q0 * self.d

    @property
    def horizon(self):
        return None if self.base.horizon is None else self.base.horizon * self.d

    def evaluate(self, q):
        return tuple(x for x in self.base.evaluate(q / self.d) for _ in range(self.d))

    __call__ = evaluate

    def breakpoints(self, lo, hi):
        return [self.d * q for q in self.base.breakpoints(lo / self.d, hi / self.d)]

    @property
    def switches(self):
        return tuple(Switch(self.d * sw.q, tuple(x for x in sw.values for _ in range(self.d)), sw.k, sw.l)
                     for sw in self.base.switches)


def extend_scalars_system(sys, d):
    if d < 1:
        raise ValueError("d must be a positive integer")
    if d == 1:
        return sys
    return GeneralizedSystem(sys, d)


# ---------------------------------------------------------------- reconstruction from samples

def switches_from_samples(qs, values):
    """Rebuild switch data from exact samples taken on a grid containing every breakpoint."""
    n = len(values[0])
    rising = []
    for a, b, qa, qb in zip(values, values[1:], qs, qs[1:]):
        moved = [j for j in range(n) if b[j] != a[j]]
        if len(moved) != 1 or not _eq(b[moved[0]] - a[moved[0]], qb - qa, qb):
            raise ValueError(f"grid too coarse on [{qa}, {qb}]")
        rising.append((moved[0], a[moved[0]], b[moved[0]]))
    sws = []
    for t, (j, start, end) in enumerate(rising):
        vals = tuple(values[t])
        if t == 0:
            sws.append(Switch(qs[0], vals, rise_position(vals, start), None))
            continue
        prev_end = rising[t - 1][2]
        if _gt(prev_end, start):
            sws.append(Switch(qs[t], vals, rise_position(vals, start), arrival_position(vals, prev_end)))
    return sws


# ---------------------------------------------------------------- generators

def random_system(rng, n=3, moves=12, max_step=4, denominator=1, tiny=False):
    """A random finite n-system on [0, inf) built from random admissible moves (exact rationals)."""
    den = Fraction(1, denominator)
    vals = [Fraction(0)] * n
    q = Fraction(0)
    sws = [Switch(q, tuple(vals), n, None)]
    rising = Fraction(0)
    for step in range(moves):
        below = sorted({v for v in vals if v < rising})
        if step > 0 and below:
            u = rng.choice(below)
            sws.append(Switch(q, tuple(vals), rise_position(vals, u), arrival_position(vals, rising)))
            rising = u
        size = Fraction(rng.randint(1, max_step), 8) if tiny and rng.random() < 0.5 else den * rng.randint(1, max_step)
        vals = list(vals)
        vals[rise_position(vals, rising) - 1] = rising + size
        vals.sort()
        q = q + size
        rising = rising + size
    return NSystem(n, Fraction(0), tuple(sws))


def random_periodic_system(rng, n=3, max_value=6, scales=("3/2", "2", "5/2", "3"), max_moves=7,
                           node_limit=4000, attempts=500):
    """A random 3-system (or n-system) with a scaling tail q -> rho*q and P_1 unbounded."""
    for _ in range(attempts):
        rho = Fraction(rng.choice(scales))
        base = sorted(rng.randint(1, max_value) * rho.denominator for _ in range(n))
        distinct = sorted(set(base))
        if len(distinct) < 2:
            continue
        target = [rho * x for x in base]
        u0 = rng.choice(distinct[:-1])
        v0 = rng.choice([v for v in distinct if v > u0])
        top = max(target)
        found = []
        nodes = [0]

        def dfs(state, prev, moves):
            nodes[0] += 1
            if nodes[0] > node_limit or found:
                return
            if moves and state == target and prev == rho * v0:
                found.append(list(moves))
                return
            if len(moves) >= max_moves:
                return
            starts = sorted({x for x in state if x < prev})
            if not moves:
                starts = [u0]
            rng.shuffle(starts)
            for u in starts:
                ends = list(range(int(u) + 1, int(top) + 1))
                rng.shuffle(ends)
                for v in ends:
                    v = Fraction(v)
                    new = list(state)
                    new[rise_position(new, u) - 1] = v
                    new.sort()
                    if any(a > b for a, b in zip(new, target)):
                        continue
                    moves.append((u, v))
                    dfs(new, v, moves)
                    moves.pop()
                    if found:
                        return

        dfs([Fraction(x) for x in base], Fraction(v0), [])
        if not found:
            continue
        state = [Fraction(x) for x in base]
        q = sum(state)
        sws = []
        prev = Fraction(v0)
        for u, v in found[0]:
            sws.append(Switch(q, tuple(state), rise_position(state, u), arrival_position(state, prev)))
            state[rise_position(state, u) - 1] = v
            state.sort()
            q += v - u
            prev = v
        sys = NSystem(n, sws[0].q, tuple(sws), PeriodicTail(len(sws), Fraction(0), (Fraction(0),) * n, rho))
        if not validate(sys):
            return sys
    raise RuntimeError("could not generate a periodic system")


# ---------------------------------------------------------------- JSON

def system_to_json(sys):
    if isinstance(sys, DualSystem):
        return {"kind": "dual", "base": system_to_json(sys.base)}
    if isinstance(sys, GeneralizedSystem):
        return {"kind": "generalized", "d": sys.d, "base": system_to_json(sys.base)}
    out = {"n": sys.n, "q0": number_to_json(sys.q0), "switches": []}
    for sw in sys.switches:
        rec = {"q": number_to_json(sw.q), "values": [number_to_json(v) for v in sw.values], "k": sw.k}
        if sw.l is not None:
            rec["l"] = sw.l
        out["switches"].append(rec)
    if sys.tail is None:
        out["tail"] = {"kind": "finite"}
        if sys.horizon is not None:
            out["tail"]["horizon"] = number_to_json(sys.horizon)
    else:
        t = sys.tail
        out["tail"] = {"kind": "periodic", "m": t.m, "dq": number_to_json(t.dq),
                       "dv": [number_to_json(v) for v in t.dv]}
        if t.scale != 1:
            out["tail"]["scale"] = number_to_json(t.scale)
    if sys.mesh is not None:
        out["mesh"] = number_to_json(sys.mesh)
    return out


def system_from_json(obj):
    kind = obj.get("kind")
    if kind == "dual":
        return DualSystem(system_from_json(obj["base"]))
    if kind == "generalized":
        return GeneralizedSystem(system_from_json(obj["base"]), int(obj["d"]))
    n = int(obj["n"])
    sws = tuple(Switch(to_number(r["q"]), tuple(to_number(v) for v in r["values"]), int(r["k"]),
                       int(r["l"]) if r.get("l") is not None else None) for r in obj["switches"])
    tail_obj = obj.get("tail") or {"kind": "finite"}
    tail, horizon = None, None
    if tail_obj.get("kind", "finite") == "periodic":
        tail = PeriodicTail(int(tail_obj["m"]), to_number(tail_obj["dq"]),
                            tuple(to_number(v) for v in tail_obj["dv"]),
                            to_number(tail_obj.get("scale", 1)))
    elif tail_obj.get("horizon") is not None:
        horizon = to_number(tail_obj["horizon"])
    mesh = to_number(obj["mesh"]) if obj.get("mesh") is not None else None
    q0 = to_number(obj.get("q0", sws[0].q if sws else 0))
    return NSystem(n, q0, sws, tail, horizon, mesh)


def doubling_system():
    """The 2-system with switches 3, 6, 12, ... and values (1,2), (2,4), (4,8), ..."""
    F = Fraction
    return NSystem(2, F(3), (Switch(F(3), (F(1), F(2)), 1, 2),), PeriodicTail(1, F(0), (F(0), F(0)), F(2)))

"""From a rigid n-system to a point: recursive unimodular bases over Z and their limit direction.

Everything is over K = Q with w = infinity and S = {infinity}, so units are
+-1 and the integer approximation step is nearest-integer rounding.  A rigid
system is given in mesh units (its switch values are integer multiples of its
mesh chi); the physical system is that system scaled by log C / chi.

Chain vectors are exact integer vectors and all Gram-Schmidt data is exact
rational, so determinant, size, type and almost-orthogonality checks are
exact.  Only the real number B of the step (and the point xi derived from the
chain) needs floating point, handled with mpmath.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import mpmath

from .contracts import ContractViolation, Violation
from .exterior import dist_point_subspace_sq, dist_sq, hodge, is_almost_orthogonal, rank, wedge_all
from .nsystem import to_number


@dataclass(frozen=True)
class ConstructionConstants:
    n: int
    C: int = None
    heuristic: bool = False
    places: tuple = ("inf",)
    c2: int = 1
    c3: int = 1
    delta: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("the construction needs n >= 2")
        if tuple(self.places) != ("inf",):
            raise NotImplementedError("S = {inf, p} is disabled: no valid c3 is available for a finite place")
        if self.C is None:
            object.__setattr__(self, "C", default_C(self.n))
        if not self.heuristic and self.C < self.C_min:
            raise ValueError(f"C={self.C} is below the admissible bound {self.C_min:.1f}; use heuristic=True "
                             "for small-C experiments")

    @property
    def c4(self):
        return self.n * 2 ** self.n * (2 * math.e * self.c2) ** 2

    @property
    def c5(self):
        return (2 * math.e * self.c2) ** 2

    @property
    def c6(self):
        return 6 + math.log(self.c5)

    @property
    def C_min(self):
        return self.n * 2 ** (self.n + 1) * self.c3 * self.c4

    @property
    def mesh(self):
        return math.log(self.C)

    @property
    def minkowski_slack(self):
        """kappa with sum_j L_j(q) >= q - kappa, from lambda_1...lambda_n vol >= 2^n/n! and vol <= 2 e^-q omega_{n-1}."""
        n = self.n
        ball = math.pi ** ((n - 1) / 2) / math.gamma((n + 1) / 2)
        return max(0.0, math.log(math.factorial(n) * 2 * ball / 2 ** n))

    @property
    def c7(self):
        return self.c6 + self.n * (self.c6 + self.minkowski_slack)


def default_C(n):
    """Smallest multiple of 50 meeting the admissibility bound."""
    bound = n * 2 ** (n + 1) * n * 2 ** n * (2 * math.e) ** 2
    return int(math.ceil(bound / 50) * 50)


# ---------------------------------------------------------------- schedule

@dataclass(frozen=True)
class ScheduleEntry:
    q: object          # switch abscissa in mesh units
    a: tuple           # R(q)/chi, integers
    k: int
    l: int


def rigidity_start(n):
    return n * n - n + 1


def derive_schedule(R, count, chi=None):
    """First `count` switch data (q_i, a^(i), k_i, l_i) of a rigid system from its rigidity start on."""
    n = R.n
    chi = to_number(chi if chi is not None else (R.mesh if R.mesh is not None else 1))
    q0 = rigidity_start(n) * chi
    entries = []

    def units(vals, where):
        out = []
        for v in vals:
            r = to_number(v) / chi
            r = Fraction(r) if not isinstance(r, float) else r
            if isinstance(r, float):
                if abs(r - round(r)) > 1e-9:
                    raise ContractViolation([Violation("rigid", where, f"value {v} is not a multiple of the mesh")],
                                            "schedule")
                r = round(r)
            elif r.denominator != 1:
                raise ContractViolation([Violation("rigid", where, f"value {v} is not a multiple of the mesh")],
                                        "schedule")
            out.append(int(r))
        return tuple(out)

    a0 = units(R.evaluate(q0), q0)
    k0 = R.rising_position(q0)
    if k0 != 1:
        raise ContractViolation([Violation("P1", 0, "R_1 must rise right after the rigidity start")], "schedule")
    entries.append(ScheduleEntry(q0, a0, 1, n))
    i = R.segment_index(q0) + 1
    while len(entries) < count and R.has_switch(i):
        sw = R.switch(i)
        i += 1
        if sw.q <= q0:
            continue
        if R.horizon is not None and R.tail is None and sw.q > R.horizon:
            break
        entries.append(ScheduleEntry(sw.q, units(sw.values, sw.q), sw.k, sw.l))
    V = schedule_violations(entries, chi)
    if V:
        raise ContractViolation(V, "schedule")
    return entries


def schedule_violations(entries, chi=1):
    V = []
    n = len(entries[0].a)
    for i, e in enumerate(entries):
        if list(e.a) != sorted(e.a) or e.a[0] < 0:
            V.append(Violation("Delta", i, "sizes must be nondecreasing and nonnegative"))
        if e.q != chi * sum(e.a):
            V.append(Violation("sum", i, "q_i differs from the mesh times the size sum"))
        if not (1 <= e.k < e.l <= n):
            V.append(Violation("P1", i, f"need 1 <= k < l <= n, got k={e.k}, l={e.l}"))
        if i == 0:
            if e.k != 1 or e.l != n:
                V.append(Violation("P1", 0, "k_0 = 1 and l_0 = n"))
            if any(x >= y for x, y in zip(e.a, e.a[1:])):
                V.append(Violation("Delta", 0, "initial sizes must be strictly increasing"))
            continue
        p = entries[i - 1]
        if e.l < p.k or e.a[e.l - 1] <= p.a[e.l - 1]:
            V.append(Violation("P2", i, "l_i >= k_(i-1) and a_l^(i) > a_l^(i-1)"))
        if _drop(e.a, e.l) != _drop(p.a, p.k):
            V.append(Violation("P3", i, "deleted coordinates disagree"))
    return V


def _drop(seq, pos):
    return tuple(seq[:pos - 1]) + tuple(seq[pos:])


# ---------------------------------------------------------------- exact linear algebra

def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def _solve(G, rhs):
    """Gauss-Jordan over Q."""
    m = len(G)
    A = [[Fraction(x) for x in row] + [Fraction(r)] for row, r in zip(G, rhs)]
    for c in range(m):
        p = next(r for r in range(c, m) if A[r][c] != 0)
        A[c], A[p] = A[p], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for r in range(m):
            if r != c and A[r][c]:
                f = A[r][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[r][m] for r in range(m)]


def _coordinates(vectors, target):
    """Coefficients of the orthogonal projection of target onto span(vectors)."""
    if not vectors:
        return []
    G = [[_dot(u, v) for v in vectors] for u in vectors]
    return _solve(G, [_dot(u, target) for u in vectors])


def _orth_component(x, basis):
    coeffs = _coordinates(basis, x)
    return [Fraction(c) - sum(a * b[i] for a, b in zip(coeffs, basis)) for i, c in enumerate(x)]


def _sign_normalize(v):
    for c in v:
        if c:
            return list(v) if c > 0 else [-x for x in v]
    return list(v)


def determinant(basis):
    return wedge_all([tuple(x) for x in basis]).coords[0]


def perpendicular(vectors):
    """Primitive integer vector orthogonal to n-1 independent integer vectors (first nonzero entry positive)."""
    u = list(hodge(wedge_all([tuple(x) for x in vectors])).coords)
    g = 0
    for c in u:
        g = math.gcd(g, int(c))
    return tuple(_sign_normalize([int(c) // g for c in u]))


# ---------------------------------------------------------------- one step

@dataclass
class StepRecord:
    basis: tuple
    size: tuple
    k: int
    l: int
    h: int
    eps: int
    alphas: tuple
    precision: int
    residual_ratio: float


def _size_ok(x, a, C):
    s = _dot(x, x)
    return C ** (2 * a) <= s <= 4 * C ** (2 * a)


def step(x, h, k, l, a, b, consts, precision=256, eps=1):
    """New basis of size b and type (k, l) from x of size a, replacing x_h by a vector at position l.

    Returns (basis, record, violations).  Hypothesis failures raise; numerical
    failures retry at doubled precision and then raise, unless the constants
    are heuristic, in which case they are returned as violations.
    """
    n = consts.n
    x = [tuple(int(c) for c in v) for v in x]
    if not (1 <= k < l <= n and 1 <= h <= l):
        raise ValueError(f"bad indices h={h}, k={k}, l={l}")
    if not (b[l - 1] > a[l - 1] and _drop(b, l) == _drop(a, h)):
        raise ContractViolation([Violation("step-hypothesis", (h, k, l), "b_l > a_l and matching deletions")], "step")
    kept = [v for j, v in enumerate(x) if j != h - 1]
    V_basis = kept[:l - 1]                                   # y_1..y_{l-1}
    W_basis = [v for j, v in enumerate(V_basis) if j != k - 1]
    vprime = _sign_normalize(_orth_component(V_basis[k - 1], W_basis))
    nv2 = _dot(vprime, vprime)
    target = [eps * c for c in x[h - 1]]
    exact_part = _coordinates(V_basis, target)
    v_part = _coordinates(V_basis, vprime)
    C, bl = consts.C, b[l - 1]
    prec = max(precision, 128 + 2 * int(bl * math.log2(C)) + 64)
    violations = []
    for attempt in range(4):
        with mpmath.workprec(prec):
            B = (1 + mpmath.mpf(consts.delta) / 2) * mpmath.mpf(C) ** bl
            beta = B / mpmath.sqrt(mpmath.mpf(nv2.numerator) / nv2.denominator)
            alphas = [int(mpmath.nint(mpmath.mpf(e.numerator) / e.denominator
                                      - beta * mpmath.mpf(f.numerator) / f.denominator))
                      for e, f in zip(exact_part, v_part)]
            new = [t - sum(al * y[i] for al, y in zip(alphas, V_basis)) for i, t in enumerate(target)]
            resid = mpmath.sqrt(mpmath.fsum((c - beta * mpmath.mpf(vc.numerator) / vc.denominator) ** 2
                                            for c, vc in zip(new, vprime)))
            bound = mpmath.mpf(C) ** bl / 2 ** n
            ratio = float(resid / bound)
        if ratio <= 1 or consts.heuristic:
            break
        prec *= 2
    if ratio > 1:
        v = Violation("residual", (h, k, l), f"||y_l - B v|| / (2^-n C^b_l) = {ratio:.3g}")
        if not consts.heuristic:
            raise ContractViolation([v], "step")
        violations.append(v)
    y = kept[:l - 1] + [tuple(new)] + kept[l - 1:]
    violations += basis_violations(y, b, k, l, consts)
    if violations and not consts.heuristic:
        raise ContractViolation(violations, "step")
    rec = StepRecord(tuple(y), tuple(b), k, l, h, eps, tuple(alphas), prec, ratio)
    return y, rec, violations


def basis_violations(y, b, k, l, consts):
    V = []
    n, C = consts.n, consts.C
    if abs(determinant(y)) != 1:
        V.append(Violation("unimodular", None, f"det = {determinant(y)}"))
    for j in range(n):
        if not _size_ok(y[j], b[j], C):
            V.append(Violation("size", j + 1, f"||y_j||^2 outside [C^2b, 4C^2b] for b={b[j]}"))
    W = [v for j, v in enumerate(y[:l - 1]) if j != k - 1]
    if W:
        bound = 1 - Fraction(1, 2 ** (l - 1))
        if dist_point_subspace_sq(y[l - 1], W) < bound * bound:
            V.append(Violation("type", (k, l), "dist(y_l, W) < 1 - 2^(1-l)"))
    return V


def initial_basis(a, consts, precision=256):
    """Unimodular basis of size a and type (1, n) whose first n-1 vectors are almost orthogonal."""
    n = consts.n
    a = tuple(int(t) for t in a)
    if len(a) != n or a[0] <= 0 or any(x >= y for x, y in zip(a, a[1:])):
        raise ValueError("initial sizes must be strictly increasing positive integers")
    x = [tuple(int(i == j) for i in range(n)) for j in range(n)]
    size = (0,) * n
    violations = []
    for j in range(n):
        b = size[1:] + (a[j],)
        x, _, bad = step(x, 1, 1, n, size, b, consts, precision)
        violations += bad
        size = b
    if not is_almost_orthogonal(x[:n - 1]) and n > 2:
        v = Violation("almost-orthogonal", "initial", "x_1..x_{n-1} not almost orthogonal")
        if not consts.heuristic:
            raise ContractViolation([v], "initial basis")
        violations.append(v)
    return x, violations


# ---------------------------------------------------------------- chains and points

@dataclass
class BasisChain:
    constants: ConstructionConstants
    schedule: list
    bases: list
    records: list
    violations: list = field(default_factory=list)
    precision: int = 256

    def q_phys(self, i):
        return self.constants.mesh * sum(self.schedule[i].a)

    def hat(self, i):
        """Basis i without position k_i; i = -1 gives the first n-1 vectors of basis 0."""
        if i == -1:
            return self.bases[0][:-1]
        k = self.schedule[i].k
        return [v for j, v in enumerate(self.bases[i]) if j != k - 1]

    @cached_property
    def directions(self):
        return {i: perpendicular(self.hat(i)) for i in range(-1, len(self.bases))}


def build_chain(schedule, consts, precision=256):
    x, bad = initial_basis(schedule[0].a, consts, precision)
    bases, records, violations = [x], [], list(bad)
    for i in range(1, len(schedule)):
        p, e = schedule[i - 1], schedule[i]
        x, rec, bad = step(x, p.k, e.k, e.l, p.a, e.a, consts, precision)
        bases.append(x)
        records.append(rec)
        violations += [Violation(v.condition, (i, v.location), v.detail) for v in bad]
    chain = BasisChain(consts, list(schedule), bases, records, violations, precision)
    V = chain_violations(chain)
    if V and not consts.heuristic:
        raise ContractViolation(V, "chain")
    chain.violations += V
    return chain


def chain_violations(chain):
    """Almost orthogonality of every hat sequence and the convergence bound on the directions."""
    V = []
    s = len(chain.bases)
    for i in range(-1, s):
        seq = chain.hat(i)
        if len(seq) > 1 and not is_almost_orthogonal(seq):
            V.append(Violation("almost-orthogonal", i, "hat sequence"))
    dirs = chain.directions
    with mpmath.workprec(chain.precision):
        for i in range(-1, s - 1):
            bound = 2 * mpmath.exp(4 - mpmath.mpf(chain.q_phys(i + 1)))
            for j in range(i + 1, s):
                d2 = dist_sq(dirs[i], dirs[j])
                if mpmath.sqrt(mpmath.mpf(d2.numerator) / d2.denominator) > bound:
                    V.append(Violation("convergence", (i, j), "dist(u_i, u_j) > 2 exp(4 - q_(i+1))"))
    return V


@dataclass
class Synthesis:
    chain: BasisChain
    direction: tuple          # primitive integer vector along xi
    error_radius: object      # bound on the distance to the limit of the infinite chain (None if unknown)
    scale: object             # physical q per mesh unit of the input system
    system: object            # the rigid input system (mesh units)

    @property
    def xi(self):
        with mpmath.workprec(self.chain.precision):
            nrm = mpmath.sqrt(sum(mpmath.mpf(c) ** 2 for c in self.direction))
            return tuple(mpmath.mpf(c) / nrm for c in self.direction)

    def xi_strings(self, digits=40):
        return [mpmath.nstr(c, digits) for c in self.xi]

    def R_phys(self, q):
        return tuple(self.scale * float(v) for v in self.system.evaluate(to_number(q / self.scale)
                                                                           if isinstance(q, Fraction)
                                                                           else q / self.scale))

    @property
    def q_last(self):
        return self.chain.q_phys(len(self.chain.bases) - 1)


def synthesize_point(R, steps, consts=None, precision=256, chi=None):
    """Chain of `steps` steps after the initial basis; xi is the last direction u_(steps)."""
    consts = consts or ConstructionConstants(R.n)
    chi = to_number(chi if chi is not None else (R.mesh if R.mesh is not None else 1))
    schedule = derive_schedule(R, steps + 2, chi)
    if len(schedule) < steps + 1:
        raise ValueError(f"the system only provides {len(schedule) - 1} switches after its rigidity start")
    chain = build_chain(schedule[:steps + 1], consts, precision)
    radius = None
    if len(schedule) > steps + 1:
        with mpmath.workprec(precision):
            radius = 2 * mpmath.exp(4 - consts.mesh * sum(schedule[steps + 1].a))
    scale = consts.mesh / float(chi)
    return Synthesis(chain, chain.directions[steps], radius, scale, R)


# ---------------------------------------------------------------- verification

def chain_L(x, q, direction, prec=256):
    """L_xi(x, q) for a primitive integer x and xi along an integer direction."""
    with mpmath.workprec(prec):
        nx = mpmath.log(mpmath.mpf(_dot(x, x))) / 2
        dot = abs(_dot(x, direction))
        if dot == 0:
            return nx
        logd = mpmath.log(dot) - mpmath.log(mpmath.mpf(_dot(direction, direction))) / 2
        return max(nx, mpmath.mpf(q) + logd)


def verify(syn, q_max=None, mode="certificate", step=0.25, budget=None):
    """Compare L_xi with the physical system on a grid of [0, q_max]."""
    chain, consts = syn.chain, syn.chain.constants
    n = consts.n
    s = len(chain.bases)
    q_last = chain.q_phys(s - 1)
    if q_max is None:
        q_max = 0.8 * q_last
    if q_max > 0.8 * q_last + 1e-9:
        raise ValueError("q_max must not exceed 0.8 times the last switch of the chain")
    grid = [i * step for i in range(int(q_max / step) + 1)]
    q_first = chain.q_phys(0)
    if mode == "certificate":
        return _certificate(syn, grid, q_first, q_last)
    if mode == "enumeration":
        return _enumeration(syn, grid, budget)
    raise ValueError(f"unknown mode {mode!r}")


def _certificate(syn, grid, q_first, q_last):
    chain, consts = syn.chain, syn.chain.constants
    n = consts.n
    c6, kappa = consts.c6, consts.minkowski_slack
    qs = [chain.q_phys(i) for i in range(len(chain.bases))]
    worst = 0.0
    upper_excess = -math.inf
    failures = []
    rows = []
    for q in grid:
        R = syn.R_phys(q)
        if q < q_first:
            continue
        i = max(j for j, t in enumerate(qs) if t <= q + 1e-12)
        r = sorted(float(chain_L(x, q, syn.direction, chain.precision)) for x in chain.bases[i])
        lower = [q - kappa - (sum(r) - r[j]) for j in range(n)]
        for j in range(n):
            upper_excess = max(upper_excess, r[j] - R[j])
            if r[j] > R[j] + c6 + 1e-9:
                failures.append(Violation("upper", q, f"L(x_{j + 1}) = {r[j]:.6g} > R_j + c6"))
        dev = max(max(r[j] - R[j], R[j] - lower[j]) for j in range(n))
        worst = max(worst, dev)
        rows.append((q, r, lower, R))
    return {
        "mode": "certificate",
        "steps": len(chain.bases) - 1,
        "q_first": q_first,
        "q_last": q_last,
        "grid_max": grid[-1] if grid else 0,
        "c6": c6,
        "minkowski_slack": kappa,
        "c7_bound": consts.c7,
        "c7_empirical": worst,
        "upper_excess": upper_excess,
        "prefix_bound": q_first,
        "ok": not failures and worst <= consts.c7 + 1e-9,
        "violations": [v.as_dict() for v in failures],
        "rows": rows,
    }


def _enumeration(syn, grid, budget=None):
    from .minima import _required_prec, profile
    from .numberfield import FieldContext, infinite_places, make_target
    K = FieldContext.rational()
    prec = max(syn.chain.precision, _required_prec(grid[-1]) + 64)
    with mpmath.workprec(prec):
        xi = [mpmath.mpf(c) for c in syn.direction]
    target = make_target(K, infinite_places(K)[0], xi, prec, "construct")
    qs = [Fraction(q).limit_denominator(10 ** 6) for q in grid]
    prof = profile(target, qs, budget=budget)
    worst = 0.0
    for q, vals in zip(grid, prof.values):
        R = syn.R_phys(q)
        worst = max(worst, max(abs(float(v) - r) for v, r in zip(vals, R)))
    return {"mode": "enumeration", "steps": len(syn.chain.bases) - 1, "grid_max": grid[-1], "sup": worst,
            "exact": prof.exact, "profile": prof}

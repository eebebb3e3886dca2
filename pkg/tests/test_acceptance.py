"""Acceptance criteria 1-11, each at its stated tolerance and time budget."""

import json
import math
import os
import random
import time
from fractions import Fraction

import mpmath

from acceptance_log import record
from oracles import brute_force_minima
from parageo.construct import ConstructionConstants, chain_violations, synthesize_point, verify
from parageo.exterior import dist_subspaces_sq, hodge, norm_sq, orthogonal_complement, rank, wedge_all
from parageo.extension import (ScalarExtension, bel_values, exponent_transfer, jarnik_extended_residual,
                               thunder_stability, verify_bounded_differences)
from parageo.minima import duality_sum_check, profile, q_grid, sum_rule_sup
from parageo.nsystem import (NSystem, Switch, check_rigidify, doubling_system, dual, exponents, jarnik_residual,
                             random_periodic_system, random_system, rigidify, template_system, validate)
from parageo.numberfield import (FieldContext, finite_place, height_power, height_power_all_places, height_subspace,
                                 height_subspace_power, infinite_places, make_target, parse_padic,
                                 product_formula_residual)

F = Fraction
Q = FieldContext.rational()
K2 = FieldContext.quadratic(2)
QINF = infinite_places(Q)[0]
DATA = os.path.join(os.path.dirname(__file__), "data", "oracle_minima.json")

GOLDEN = ["1", "1.6180339887498948482045868343656381177203"]
CUBIC = ["1", "1.2599210498948731647672106072782283505703", "1.5874010519681994747517056392723082091387"]
E1 = ["1", "0"]
# sup over q <= 12 of |L*_j + L_k - q| for the golden target, from the brute-force oracle
GOLDEN_DUAL_SUP = 0.32350713113968155


def _rat(rng, lo=-6, hi=6, den=4):
    return F(rng.randint(lo, hi), rng.randint(1, den))


def _gram_schmidt(vs):
    out = []
    for v in vs:
        w = list(v)
        for u in out:
            c = sum(a * b for a, b in zip(w, u)) / sum(a * a for a in u)
            w = [a - c * b for a, b in zip(w, u)]
        out.append(tuple(w))
    return out


def _pairwise_orthogonal(vs):
    return all(sum(a * b for a, b in zip(vs[i], vs[j])) == 0 for i in range(len(vs)) for j in range(i + 1, len(vs)))


# ---------------------------------------------------------------- 1

def test_criterion_01_exterior():
    start = time.time()
    rng = random.Random(1)
    hadamard_bad = hodge_bad = 0
    for i in range(1000):
        n = rng.randint(2, 6)
        k = rng.randint(2, n)
        vs = [tuple(_rat(rng) for _ in range(n)) for _ in range(k)]
        if rank(vs) < k:
            continue
        if i % 2:
            vs = _gram_schmidt(vs)
        top = wedge_all(vs)
        lhs = norm_sq(top)
        rhs = math.prod(norm_sq(v) for v in vs)
        if lhs > rhs or (lhs == rhs) != _pairwise_orthogonal(vs):
            hadamard_bad += 1
        if norm_sq(hodge(top)) != lhs:
            hodge_bad += 1
    dual_bad = 0
    for _ in range(200):
        n = rng.randint(3, 5)
        k = rng.randint(1, n - 1)
        B1 = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(k)]
        B2 = [[rng.randint(-4, 4) for _ in range(n)] for _ in range(k)]
        if rank(B1) < k or rank(B2) < k:
            continue
        if dist_subspaces_sq(B1, B2) != dist_subspaces_sq(orthogonal_complement(B1), orthogonal_complement(B2)):
            dual_bad += 1
    elapsed = time.time() - start
    ok = hadamard_bad == hodge_bad == dual_bad == 0 and elapsed < 10
    record(1, ok, f"hadamard/hodge/dist-duality failures {hadamard_bad}/{hodge_bad}/{dual_bad}, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_02_number_field():
    start = time.time()
    rng = random.Random(2)
    pf_bad = 0
    for _ in range(500):
        a, b = _rat(rng, -50, 50, 30), _rat(rng, -50, 50, 30)
        if a == 0 and b == 0:
            continue
        if product_formula_residual(K2.from_basis(a, b), K2) != 1:
            pf_bad += 1
    dual_q_bad, worst_rel = 0, 0.0
    for _ in range(100):
        k = rng.randint(1, 3)
        B = [[rng.randint(-5, 5) for _ in range(4)] for _ in range(k)]
        if rank(B) < k:
            continue
        if height_subspace_power(B, Q) != height_subspace_power(orthogonal_complement(B), Q):
            dual_q_bad += 1
    with mpmath.workprec(128):
        for _ in range(100):
            k = rng.randint(1, 2)
            B = [[K2.from_basis(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(3)] for _ in range(k)]
            if rank(B) < k:
                continue
            h1 = height_subspace(B, K2)
            h2 = height_subspace(orthogonal_complement(B), K2)
            worst_rel = max(worst_rel, float(abs(h1 - h2) / h1))
    two_path_bad = 0
    for _ in range(200):
        x = [K2.from_basis(rng.randint(-12, 12), rng.randint(-12, 12)) for _ in range(rng.randint(2, 4))]
        if all(c == 0 for c in x):
            continue
        if height_power(x, K2) != height_power_all_places(x, K2):
            two_path_bad += 1
    elapsed = time.time() - start
    ok = pf_bad == dual_q_bad == two_path_bad == 0 and worst_rel <= 1e-10 and elapsed < 30
    record(2, ok, f"product formula {pf_bad}, H(V)=H(Vperp) Q^4 {dual_q_bad} / K^3 rel {worst_rel:.1e}, "
                  f"two-path {two_path_bad}, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_03_n_systems():
    start = time.time()
    accepts = validate(template_system(6)) == [] and validate(doubling_system()) == []
    T = template_system(3)
    s1 = list(T.switches)
    s1[2] = Switch(s1[2].q, (F(0), F(1), F(3)), s1[2].k, s1[2].l)
    s2 = list(T.switches)
    s2[1] = Switch(s2[1].q, s2[1].values, 3, s2[1].l)
    s3 = NSystem(2, F(0), (Switch(F(0), (F(0), F(0)), 2, None), Switch(F(1), (F(0), F(1)), 2, 2)), horizon=F(4))
    rejects = all(cond in {v.condition for v in validate(S)}
                  for cond, S in (("S1", NSystem(3, F(0), tuple(s1), T.tail, mesh=T.mesh)),
                                  ("S2", NSystem(3, F(0), tuple(s2), T.tail, mesh=T.mesh)), ("S3", s3)))
    rng = random.Random(3)
    involutive = self_dual = True
    for _ in range(50):
        S = random_system(rng, 3, moves=10)
        involutive &= dual(dual(S)) is S
        D = dual(S)
        for q in S.breakpoints(S.q0, S.switches[-1].q + 2):
            involutive &= D.evaluate(q) == tuple(q - x for x in reversed(S.evaluate(q)))
        S2 = random_system(rng, 2, moves=10)
        end = S2.switches[-1].q + 4
        self_dual &= all(dual(S2).evaluate(F(i, 16)) == S2.evaluate(F(i, 16)) for i in range(int(end * 16) + 1))
    rigid_bad = 0
    for _ in range(50):
        L = random_system(rng, 3, moves=12)
        if check_rigidify(L, rigidify(L, c=1), 1):
            rigid_bad += 1
    elapsed = time.time() - start
    ok = accepts and rejects and involutive and self_dual and rigid_bad == 0 and elapsed < 20
    record(3, ok, f"validator {accepts and rejects}, dual involutive {involutive}, 2-systems self-dual {self_dual}, "
                  f"rigidify failures {rigid_bad}/50, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_04_jarnik():
    start = time.time()
    rng = random.Random(4)
    residuals = []
    for _ in range(100):
        S = random_periodic_system(rng, 3)
        residuals.append(jarnik_residual(exponents(S)))
    elapsed = time.time() - start
    ok = all(isinstance(r, Fraction) and r == 0 for r in residuals) and elapsed < 10
    record(4, ok, f"{sum(r == 0 for r in residuals)}/100 exact zeros, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 5 and 7

def _equal_profiles(a, b, tol):
    return max(abs(x - y) for u, v in zip(a.values, b.values) for x, y in zip(u, v)) <= tol


def test_criterion_05_oracle_equivalence():
    start = time.time()
    with open(DATA) as fh:
        frozen = json.load(fh)
    worst = 0.0
    for name, xi, qmax in (("e1", E1, 12), ("golden", GOLDEN, 12), ("cubic", CUBIC, 8)):
        qs = q_grid(qmax)
        prof = profile(make_target(Q, QINF, xi, 256, name), qs)
        assert prof.exact
        for q, vals in zip(qs, prof.values):
            live = brute_force_minima(xi, q)
            stored = [float(v) for v in frozen[name][str(q)]]
            worst = max(worst, max(abs(float(a) - b) for a, b in zip(vals, live)),
                        max(abs(float(a) - b) for a, b in zip(vals, stored)))
    elapsed = time.time() - start
    ok = worst <= 1e-9 and elapsed < 300
    record(5, ok, f"max |engine - brute force| = {worst:.1e} over e1, golden (q<=12), cubic (q<=8), {elapsed:.1f}s")
    assert ok


def test_criterion_07_grade_duality():
    targets = [make_target(Q, QINF, CUBIC, 256, "cubic"),
               make_target(Q, QINF, ["1", "2^(1/5)", "3^(1/5)", "5^(1/5)"], 256, "quartic"),
               make_target(K2, infinite_places(K2)[0], ["1", "2^(1/4)", "3^(1/2)"], 256, "K-cubic")]
    worst = 0.0
    for t in targets:
        qs = q_grid(6, F(1, 2))
        a = profile(t, qs, k=t.n - 1, kind="compound")
        b = profile(t, qs, kind="Lstar")
        worst = max(worst, max(float(abs(x - y)) for u, v in zip(a.values, b.values) for x, y in zip(u, v)))
    # n = 2: grade n - 1 is the vector grade, so the L profile must equal the L* profile
    two = [make_target(Q, QINF, GOLDEN, 256, "golden"), make_target(Q, QINF, E1, 256, "e1"),
           make_target(Q, finite_place(Q, 7), [parse_padic("1", 7, 64), parse_padic("sqrt(2)", 7, 64)], 64),
           make_target(K2, infinite_places(K2)[0], ["1", "2^(1/4)"], 256)]
    for t in two:
        qs = q_grid(6, F(1, 2))
        a, b = profile(t, qs), profile(t, qs, kind="Lstar")
        worst = max(worst, max(float(abs(x - y)) for u, v in zip(a.values, b.values) for x, y in zip(u, v)))
    ok = worst <= 1e-25
    record(7, ok, f"max |L^(n-1) - L*| = {worst:.1e} over {len(targets) + len(two)} targets")
    assert ok


# ---------------------------------------------------------------- 6

def _sup_between(prof, lo, hi, fn):
    return max(fn(q, v) for q, v in zip(prof.q_grid, prof.values) if lo <= q <= hi)


def test_criterion_06_structure():
    start = time.time()
    ordered = True
    growth = []
    golden_sup = None
    for name, xi in (("golden", GOLDEN), ("cubic", CUBIC), ("e1", E1)):
        t = make_target(Q, QINF, xi, 256, name)
        qs = q_grid(12)
        pL, pS = profile(t, qs), profile(t, qs, kind="Lstar")
        for q, v in zip(qs, pL.values):
            ordered &= 0 <= v[0] and all(a <= b for a, b in zip(v, v[1:])) and v[-1] <= float(q) + 1e-20
        n = t.n

        def sums(q, v):
            return float(abs(mpmath.fsum(v) - mpmath.mpf(q.numerator) / q.denominator))

        short, long = _sup_between(pL, 0, 6, sums), _sup_between(pL, 0, 12, sums)
        dual_short = duality_sum_check(_head(pL, 6), _head(pS, 6))
        dual_long = duality_sum_check(pL, pS)
        growth.append((name, short, long, float(dual_short), float(dual_long)))
        if name == "golden":
            golden_sup = float(dual_long)
            assert abs(float(sum_rule_sup(pL)) - long) < 1e-12
    no_growth = all(lg <= sh + 0.5 and dl <= ds + 0.5 for _, sh, lg, ds, dl in growth)
    elapsed = time.time() - start
    ok = ordered and no_growth and golden_sup <= GOLDEN_DUAL_SUP + 1e-9 and elapsed < 120
    detail = ", ".join(f"{n}: sum {sh:.3f}->{lg:.3f}, dual {ds:.3f}->{dl:.3f}" for n, sh, lg, ds, dl in growth)
    record(6, ok, f"ordered {ordered}; {detail}; golden sup {golden_sup:.6f} <= {GOLDEN_DUAL_SUP:.6f}, {elapsed:.1f}s")
    assert ok


def _head(prof, qmax):
    from dataclasses import replace
    keep = [i for i, q in enumerate(prof.q_grid) if q <= qmax]
    return replace(prof, q_grid=[prof.q_grid[i] for i in keep], values=[prof.values[i] for i in keep],
                   witnesses=[prof.witnesses[i] for i in keep], exact_per_q=[prof.exact_per_q[i] for i in keep])


# ---------------------------------------------------------------- 8

def test_criterion_08_construction():
    start = time.time()
    R = rigidify(random_system(random.Random(3), 3, moves=30, max_step=4), c=2, horizon=200)
    consts = ConstructionConstants(3, C=34050)
    syn10 = synthesize_point(R, 10, consts, precision=256)
    invariants = not syn10.chain.violations and not chain_violations(syn10.chain)
    rep10 = verify(syn10, mode="certificate")
    rep12 = verify(synthesize_point(R, 12, consts, precision=256), mode="certificate")
    c7_10, c7_12 = rep10["c7_empirical"], rep12["c7_empirical"]
    heur = synthesize_point(R, 8, ConstructionConstants(3, C=3, heuristic=True))
    rep_h = verify(heur, q_max=12, mode="enumeration")
    elapsed = time.time() - start
    ok = (invariants and rep10["ok"] and c7_10 <= rep10["c7_bound"] and c7_12 <= c7_10 + 1e-9
          and rep_h["exact"] and rep_h["sup"] <= 3.0 and elapsed < 120)
    record(8, ok, f"chain invariants {invariants}, c7 {c7_10:.4f} (10 steps) -> {c7_12:.4f} (12 steps) "
                  f"<= bound {rep10['c7_bound']:.2f} on q <= {rep10['grid_max']}, heuristic C=3 sup "
                  f"{rep_h['sup']:.4f} <= 3.0, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_09_bounded_differences():
    start = time.time()
    ext = ScalarExtension(K2, (K2.element(1), K2.parse_element("sqrt(2)")))
    t = make_target(K2, infinite_places(K2)[0], ["1", "2^(1/4)"], 256)
    rep = verify_bounded_differences(t, ext, q_grid(8))
    first = [float(x) for x in rep.first_half]
    second = [float(x) for x in rep.second_half]
    stable = all(b <= a + 0.5 for a, b in zip(first, second))
    control = verify_bounded_differences(make_target(Q, QINF, ["1", "2^(1/4)"], 256), ScalarExtension(Q), q_grid(8))
    elapsed = time.time() - start
    ok = (math.isfinite(float(rep.sup_L)) and math.isfinite(float(rep.sup_Lstar)) and stable and rep.stable
          and control.sup_L == 0 and control.sup_Lstar == 0 and elapsed < 600)
    record(9, ok, f"sups L {float(rep.sup_L):.4f}, L* {float(rep.sup_Lstar):.4f}; [0,4] {first} vs [4,8] {second}; "
                  f"d=1 control {float(control.sup_L)}, {float(control.sup_Lstar)}, {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 10

def test_criterion_10_exponent_transfer():
    start = time.time()
    exact = (exponent_transfer({"omega_hat": 1}, 2)["omega_hat"] == 3
             and exponent_transfer({"lam_hat": 1}, 2)["lam_hat"] == F(1, 3)
             and jarnik_extended_residual(*[exponent_transfer({"omega_hat": 2, "lam_hat": F(1, 2)}, 2)[k]
                                            for k in ("omega_hat", "lam_hat")], 2) == 0)
    worst = 0.0
    for d in (1, 2, 3):
        lam, om = bel_values(d, 128)
        with mpmath.workprec(128):
            worst = max(worst, float(abs(jarnik_extended_residual(om, lam, d))))
    elapsed = time.time() - start
    ok = exact and worst <= 1e-12 and elapsed < 1
    record(10, ok, f"exact transfer {exact}, Bel residual max {worst:.1e} for d=1,2,3, {elapsed:.2f}s")
    assert ok


# ---------------------------------------------------------------- 11

def test_criterion_11_thunder():
    start = time.time()
    ext = ScalarExtension(K2)
    horizons = ((0, 2), (0, 2, 4))
    out = []
    for xi in (["1"], ["1", "2^(1/4)"]):
        t = make_target(K2, infinite_places(K2)[0], xi, 256)
        st = thunder_stability(t, ext, horizons)
        out.append((len(xi), [float(s) for s in st["sups"]], st["stable"]))
    elapsed = time.time() - start
    ok = all(stable and all(math.isfinite(s) for s in sups) for _, sups, stable in out) and elapsed < 180
    record(11, ok, "; ".join(f"n={n}: max |log ratio| {sups}" for n, sups, _ in out) + f", {elapsed:.1f}s")
    assert ok

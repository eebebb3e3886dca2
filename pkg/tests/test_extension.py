import math
import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parageo.extension import (INF, ScalarExtension, alpha_norm, bel_values, exponent_transfer, extend_point,
                               jarnik_extended_residual, thunder_check, verify_bounded_differences)
from parageo.minima import profile, q_grid
from parageo.nsystem import exponents, random_periodic_system
from parageo.numberfield import FieldContext, infinite_places, make_target

K2 = FieldContext.quadratic(2)
Q = FieldContext.rational()
SQRT2 = K2.parse_element("sqrt(2)")


@pytest.fixture(scope="module")
def ext():
    return ScalarExtension(K2, (K2.element(1), SQRT2))


def test_definition_of_Xi(ext):
    with mpmath.workprec(128):
        theta = mpmath.mpf(3) / 7
        Xi = extend_point([mpmath.mpf(1), theta], ext)
        r2 = mpmath.sqrt(2)
        assert all(abs(a - b) < 1e-35 for a, b in zip(Xi, (1, theta, r2, r2 * theta)))
        norm = mpmath.sqrt(mpmath.fsum(c * c for c in Xi))
        assert abs(norm - alpha_norm(ext) * mpmath.sqrt(1 + theta ** 2)) < 1e-35


def test_degree_one_is_identity():
    e = ScalarExtension(Q)
    xi = [mpmath.mpf(2), mpmath.mpf(5)]
    assert extend_point(xi, e) == tuple(xi)


def test_T_map(ext):
    y = ext.T_apply([1, 2, 3, 4])
    assert y == (K2.element(1) + 3 * SQRT2, K2.element(2) + 4 * SQRT2)
    assert ext.lattice_index(2) == 1
    assert ext.is_integral_basis


@given(st.lists(st.integers(-100, 100), min_size=4, max_size=4))
def test_T_roundtrip(x):
    ext = ScalarExtension(K2)
    assert ext.T_invert(ext.T_apply(x), integral=True) == tuple(x)


@given(st.lists(st.integers(-50, 50), min_size=4, max_size=4), st.fractions(-3, 3, max_denominator=9))
def test_coordinate_identity(x, theta):
    # x . Xi = sigma_w(T(x)) . xi exactly, checked at high precision
    ext = ScalarExtension(K2)
    with mpmath.workprec(200):
        xi = [mpmath.mpf(1), mpmath.mpf(theta.numerator) / theta.denominator]
        Xi = extend_point(xi, ext)
        lhs = mpmath.fsum(a * b for a, b in zip(x, Xi))
        from parageo.numberfield import embed
        Tx = ext.T_apply(x)
        rhs = mpmath.fsum(embed(c, ext.place, K2) * v for c, v in zip(Tx, xi))
        assert abs(lhs - rhs) < mpmath.mpf(10) ** -50


def test_non_integral_alpha_rejected_for_integral_inverse():
    e = ScalarExtension(K2, (K2.element(1), SQRT2 / 2))
    assert not e.is_integral_basis
    with pytest.raises(ValueError):
        e.T_invert((K2.element(1),), integral=True)
    assert e.T_invert((SQRT2,)) == (Fraction(0), Fraction(2))


def test_imaginary_field_rejected():
    with pytest.raises(ValueError):
        ScalarExtension(FieldContext.quadratic(-1))


def test_bounded_differences_degree_one_control():
    t = make_target(Q, infinite_places(Q)[0], ["1", "1.6180339887498948482"], 128)
    rep = verify_bounded_differences(t, ScalarExtension(Q), q_grid(4, Fraction(1, 2)))
    assert rep.sup_L == 0 and rep.sup_Lstar == 0


def test_bounded_differences_quadratic(ext):
    t = make_target(K2, infinite_places(K2)[0], ["1", "2^(1/4)"], 128)
    rep = verify_bounded_differences(t, ext, q_grid(4, Fraction(1, 2)))
    assert rep.sup_L < 2 and rep.sup_Lstar < 2


def test_transfer_examples():
    assert exponent_transfer({"omega_hat": 1}, 2)["omega_hat"] == 3
    assert exponent_transfer({"lam_hat": 1}, 2)["lam_hat"] == Fraction(1, 3)
    same = {"omega": Fraction(5, 2), "omega_hat": 2, "lam": Fraction(1, 3), "lam_hat": Fraction(1, 2)}
    assert exponent_transfer(same, 1) == same
    assert exponent_transfer({"omega": INF, "lam": 0}, 3) == {"omega": INF, "lam": 0}


def test_jarnik_examples():
    out = exponent_transfer({"omega_hat": 2, "lam_hat": Fraction(1, 2)}, 2)
    assert jarnik_extended_residual(out["omega_hat"], out["lam_hat"], 2) == 0


@pytest.mark.parametrize("d", [1, 2, 3])
def test_bel_values(d):
    with mpmath.workprec(128):
        lam, om = bel_values(d, 128)
        assert abs(jarnik_extended_residual(om, lam, d)) < 1e-30


@given(st.integers(0, 10 ** 5), st.integers(1, 4))
def test_transfer_composes_with_system_jarnik(seed, d):
    # a point-level Jarnik pair from a periodic 3-system stays on the extended curve
    ex = exponents(random_periodic_system(random.Random(seed), 3))
    om, lam = ex.omega_hat, ex.lam_hat
    if om == INF or om == 1 or lam == 0:
        return
    t = exponent_transfer({"omega_hat": om, "lam_hat": lam}, d)
    assert jarnik_extended_residual(t["omega_hat"], t["lam_hat"], d) == 0


def test_thunder_degree_one_lists_coincide():
    t = make_target(Q, infinite_places(Q)[0], ["1", "2^(1/4)"], 128)
    r = thunder_check(t, ScalarExtension(Q), Fraction(2))
    assert r.rational_minima == r.field_minima


def test_thunder_quadratic_ordering(ext):
    t = make_target(K2, infinite_places(K2)[0], ["1", "2^(1/4)"], 128)
    r = thunder_check(t, ext, Fraction(2))
    assert len(r.rational_minima) == 4 and len(r.field_minima) == 2
    assert all(a <= b for a, b in zip(r.rational_minima, r.rational_minima[1:]))
    assert max(abs(x) for x in r.log_ratios) < math.log(4)


def test_extended_point_coordinate_order_invariance():
    e = ScalarExtension(K2)
    with mpmath.workprec(256):
        x0 = mpmath.root(3, 3)
        Xi = extend_point([1, x0, x0 ** 2], e)
        a = e.embed_alpha()
        perm = [a[0], a[1], x0 * a[0], x0 * a[1], x0 ** 2 * a[0], x0 ** 2 * a[1]]
    pl = infinite_places(Q)[0]
    qs = q_grid(3, Fraction(1, 2))
    p1 = profile(make_target(Q, pl, list(Xi), 256), qs)
    p2 = profile(make_target(Q, pl, perm, 256), qs)
    assert p1.values == p2.values

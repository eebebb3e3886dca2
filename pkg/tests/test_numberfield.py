import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parageo.exterior import orthogonal_complement, rank
from parageo.numberfield import (D_star_xi, D_xi, FieldContext, abs_at, height_power, height_power_all_places,
                                 height_subspace, height_subspace_power, height_vector, infinite_places, make_target,
                                 places_above, product_formula_log, product_formula_residual)
from parageo.scalars import PAdicNumber, QuadraticNumber, hensel_root

Q = FieldContext.rational()
K2 = FieldContext.quadratic(2)

coef = st.fractions(min_value=-20, max_value=20, max_denominator=12)
quad = st.tuples(coef, coef).filter(lambda t: t != (0, 0)).map(lambda t: QuadraticNumber(t[0], t[1], 2))


def test_splitting_types():
    kinds = {p: [v.splitting for v in places_above(K2, p)] for p in (2, 3, 7)}
    assert kinds == {2: ["ramified"], 3: ["inert"], 7: ["split", "split"]}
    assert [v.local_degree for v in places_above(K2, 7)] == [1, 1]
    assert places_above(K2, 3)[0].local_degree == 2


def test_absolute_values():
    assert abs_at(Fraction(1, 2), infinite_places(Q)[0], Q) == mpmath.mpf("0.5")
    v2 = places_above(K2, 2)[0]
    sqrt2 = K2.parse_element("sqrt(2)")
    assert abs(abs_at(sqrt2, v2, K2) - 2 ** -0.5) < 1e-15
    assert product_formula_residual(sqrt2, K2) == 1


def test_heights():
    assert height_vector((3, 4)) == 5
    assert abs(height_vector((2, 4)) - mpmath.sqrt(5)) < 1e-30
    one, r2 = K2.element(1), K2.parse_element("sqrt(2)")
    assert abs(height_vector((one, r2), K2) - mpmath.sqrt(3)) < 1e-30
    assert height_subspace([(1, 0, 0), (0, 1, 0)]) == 1
    assert abs(height_subspace([(1, 2)]) - mpmath.sqrt(5)) < 1e-30


def test_smallness_functionals_vanish():
    t = make_target(Q, infinite_places(Q)[0], ["1", "0"], 128)
    assert D_xi((0, 1), t) == 0
    assert D_star_xi((1, 0), t) == 0


@given(quad)
def test_product_formula(a):
    assert product_formula_residual(a, K2) == 1
    with mpmath.workprec(128):
        assert abs(product_formula_log(a, K2)) < 1e-30


@given(st.lists(st.integers(-30, 30), min_size=2, max_size=4).filter(any))
def test_two_path_heights_over_q(x):
    assert height_power(x, Q) == height_power_all_places(x, Q)


@given(st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9)), min_size=2, max_size=3)
       .filter(lambda xs: any(t != (0, 0) for t in xs)))
def test_two_path_heights_over_quadratic(xs):
    x = [K2.from_basis(a, b) for a, b in xs]
    assert height_power(x, K2) == height_power_all_places(x, K2)


@given(st.lists(st.lists(st.integers(-5, 5), min_size=4, max_size=4), min_size=1, max_size=3)
       .filter(lambda b: rank(b) == len(b)))
def test_height_duality_rational(basis):
    assert height_subspace_power(basis, Q) == height_subspace_power(orthogonal_complement(basis), Q)


def test_height_duality_quadratic():
    rng = random.Random(5)
    for _ in range(10):
        basis = [[K2.from_basis(rng.randint(-4, 4), rng.randint(-4, 4)) for _ in range(3)] for _ in range(2)]
        if rank(basis) < 2:
            continue
        a = height_subspace(basis, K2)
        b = height_subspace(orthogonal_complement(basis), K2)
        assert abs(a - b) <= 1e-10 * a


def test_hensel_root_lifts():
    r = hensel_root([-2, 0, 1], 7, 20, 3)
    assert (r * r - 2) % 7 ** 20 == 0


def test_padic_arithmetic_roundtrip():
    x = PAdicNumber.from_rational(Fraction(14, 9), 7, 30)
    assert x.valuation() == 1
    y = x * PAdicNumber.from_rational(Fraction(9, 14), 7, 30)
    assert y.valuation() == 0


def test_degree_and_unit():
    assert K2.degree == 2 and Q.degree == 1
    eps = K2.fundamental_unit()
    assert abs(K2.norm(eps)) == 1


def test_zero_has_no_height():
    with pytest.raises(ValueError):
        height_power((0, 0), Q)

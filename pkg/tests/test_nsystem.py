import random
from dataclasses import replace
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from parageo.contracts import ContractViolation
from parageo.nsystem import (NSystem, Switch, check_rigidify, doubling_system, dual, exponents,
                             extend_scalars_system, is_rigid, jarnik_residual, random_periodic_system,
                             random_system, rigidify, system_from_json, system_to_json, template_system, validate)

F = Fraction
seeds = st.integers(0, 10 ** 6)


def _conditions(sys):
    return {v.condition for v in validate(sys)}


def test_template_and_doubling_are_valid():
    for n in (2, 3, 4, 5):
        assert validate(template_system(n)) == []
    assert validate(doubling_system()) == []


def test_template_values():
    T = template_system(3)
    assert T.evaluate(F(3)) == (0, 1, 2)
    assert T.evaluate(F(6)) == (1, 2, 3)
    assert T.evaluate(F(9)) == (2, 3, 4)
    assert is_rigid(T, 1, start=F(6))
    assert not is_rigid(T, 1)


def test_seeded_violations():
    T = template_system(3)
    sws = list(T.switches)
    sws[2] = Switch(sws[2].q, (F(0), F(1), F(3)), sws[2].k, sws[2].l)
    assert "S1" in _conditions(replace(T, switches=tuple(sws)))
    sws = list(T.switches)
    sws[1] = Switch(sws[1].q, sws[1].values, 3, sws[1].l)
    assert "S2" in _conditions(replace(T, switches=tuple(sws)))
    bad = NSystem(2, F(0), (Switch(F(0), (F(0), F(0)), 2, None), Switch(F(1), (F(0), F(1)), 2, 2)), horizon=F(4))
    assert "S3" in _conditions(bad)


def test_doubling_evaluations():
    D = doubling_system()
    assert D.evaluate(F(3)) == (1, 2)
    assert D.evaluate(F(6)) == (2, 4)
    assert D.evaluate(F(9)) == (4, 5)
    assert D.evaluate(F(12)) == (4, 8)


@given(seeds)
def test_dual_is_involutive(seed):
    S = random_system(random.Random(seed), 3, moves=8)
    assert dual(dual(S)) is S
    D = dual(S)
    for q in S.breakpoints(S.q0, S.switches[-1].q + 3):
        assert D.evaluate(q) == tuple(q - x for x in reversed(S.evaluate(q)))


@given(seeds)
def test_two_systems_are_self_dual(seed):
    S = random_system(random.Random(seed), 2, moves=10)
    D = dual(S)
    end = S.switches[-1].q + 4
    for i in range(int(end * 8) + 1):
        q = F(i, 8)
        assert D.evaluate(q) == S.evaluate(q)


@given(seeds)
def test_components_sum_to_q(seed):
    S = random_system(random.Random(seed), 4, moves=10, denominator=3)
    for q in S.breakpoints(S.q0, S.switches[-1].q + 2):
        vals = S.evaluate(q)
        assert sum(vals) == q
        assert list(vals) == sorted(vals)


@given(seeds)
def test_json_roundtrip(seed):
    S = random_periodic_system(random.Random(seed), 3)
    T = system_from_json(system_to_json(S))
    for q in S.breakpoints(S.q0, S.q0 + 40):
        assert T.evaluate(q) == S.evaluate(q)


@pytest.mark.parametrize("seed", range(5))
def test_rigidify_contract(seed):
    L = random_system(random.Random(seed), 3, moves=12)
    R = rigidify(L, c=1)
    assert check_rigidify(L, R, 1) == []


def test_rigidify_rejects_invalid_input():
    T = template_system(3)
    sws = list(T.switches)
    sws[2] = Switch(sws[2].q, (F(0), F(1), F(3)), sws[2].k, sws[2].l)
    with pytest.raises(ContractViolation):
        rigidify(replace(T, switches=tuple(sws)))


@given(seeds)
def test_jarnik_identity_on_periodic_systems(seed):
    S = random_periodic_system(random.Random(seed), 3)
    r = jarnik_residual(exponents(S))
    assert isinstance(r, Fraction) and r == 0


def test_doubling_exponents():
    ex = exponents(doubling_system())
    assert ex.phi_lower == (F(1, 3), F(1, 2))
    assert ex.phi_upper == (F(1, 2), F(2, 3))


def test_extension_of_scalars_system():
    T = template_system(2)
    G = extend_scalars_system(T, 2)
    assert extend_scalars_system(T, 1) is T
    assert G.n == 4

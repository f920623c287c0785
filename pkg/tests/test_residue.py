import random
from itertools import permutations

import pytest
from hypothesis import given, settings, strategies as st

from tautres.poly import LinearForm, MultiPoly, lam, theta, z
from tautres.residue import (MalformedTerm, RationalTerm, flag_sum_to_residue_check,
                             iterated_residue, residue_by_full_expansion, residue_with_pruning,
                             vanishing_precheck)

Z1, Z2, Z3 = z(0, 1), z(0, 2), z(0, 3)


def lin(coeffs, const=0):
    return LinearForm.make(coeffs, const)


def term(num, factors, order):
    return RationalTerm(num, tuple(factors), tuple(order))


def test_orientation():
    assert iterated_residue(term(MultiPoly.one(), [(lin({Z1: 1}), 1)], [Z1])) == MultiPoly.const(-1)
    assert iterated_residue(term(MultiPoly.one(), [(lin({Z1: 1}), 2)], [Z1])).is_zero()


def test_two_variable_example():
    # (z1 - z2) / (z1 z2 (2 z1 - z2)); cross-checked by the full expansion
    num = MultiPoly.var(Z1) - MultiPoly.var(Z2)
    t = term(num, [(lin({Z1: 1}), 1), (lin({Z2: 1}), 1), (lin({Z1: 2, Z2: -1}), 1)], [Z1, Z2])
    assert iterated_residue(t) == MultiPoly.one()
    assert residue_by_full_expansion(t, 6) == MultiPoly.one()


def test_report_contains_bounds():
    t = term(MultiPoly.var(Z1) ** 2, [(lin({Z1: 1}), 3)], [Z1])
    rep = iterated_residue(t, report=True)
    assert rep.value == MultiPoly.const(-1)
    assert Z1 in rep.truncation


def test_malformed_terms():
    with pytest.raises(MalformedTerm):
        term(MultiPoly.var(Z2), [(lin({Z1: 1}), 1)], [Z1])
    with pytest.raises(MalformedTerm):
        term(MultiPoly.one(), [(lin({theta(1, 1): 1}), 1)], [Z1])
    with pytest.raises(MalformedTerm):
        term(MultiPoly.one(), [(lin({Z1: 1}), 0)], [Z1])


def _random_term(rng, d):
    zs = [Z1, Z2, Z3][:d]
    t1 = MultiPoly.var(theta(1, 1))
    num = MultiPoly.zero()
    for _ in range(3):
        mono = {v: rng.randint(0, 3) for v in zs}
        num = num + MultiPoly.monomial(mono, coeff=rng.randint(-3, 3)) * t1 ** rng.randint(0, 2)
    factors = [(lin({v: 1}), rng.randint(1, 3)) for v in zs]
    for q in range(1, d):
        i = rng.randint(0, q - 1)
        factors.append((lin({zs[i]: rng.choice([1, 2]), zs[q]: -1}), 1))
    factors.append((lin({zs[-1]: 1}, rng.randint(-2, 2)), 1))
    return term(num, factors, zs)


@given(st.integers(1, 3), st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_engine_matches_full_expansion(d, seed):
    t = _random_term(random.Random(seed), d)
    assert iterated_residue(t) == residue_by_full_expansion(t, 12)


@given(st.integers(1, 3), st.integers(0, 10 ** 6))
@settings(max_examples=40, deadline=None)
def test_precheck_is_sound(d, seed):
    t = _random_term(random.Random(seed), d)
    if vanishing_precheck(t):
        assert iterated_residue(t).is_zero()
    assert residue_with_pruning(t) == iterated_residue(t)


def test_precheck_examples():
    # numerator omits z_2, z_2 appears only as a pure power of degree >= 2
    t = term(MultiPoly.var(Z1), [(lin({Z1: 1}), 2), (lin({Z2: 1}), 2)], [Z1, Z2])
    assert vanishing_precheck(t) and iterated_residue(t).is_zero()
    assert not vanishing_precheck(term(MultiPoly.one(), [(lin({Z1: 1}), 1)], [Z1]))
    # a k=3 style term missing z_2 in the numerator with z_2^(n+1), n >= 2
    t = term(MultiPoly.var(Z1) ** 4, [(lin({Z1: 1}), 3), (lin({Z2: 1}), 3),
                                      (lin({Z1: 2, Z2: -1}), 1)], [Z1, Z2])
    assert vanishing_precheck(t) and iterated_residue(t).is_zero()


def test_linearity():
    rng = random.Random(7)
    a, b = _random_term(rng, 2), _random_term(rng, 2)
    b = RationalTerm(b.numerator, a.factors, a.z_order)
    combo = RationalTerm(a.numerator * 3 - b.numerator * 2, a.factors, a.z_order)
    assert iterated_residue(combo) == iterated_residue(a) * 3 - iterated_residue(b) * 2


def test_normal_crossing_order_independent():
    num = MultiPoly.var(Z1) ** 2 * MultiPoly.var(Z2) ** 3 * MultiPoly.var(Z3) + \
        MultiPoly.var(Z1) * MultiPoly.var(Z3) ** 2 * MultiPoly.var(theta(1, 1)) ** 3
    factors = [(lin({Z1: 1}), 3), (lin({Z2: 1}, -1), 4), (lin({Z3: 1}, 2), 2)]
    values = {iterated_residue(term(num, factors, order)) for order in permutations([Z1, Z2, Z3])}
    assert len(values) == 1


def _lams(m):
    return [MultiPoly.var(lam(0, j)) for j in range(1, m + 1)]


def test_flag_identity_examples():
    l = _lams(2)
    left, right = flag_sum_to_residue_check(MultiPoly.var(Z1), l, 1, [Z1])
    assert left == right == MultiPoly.const(-1)
    for m in (2, 3, 4):
        left, right = flag_sum_to_residue_check(MultiPoly.one(), _lams(m), 1, [Z1])
        assert left == right and right.is_zero()
        # z^(m-1): the partial-fraction sum is (-1)^(m-1)
        left, right = flag_sum_to_residue_check(MultiPoly.var(Z1) ** (m - 1), _lams(m), 1, [Z1])
        assert left == right == MultiPoly.const((-1) ** (m - 1))


def test_flag_identity_high_degree():
    rng = random.Random(11)
    for d, m in ((2, 4), (3, 4), (3, 5)):
        zs = [Z1, Z2, Z3][:d]
        Q = MultiPoly.zero()
        for _ in range(2):
            exps = {}
            for _ in range(6):
                v = rng.choice(zs)
                exps[v] = exps.get(v, 0) + 1
            Q = Q + MultiPoly.monomial(exps, coeff=rng.randint(1, 5))
        left, right = flag_sum_to_residue_check(Q, _lams(m), d, zs)
        assert left == right


def test_json_roundtrip():
    t = term(MultiPoly.var(Z1) - 2, [(lin({Z1: 2, Z2: -1}), 1), (lin({Z2: 1}), 2), (lin({Z1: 1}), 1)],
             [Z1, Z2])
    back = RationalTerm.from_json(t.to_json())
    assert iterated_residue(back) == iterated_residue(t)

from collections import Counter

import pytest

from tautres.chern import parse_phi
from tautres.oracle import (OracleError, YoungDiagram, ab_integrate, affine_chart,
                            compact_integral, distributions, hilb_fixed_points, p1xp1_chart,
                            p2_chart, random_weights, tangent_shifts_bruteforce, tangent_weights,
                            taut_weights)
from tautres.poly import MultiPoly, lam
from tautres.setpart import integer_partitions

PARTITION_COUNTS = [1, 1, 2, 3, 5, 7, 11]


def test_fixed_point_counts():
    assert [len(hilb_fixed_points(k)) for k in range(7)] == PARTITION_COUNTS
    # P^2 has three fixed points; Hilb^2(P^2) has 9 torus-fixed points
    assert sum(1 for _ in distributions(2, 3)) == 9
    # coefficient of q^3 in prod (1 - q^i)^-4
    assert sum(1 for _ in distributions(3, 4)) == 40


def test_diagram_validation_and_transpose():
    with pytest.raises(ValueError):
        YoungDiagram((1, 2))
    mu = YoungDiagram((3, 1))
    assert mu.transpose() == YoungDiagram((2, 1, 1))
    assert mu.transpose().transpose() == mu
    assert mu.generators() == [(3, 0), (1, 1), (0, 2)]


def test_tangent_weights_examples():
    # a single point: T = C^2 with weights l1, l2
    assert sorted(tangent_weights(YoungDiagram((1,)), 5, 7)) == [5, 7]
    assert Counter(tangent_weights(YoungDiagram((2,)), 1, 10)) == Counter([2, 9, 1, 10])


@pytest.mark.parametrize("k", range(1, 7))
def test_arm_leg_matches_bruteforce(k):
    l1, l2 = 1000, 1
    for parts in integer_partitions(k):
        mu = YoungDiagram(parts)
        brute = Counter(-(a * l1 + b * l2) for a, b in tangent_shifts_bruteforce(mu))
        assert brute == Counter(tangent_weights(mu, l1, l2))


def test_transpose_symmetry():
    for parts in integer_partitions(5):
        mu = YoungDiagram(parts)
        assert Counter(tangent_weights(mu, 3, 11)) == Counter(tangent_weights(mu.transpose(), 11, 3))


def test_taut_weights():
    assert taut_weights(YoungDiagram((2, 1)), 3, 5, [7]) == [7, 4, 2]


def test_k1_values():
    assert compact_integral(lambda w: p2_chart([0], w), 1, parse_phi("1")) == 0
    for d in (1, 2, 3):
        assert compact_integral(lambda w: p2_chart([d], w), 1, parse_phi("c1^2")) == d * d


def test_parameters_cancel_symbolically():
    res = ab_integrate(p2_chart([2]), 1, parse_phi("c1^2"))
    assert res.value.reduce().num == MultiPoly.const(4)
    assert res.fixed_point_count == 3


@pytest.mark.parametrize("d,want", [(0, -3), (1, 0), (2, 21)])
def test_k2_frozen(d, want):
    assert compact_integral(lambda w: p2_chart([d], w), 2, parse_phi("c1^4")) == want
    assert compact_integral(lambda w: p2_chart([d], w), 2, parse_phi("c1^4"), ordered=True) == 2 * want


def test_p1xp1_k1():
    val = compact_integral(lambda w: p1xp1_chart([(1, 2)], w[:2], w[2:]), 1, parse_phi("c1^2"),
                           nweights=4)
    assert val == 2 * 1 * 2


def test_affine_symbolic():
    res = ab_integrate(affine_chart(1), 1, parse_phi("c1"))
    l1, l2 = MultiPoly.var(lam(0, 1)), MultiPoly.var(lam(0, 2))
    assert (res.value * l1 * l2).reduce().num.is_homogeneous(1)


def test_nongeneric_weights_are_rejected():
    with pytest.raises(OracleError):
        ab_integrate(p2_chart([1], [0, 0, 1]), 1, parse_phi("c1^2"))


def test_random_weights_generic():
    import random
    w = random_weights(4, random.Random(3))
    assert len({a - b for a in w for b in w if a != b}) == 12

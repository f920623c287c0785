from itertools import product

import pytest

from tautres.setpart import (SetPartition, bell, enumerate_partitions, integer_partitions,
                             refines, sieve_coefficient)


def test_counts_are_bell_numbers():
    assert [len(enumerate_partitions(k)) for k in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]
    assert [bell(k) for k in range(1, 8)] == [1, 2, 5, 15, 52, 203, 877]


def test_k3_listing():
    got = [str(p) for p in enumerate_partitions(3)]
    assert sorted(got) == sorted(["123", "12|3", "13|2", "1|23", "1|2|3"])
    assert len(set(got)) == 5


def test_range_checked():
    with pytest.raises(ValueError):
        enumerate_partitions(0)
    with pytest.raises(ValueError):
        enumerate_partitions(13)


def test_invalid_partition_rejected():
    with pytest.raises(ValueError):
        SetPartition.of([(1, 2), (2, 3)])


def test_sieve_coefficients():
    assert sieve_coefficient(SetPartition.of([(1, 2, 3)])) == 1
    assert sieve_coefficient(SetPartition.of([(1, 2), (3,)])) == -1
    assert sieve_coefficient(SetPartition.of([(1,), (2,), (3,)])) == 2
    # the k=3 five-term expansion: 1, -1, -1, -1, +2
    coeffs = sorted(sieve_coefficient(p) for p in enumerate_partitions(3))
    assert coeffs == [-1, -1, -1, 1, 2]


def test_refines_examples():
    fine = SetPartition.of([(1,), (2,), (3,)])
    a = SetPartition.of([(1, 2), (3,)])
    b = SetPartition.of([(1, 3), (2,)])
    top = SetPartition.of([(1, 2, 3)])
    assert refines(fine, a)
    assert not refines(a, b)
    assert all(refines(p, top) for p in enumerate_partitions(3))


def test_refinement_is_partial_order():
    for k in range(1, 6):
        parts = enumerate_partitions(k)
        for p in parts:
            assert refines(p, p)
        for p, q in product(parts, repeat=2):
            if refines(p, q) and refines(q, p):
                assert p == q
        if k <= 4:
            for p, q, r in product(parts, repeat=3):
                if refines(p, q) and refines(q, r):
                    assert refines(p, r)


def test_json_and_canonical_order():
    p = SetPartition.of([(3,), (2, 1)])
    assert p.to_json() == [[1, 2], [3]]
    assert p.block_sizes == (2, 1)


def test_integer_partitions():
    assert list(integer_partitions(4)) == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]

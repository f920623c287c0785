from fractions import Fraction
from math import factorial

import pytest

from tautres.chern import BundleSpec
from tautres.genfun import (MultiplicativeClassSpec, class_in_chern, exp_coefficients,
                            segre_kernel, series_coefficients)
from tautres.poly import MultiPoly, c
from tautres.residue import iterated_residue
from tautres.tautint import SpecError, projective_space_table


def test_exp_coefficients_identity():
    # exp(q) has coefficients 1/k!
    assert exp_coefficients([0, 1, 0, 0, 0], 4) == [Fraction(1, factorial(k)) for k in range(5)]
    # exp(log(1+q)) = 1+q, with log(1+q) = sum (-1)^(m-1) (m-1)! q^m / m!
    conn = [0] + [(-1) ** (m - 1) * factorial(m - 1) for m in range(1, 6)]
    assert exp_coefficients(conn, 5) == [1, 1, 0, 0, 0, 0]


def test_class_in_chern():
    seg = MultiplicativeClassSpec.segre(4)
    c1, c2 = MultiPoly.var(c(1)), MultiPoly.var(c(2))
    assert class_in_chern(seg, 2, 2) == c1 * c1 - c2
    assert class_in_chern(MultiplicativeClassSpec.chern(), 3, 2) == c2
    assert class_in_chern(seg, 2, 0) == MultiPoly.one()


def test_log_coefficients():
    b = MultiplicativeClassSpec("custom", (Fraction(1), Fraction(1))).log_coefficients(4)
    assert b[1:] == [1, Fraction(-1, 2), Fraction(1, 3), Fraction(-1, 4)]


def test_class_validation():
    with pytest.raises(SpecError):
        MultiplicativeClassSpec("bad", (Fraction(2),))
    with pytest.raises(SpecError):
        MultiplicativeClassSpec.from_json({"coefficients": ["x"]})
    assert MultiplicativeClassSpec.from_json({"coefficients": [1, "1/2"]}).a(1) == Fraction(1, 2)


def test_point_base_series():
    rep = series_coefficients(MultiplicativeClassSpec.segre(6), 0, BundleSpec(1), 4)
    assert rep.agreement
    polys = [co.direct.polynomial() for co in rep.coefficients]
    assert polys[0] == MultiPoly.one()
    assert all(p.is_zero() for p in polys[1:])


@pytest.mark.parametrize("d", [0, 1, 2])
def test_segre_series_on_p2(d):
    rep = series_coefficients(MultiplicativeClassSpec.segre(8), 2, BundleSpec(1), 3,
                              projective_space_table(2, [d]))
    assert rep.agreement
    assert rep.candidates["unordered"]
    assert [co.direct_value for co in rep.coefficients] == \
        [co.exponential_value for co in rep.coefficients]


def test_chern_series_rank_two():
    rep = series_coefficients(MultiplicativeClassSpec.chern(), 2, BundleSpec(2), 3,
                              projective_space_table(2, [1, 2]))
    assert rep.agreement
    assert rep.to_json()["coefficients"][0]["direct"] == "2"


def test_custom_class_is_multiplicative():
    cls = MultiplicativeClassSpec("custom", (Fraction(1), Fraction(2), Fraction(-1), Fraction(3)))
    rep = series_coefficients(cls, 1, BundleSpec(1), 3, projective_space_table(1, [3]))
    assert rep.agreement


def test_inverse_z_kernel_shape_and_value():
    t = segre_kernel(2, 2, BundleSpec(1))
    assert t.factors[0][1] == 1 + 2 + 1
    # the 1/z expansion misses the graded contribution entirely
    assert iterated_residue(t).is_zero()
    with pytest.raises(SpecError):
        segre_kernel(0, 2, BundleSpec(1))

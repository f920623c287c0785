import json
from fractions import Fraction

import pytest

from tautres.chern import BundleSpec, parse_phi
from tautres.oracle import ab_integrate, affine_chart, compact_integral, p1xp1_chart, p2_chart
from tautres.poly import LinearForm, MultiPoly, lam, z
from tautres.setpart import enumerate_partitions
from tautres.tautint import (Mode, ProblemSpec, SpecError, block_factor, block_integrand,
                             chern_monomials, chern_weil, closed_form_k2, closed_form_k3,
                             evaluate_partition, integrate_equivariant, integrate_ghilb,
                             mixed_triples, p1xp1_table, positivity_rows, positivity_scan,
                             projective_space_table, q_polynomial)


def spec(n, k, phi, r=1, **kw):
    return ProblemSpec(n, k, BundleSpec(r), parse_phi(phi), **kw)


def test_q_table_low_indices():
    for j in (0, 1, 2, 3):
        assert q_polynomial(j) == MultiPoly.one()
    assert str(q_polynomial(4)) == str(2 * MultiPoly.var(z(0, 1)) + MultiPoly.var(z(0, 2))
                                       - MultiPoly.var(z(0, 4)))
    assert q_polynomial(5).is_homogeneous(3)


def test_missing_q_message():
    with pytest.raises(SpecError, match=r"Q_6 unknown; supply via --q-poly"):
        q_polynomial(6)
    assert q_polynomial(6, overrides={6: "z1^5"}) == MultiPoly.var(z(0, 1)) ** 5


def test_q_override_rejects_foreign_variables():
    with pytest.raises(SpecError):
        q_polynomial(2, overrides={2: "z3"})


def test_mixed_triples():
    assert mixed_triples(1) == []
    assert mixed_triples(2) == [(1, 1, 2)]
    assert mixed_triples(3) == [(1, 1, 2), (1, 1, 3), (1, 2, 3)]


def test_block_shapes():
    k = block_integrand(3, 2)
    z1, z2 = z(0, 1), z(0, 2)
    forms = {f: m for f, m in k.factors}
    assert forms[LinearForm.make({z1: 2, z2: -1})] == 1
    assert forms[LinearForm.make({z1: 1})] == 3 and forms[LinearForm.make({z2: 1})] == 3
    assert block_integrand(1, 2).factors == ()
    eq = block_integrand(2, 2, mode=Mode.EQUIVARIANT)
    assert len(eq.factors) == 3


def test_block_factor_conventions():
    assert [block_factor(d) for d in range(5)] == [1, 1, 2, 6, 24]
    assert [block_factor(d, "literal") for d in range(4)] == [1, -1, 1, -1]
    with pytest.raises(SpecError):
        block_factor(1, "other")


def test_spec_validation():
    with pytest.raises(SpecError):
        spec(2, 2, "c1^3")
    with pytest.raises(SpecError):
        spec(1, 2, "c3", r=1)
    with pytest.raises(SpecError):
        spec(1, 1, "c1", convention="nope")


@pytest.mark.parametrize("n,r", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_k1_is_integral_over_base(n, r):
    table = projective_space_table(n, [1, 2][:r])
    res = integrate_ghilb(spec(n, 1, f"c1^{n}", r), table)
    assert len(res.terms) == 1
    assert res.total == Fraction(sum([1, 2][:r]) ** n)


@pytest.mark.parametrize("d,want", [(0, -3), (1, 0), (2, 21)])
def test_p2_k2_frozen(d, want):
    res = integrate_ghilb(spec(2, 2, "c1^4"), projective_space_table(2, [d]))
    assert res.total == want
    assert res.ordered_total == 2 * want


@pytest.mark.parametrize("phi", ["c1^4", "c2^2", "c1^2*c2"])
def test_k2_matches_closed_form(phi):
    s = spec(2, 2, phi)
    table = projective_space_table(2, [3])
    a, b = integrate_ghilb(s, table), closed_form_k2(s, table)
    assert [t.value for t in a.terms] == [t.value for t in b.terms]
    assert a.total == b.total


def test_p1xp1_against_oracle():
    for phi in ("c2^2", "c1^2*c2", "c1^4"):
        mine = integrate_ghilb(spec(2, 2, phi), p1xp1_table([(1, 2)])).total
        theirs = compact_integral(lambda w: p1xp1_chart([(1, 2)], w[:2], w[2:]), 2, parse_phi(phi),
                                  nweights=4)
        assert mine == theirs


def test_rank_two_against_oracle():
    for phi in ("c1^4", "c2^2", "c1*c3", "c4"):
        mine = integrate_ghilb(spec(2, 2, phi, r=2), projective_space_table(2, [1, 2])).total
        theirs = compact_integral(lambda w: p2_chart([1, 2], w), 2, parse_phi(phi))
        assert mine == theirs


def test_k3_closed_form_needs_coefficient_two():
    s = spec(2, 3, "c1^6")
    table = projective_space_table(2, [2])
    oracle = compact_integral(lambda w: p2_chart([2], w), 3, parse_phi("c1^6"))
    assert integrate_ghilb(s, table).total == oracle
    assert closed_form_k3(s, table).total == oracle
    # the uncorrected deepest term is off
    assert closed_form_k3(s, table, deepest_coefficient=1).total != oracle


def test_literal_convention_disagrees_with_oracle():
    s = spec(2, 3, "c1^6", convention="literal")
    table = projective_space_table(2, [2])
    oracle = compact_integral(lambda w: p2_chart([2], w), 3, parse_phi("c1^6"))
    assert integrate_ghilb(s, table).total != oracle


def test_k5_spot_check():
    s = spec(2, 5, "c5^2")
    table = projective_space_table(2, [1])
    oracle = compact_integral(lambda w: p2_chart([1], w), 5, parse_phi("c5^2"))
    assert integrate_ghilb(s, table, prune=True).total == oracle


def test_threads_do_not_change_output():
    s = spec(2, 3, "c1^2*c2^2")
    table = projective_space_table(2, [1])
    one = json.dumps(integrate_ghilb(s, table, workers=1).to_json(), sort_keys=True)
    many = json.dumps(integrate_ghilb(s, table, workers=4).to_json(), sort_keys=True)
    assert one == many


def _weights():
    return tuple(MultiPoly.var(lam(0, i)) for i in (1, 2, 3))


@pytest.mark.parametrize("k,phi", [(1, "c1^2"), (2, "c2"), (2, "c1^4"), (3, "c3"), (3, "c1^2")])
def test_equivariant_matches_affine_oracle(k, phi):
    l1, l2, v = _weights()
    s = ProblemSpec(2, k, BundleSpec(1, (v,)), parse_phi(phi), mode=Mode.EQUIVARIANT,
                    X=BundleSpec(2, (l1, l2)))
    mine = integrate_equivariant(s).unordered
    theirs = ab_integrate(affine_chart(1, l1, l2, [v]), k, parse_phi(phi)).value
    assert (mine - theirs).reduce().num.is_zero()


@pytest.mark.parametrize("k", [2, 3])
def test_chern_weil_coherence(k):
    l1, l2, v = _weights()
    phi = parse_phi(f"c1^{2 * k}")
    eq = integrate_equivariant(ProblemSpec(2, k, BundleSpec(1, (v,)), phi, mode=Mode.EQUIVARIANT,
                                           X=BundleSpec(2, (l1, l2))))
    manifold = ProblemSpec(2, k, BundleSpec(1), phi, segre_order=2 * k)
    for p, value in eq.per_partition:
        raw = evaluate_partition(manifold, p, check=False).raw
        assert chern_weil(raw, [l1, l2], [v], p.size, 2 * k) == value


def test_equivariant_needs_weights():
    with pytest.raises(SpecError):
        integrate_equivariant(spec(2, 2, "c1^4"))


def test_chern_monomials():
    assert chern_monomials(3, 2) == ["c2*c1", "c1*c1*c1"]
    assert chern_monomials(0, 3) == ["1"]


def test_positivity_rows_format():
    rows = positivity_rows(spec(2, 2, "c1^4"), "c1^4")
    labels = {r["monomial"]: r for r in rows}
    assert labels["[cV1^2][cV1^2]"]["coefficient"] == "3"
    assert labels["[cV1^2]"]["sign"] == -1
    scan = positivity_scan([1], [2], [1], limit=2)
    assert scan["negative"] == [r for r in scan["rows"] if r["sign"] < 0]
    assert {r["phi"] for r in scan["rows"]} <= set(chern_monomials(2, 2))


def test_pruning_agrees_termwise():
    s = spec(2, 3, "c1^2*c2^2")
    for p in enumerate_partitions(3):
        assert evaluate_partition(s, p).value == evaluate_partition(s, p, prune=True).value

"""The acceptance checks, shared by the test suite and ``tautres selftest``.

Each check returns a :class:`CheckResult`; none of them raises on a mismatch.
"""
from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Tuple

from .chern import BundleSpec, ChernExpr, parse_phi
from .genfun import MultiplicativeClassSpec, series_coefficients
from .oracle import compact_integral, p2_chart
from .poly import MultiPoly, VarId, VarKind, cV, c, graded_part, lam, substitute, z
from .residue import RationalTerm, flag_sum_to_residue_check, iterated_residue, \
    residue_by_full_expansion
from .tautint import (ConsistencyError, IntersectionTable, ProblemSpec, chern_monomials,
                      closed_form_k2, closed_form_k3, evaluate_partition, integrate_ghilb,
                      partition_term, integrand_degree, projective_space_table, q_polynomial)
from .poly import LinearForm
from .parse import parse_poly
from .setpart import enumerate_partitions


@dataclass
class CheckResult:
    number: int
    title: str
    passed: bool
    cases: int = 0
    seconds: float = 0.0
    budget: float = 0.0
    failures: List[str] = field(default_factory=list)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        extra = f"; first failure: {self.failures[0]}" if self.failures else ""
        return (f"[{status}] criterion {self.number}: {self.title} "
                f"({self.cases} cases, {self.seconds:.1f}s of {self.budget:.0f}s){extra}")


def random_phi(rng: random.Random, degree: int, max_index: int, terms: int = 3) -> ChernExpr:
    """Random integer combination of Chern monomials, parsed from text."""
    pool = chern_monomials(degree, max_index)
    chosen = rng.sample(pool, min(terms, len(pool)))
    text = " + ".join(f"({rng.choice([-3, -2, -1, 1, 2, 3])})*{m}" for m in chosen)
    return parse_phi(text)


def _bundle_table(n: int, r: int) -> IntersectionTable:
    return projective_space_table(n, [1, 2][:r] if r <= 2 else list(range(1, r + 1)))


def _run(number: int, title: str, budget: float, body: Callable[[List[str]], int]) -> CheckResult:
    failures: List[str] = []
    start = time.perf_counter()
    try:
        cases = body(failures)
    except ConsistencyError as exc:
        failures.append(f"consistency failure: {exc}")
        cases = 0
    elapsed = time.perf_counter() - start
    if elapsed > budget:
        failures.append(f"time {elapsed:.1f}s exceeds {budget:.0f}s")
    return CheckResult(number, title, not failures, cases, elapsed, budget, failures)


# ---------------------------------------------------------------------------

def criterion_1(seed: int = 1) -> CheckResult:
    def body(failures):
        rng = random.Random(seed)
        cases = 0
        for n in (1, 2, 3):
            for r in (1, 2):
                table = _bundle_table(n, r)
                for _ in range(10):
                    phi = random_phi(rng, n, r)
                    res = integrate_ghilb(ProblemSpec(n, 1, BundleSpec(r), phi), table)
                    direct = substitute(phi.expand(), {c(i): MultiPoly.var(cV(1, i))
                                                       for i in range(1, r + 1)})
                    want = table.integrate(graded_part(direct, {1: n}))
                    cases += 1
                    if res.total != want or res.terms[0].value != direct:
                        failures.append(f"n={n} r={r} phi={phi}: {res.total} != {want}")
        return cases
    return _run(1, "k=1 reduction", 1.0, body)


def _k2_specs(seed: int):
    rng = random.Random(seed)
    for n in (1, 2, 3):
        for r in (1, 2):
            for _ in range(10):
                yield ProblemSpec(n, 2, BundleSpec(r), random_phi(rng, 2 * n, 2 * r)), \
                    _bundle_table(n, r)


def _k3_specs(seed: int):
    rng = random.Random(seed)
    for n in (1, 2):
        for _ in range(5):
            yield ProblemSpec(n, 3, BundleSpec(1), random_phi(rng, 3 * n, 3)), _bundle_table(n, 1)


def _same(a, b) -> bool:
    return ([(t.partition, t.value) for t in a.terms] == [(t.partition, t.value) for t in b.terms]
            and a.ordered_total == b.ordered_total)


def criterion_2(seed: int = 2, prune: bool = False) -> CheckResult:
    def body(failures):
        cases = 0
        for spec, table in _k2_specs(seed):
            a = integrate_ghilb(spec, table, prune=prune)
            b = closed_form_k2(spec, table)
            cases += 1
            if not _same(a, b):
                failures.append(f"n={spec.n} r={spec.V.rank} phi={spec.phi}")
        return cases
    return _run(2, "closed form k=2", 10.0, body)


def criterion_3(seed: int = 3, prune: bool = False) -> CheckResult:
    def body(failures):
        cases = 0
        for spec, table in _k3_specs(seed):
            a = integrate_ghilb(spec, table, prune=prune)
            b = closed_form_k3(spec, table)
            cases += 1
            if not _same(a, b):
                failures.append(f"n={spec.n} phi={spec.phi}")
        return cases
    return _run(3, "closed form k=3", 60.0, body)


def surface_cases(cap: int = 10):
    for k in (2, 3, 4):
        for text in chern_monomials(2 * k, k)[:cap]:
            yield k, text


def criterion_4(prune: bool = False) -> CheckResult:
    def body(failures):
        cases = 0
        for k, text in surface_cases():
            phi = parse_phi(text)
            universal = integrate_ghilb(ProblemSpec(2, k, BundleSpec(1), phi), prune=prune)
            for d in (1, 2, 3):
                table = projective_space_table(2, [d])
                mine = sum((table.integrate(t.value) for t in universal.terms), Fraction(0))
                mine /= _fact(k)
                theirs = compact_integral(lambda w, d=d: p2_chart([d], w), k, phi)
                cases += 1
                if mine != theirs:
                    failures.append(f"k={k} d={d} phi={text}: {mine} != {theirs}")
        return cases
    return _run(4, "P2 localization oracle", 600.0, body)


def _fact(k: int) -> int:
    from math import factorial
    return factorial(k)


def criterion_5(seed: int = 5) -> CheckResult:
    def body(failures):
        rng = random.Random(seed)
        cases = 0
        for m in range(1, 6):
            lambdas = [MultiPoly.var(lam(0, j)) for j in range(1, m + 1)]
            for d in range(1, min(3, m) + 1):
                zs = [z(0, i) for i in range(1, d + 1)]
                for _ in range(20):
                    deg = rng.randint(0, 3)
                    Q = _random_homogeneous(rng, zs, deg)
                    left, right = flag_sum_to_residue_check(Q, lambdas, d, zs)
                    cases += 1
                    if not left == right:
                        failures.append(f"m={m} d={d} Q={Q}")
        return cases
    return _run(5, "flag sum = residue", 30.0, body)


def _random_homogeneous(rng: random.Random, zs, degree: int) -> MultiPoly:
    out = MultiPoly.zero()
    for _ in range(3):
        exps: Dict[VarId, int] = {}
        for _ in range(degree):
            v = rng.choice(zs)
            exps[v] = exps.get(v, 0) + 1
        out = out + MultiPoly.monomial(exps, coeff=rng.randint(-4, 4))
    if out.is_zero():
        out = MultiPoly.monomial({zs[0]: degree})
    return out


def criterion_6() -> CheckResult:
    """Degree and symmetry bookkeeping on every partition term of criteria 2-4."""
    def body(failures):
        cases = 0
        specs = [s for s, _ in _k2_specs(2)] + [s for s, _ in _k3_specs(3)] + \
            [ProblemSpec(2, k, BundleSpec(1), parse_phi(t)) for k, t in surface_cases()]
        for spec in specs:
            for p in enumerate_partitions(spec.k):
                cases += 1
                term = partition_term(spec, p)
                s = p.size
                if not term.numerator.is_zero():
                    deg = integrand_degree(term)
                    if deg != (spec.n + 1) * s - spec.k:
                        failures.append(f"{p}: integrand degree {deg}")
                # raises ConsistencyError on asymmetry or inhomogeneity
                res = evaluate_partition(spec, p, check=True)
                for exps, _ in res.value.items():
                    per: Dict[int, int] = {}
                    for v, e in exps.items():
                        per[v.factor] = per.get(v.factor, 0) + v.degree * e
                        if v.kind in (VarKind.Z, VarKind.THETA):
                            failures.append(f"{p}: {v} survives")
                    if any(dg != spec.n for dg in per.values()) or len(per) != s:
                        failures.append(f"{p}: factor degrees {per}")
        return cases
    return _run(6, "degree bookkeeping", 600.0, body)


def criterion_7() -> CheckResult:
    """Pruned and unpruned runs of criteria 2-4 give byte-identical results."""
    def dump(res) -> str:
        return json.dumps(res.to_json(), sort_keys=True)

    def body(failures):
        cases = 0
        jobs = list(_k2_specs(2)) + list(_k3_specs(3)) + \
            [(ProblemSpec(2, k, BundleSpec(1), parse_phi(t)), projective_space_table(2, [1]))
             for k, t in surface_cases()]
        for spec, table in jobs:
            cases += 1
            if dump(integrate_ghilb(spec, table)) != dump(integrate_ghilb(spec, table, prune=True)):
                failures.append(f"k={spec.k} n={spec.n} phi={spec.phi}")
        return cases
    return _run(7, "pruning neutrality", 670.0, body)


def criterion_8() -> CheckResult:
    def body(failures):
        cases = 0
        for d in (0, 1, 2):
            rep = series_coefficients(MultiplicativeClassSpec.segre(8), 2, BundleSpec(1), 4,
                                      projective_space_table(2, [d]))
            for co in rep.coefficients:
                cases += 1
                if not (co.symbolic_agreement and co.numeric_agreement):
                    failures.append(f"d={d} k={co.k}: direct {co.direct_value} "
                                    f"exp {co.exponential_value}")
        return cases
    return _run(8, "exponential formula", 300.0, body)


TEX_Q = {
    2: "1",
    3: "1",
    4: "2z_1+z_2-z_4",
    5: "(2z_1+z_2-z_5)(2z_1^2 +3z_1z_2-2z_1z_5+2z_2z_3-z_2z_4-z_2z_5-z_3z_4+z_4z_5)",
}


def tex_to_poly(text: str) -> MultiPoly:
    """Read a TeX-like form (implicit products, ``z_i``)."""
    import re
    s = text.replace(" ", "").replace("z_", "z")
    s = re.sub(r"(\d)(z)", r"\1*\2", s)
    s = re.sub(r"(z\d(?:\^\d)?)(?=z)", r"\1*", s)
    s = s.replace(")(", ")*(")
    return parse_poly(s)


def criterion_9() -> CheckResult:
    def body(failures):
        for j, text in TEX_Q.items():
            got = q_polynomial(j)
            want = tex_to_poly(text)
            if got != want or str(got) != str(want):
                failures.append(f"Q_{j}: {got} != {want}")
        return len(TEX_Q)
    return _run(9, "Q table", 1.0, body)


def criterion_10() -> CheckResult:
    def body(failures):
        cases = 0
        zz = z(0, 1)
        r = iterated_residue(RationalTerm(MultiPoly.one(), ((LinearForm.make({zz: 1}), 1),), (zz,)))
        cases += 1
        if r != MultiPoly.const(-1):
            failures.append(f"Res dz/z = {r}")
        for d in (1, 2, 3):
            zs = tuple(z(0, i) for i in range(1, d + 1))
            for extra in range(0, 3):
                for target in zs:
                    # z_target^extra / (z_1 ... z_d * z_target^extra) = 1 / prod z_i
                    num = MultiPoly.monomial({target: extra})
                    den = tuple((LinearForm.make({v: 1}), 1 + (extra if v == target else 0))
                                for v in zs)
                    term = RationalTerm(num, den, zs)
                    a = iterated_residue(term)
                    b = residue_by_full_expansion(term, 4)
                    cases += 1
                    if a != MultiPoly.const((-1) ** d) or b != a:
                        failures.append(f"d={d}: {a}, reference {b}")
                # off-by-one powers must vanish
                num = MultiPoly.monomial({zs[-1]: 1})
                den = tuple((LinearForm.make({v: 1}), 1) for v in zs)
                cases += 1
                if not iterated_residue(RationalTerm(num, den, zs)).is_zero():
                    failures.append(f"d={d}: z_d / prod z_i has nonzero residue")
        return cases
    return _run(10, "residue orientation", 1.0, body)


CRITERIA: Tuple[Callable[[], CheckResult], ...] = (
    criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
    criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
)


def run_all(select=None) -> List[CheckResult]:
    out = []
    for i, fn in enumerate(CRITERIA, start=1):
        if select is None or i in select:
            out.append(fn())
    return out

"""Tautological integrals over the geometric component of the Hilbert scheme of points.

For every set partition of ``{1..k}`` the integrand is a product of block kernels
(one per block, living on its own copy of ``X``) times ``Phi`` evaluated on the
twisted roots; the iterated residue of each partition term is a polynomial in
the classes of ``X^s`` whose ``(n, ..., n)`` part is integrated.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from math import factorial
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from .chern import (AsymmetryError, BundleSpec, ChernExpr,
                    phi_eval_on_roots, segre_from_chern, symmetric_reduce, twist_roots)
from .parse import names_with, parse_poly
from .poly import (DEFAULT_REGISTRY, LinearForm, MultiPoly, Registry, VarId, VarKind, cV, cX,
                   graded_part, lam, sX, substitute, theta, z)
from .residue import RationalTerm, iterated_residue, residue_with_pruning
from .setpart import SetPartition, enumerate_partitions


class SpecError(ValueError):
    """Invalid problem specification (CLI exit code 2)."""


class ConsistencyError(AssertionError):
    """An internal invariant failed (CLI exit code 3)."""


class Mode(str, Enum):
    MANIFOLD = "manifold"
    EQUIVARIANT = "equivariant"


# ---------------------------------------------------------------------------
# Q polynomials

_Q_TABLE = {
    1: "1",
    2: "1",
    3: "1",
    4: "2*z1+z2-z4",
    5: "(2*z1+z2-z5)*(2*z1^2+3*z1*z2-2*z1*z5+2*z2*z3-z2*z4-z2*z5-z3*z4+z4*z5)",
}


def q_source(j: int, overrides: Mapping[int, str] | None = None) -> str:
    if overrides and j in overrides:
        return overrides[j]
    if j in _Q_TABLE:
        return _Q_TABLE[j]
    raise SpecError(f"Q_{j} unknown; supply via --q-poly {j}=<polynomial in z1..z{j}>")


def q_polynomial(j: int, block: int = 0, overrides: Mapping[int, str] | None = None,
                 registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    """Borel multidegree ``Q_j`` in ``z[block,1..j]``."""
    if j < 0:
        raise SpecError("Q index must be nonnegative")
    if j == 0:
        return MultiPoly.one(registry)
    names = {f"z{i}": z(block, i) for i in range(1, j + 1)}
    p = parse_poly(q_source(j, overrides), registry, names_with(names))
    bad = [v for v in p.variables() if v.kind is not VarKind.Z or v.factor != block or v.index > j]
    if bad:
        raise SpecError(f"Q_{j} mentions {bad}")
    return p


# ---------------------------------------------------------------------------
# block kernels

def mixed_triples(d: int) -> List[Tuple[int, int, int]]:
    """``(i, j, q)`` with ``i <= j`` and ``i + j <= q <= d``."""
    return [(i, j, q) for q in range(1, d + 1) for i in range(1, q + 1)
            for j in range(i, q + 1) if i + j <= q]


@dataclass(frozen=True)
class BlockKernel:
    """Residue kernel of one block: ``numerator / prod(factors)`` in ``zs``."""

    numerator: MultiPoly
    factors: Tuple[Tuple[LinearForm, int], ...]
    zs: Tuple[VarId, ...]

    def term(self) -> RationalTerm:
        return RationalTerm(self.numerator, self.factors, self.zs)


def segre_series_inverse(n: int, factor: int, zv: VarId,
                         registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    """``s_X(1/z) = sum_{a<=n} s_a(X) z^-a`` on copy ``factor``."""
    out = MultiPoly.one(registry)
    for a in range(1, n + 1):
        out = out + MultiPoly.monomial({sX(factor, a): 1, zv: -a}, registry=registry)
    return out


CONVENTIONS = ("calibrated", "literal")


def block_factor(d: int, convention: str = "calibrated") -> int:
    """Scalar in front of a block kernel with ``d`` residue variables.

    ``literal`` is ``(-1)^d``; ``calibrated`` is ``d!``, the factor that makes the
    partition sum agree with torus localization on surfaces (see README).
    """
    if convention == "calibrated":
        return factorial(d)
    if convention == "literal":
        return (-1) ** d
    raise SpecError(f"unknown convention {convention!r}")


def block_integrand(block_size: int, n: int, mode: Mode = Mode.MANIFOLD, factor: int = 0,
                    lambdas: Sequence[MultiPoly] | None = None,
                    q_overrides: Mapping[int, str] | None = None,
                    convention: str = "calibrated", segre_order: int | None = None,
                    registry: Registry = DEFAULT_REGISTRY) -> BlockKernel:
    """Kernel for a block of ``block_size`` points on copy ``factor`` of ``X``.

    Manifold: ``factor * prod_{i<j}(z_i - z_j) Q_d prod s_X(1/z_i)`` over
    ``prod (z_i + z_j - z_q) * prod z_i^(n+1)``.
    Equivariant: with ``t_j`` the tangent weights of ``C^n`` at the origin, the
    Segre series and pure powers become ``z_i prod_j (z_i + t_j)`` in the
    denominator (the Chern-Weil preimage of ``z^(n+1) / s_X(1/z)``).  In terms of
    coordinate-function weights ``lambda_j = -t_j`` this is
    ``(-1)^n z_i prod_j (lambda_j - z_i)``.

    ``segre_order`` truncates the Segre series (default ``n``, exact on an
    ``n``-dimensional base).
    """
    if block_size < 1:
        raise SpecError("block size must be positive")
    d = block_size - 1
    zs = tuple(z(factor, i) for i in range(1, d + 1))
    if d == 0:
        return BlockKernel(MultiPoly.one(registry), (), ())
    zp = [MultiPoly.var(v, registry=registry) for v in zs]
    num = q_polynomial(d, factor, q_overrides, registry) * block_factor(d, convention)
    for i in range(d):
        for j in range(i + 1, d):
            num = num * (zp[i] - zp[j])
    factors: List[Tuple[LinearForm, int]] = []
    for i, j, q in mixed_triples(d):
        coeffs: Dict[VarId, Fraction] = {}
        for idx, a in ((i, 1), (j, 1), (q, -1)):
            coeffs[zs[idx - 1]] = coeffs.get(zs[idx - 1], 0) + a
        factors.append((LinearForm.make(coeffs), 1))
    if mode is Mode.MANIFOLD:
        for v in zs:
            num = num * segre_series_inverse(n if segre_order is None else segre_order,
                                             factor, v, registry)
            factors.append((LinearForm.make({v: 1}), n + 1))
    else:
        if lambdas is None:
            lambdas = [MultiPoly.var(lam(factor, j), registry=registry) for j in range(1, n + 1)]
        for v in zs:
            factors.append((LinearForm.make({v: 1}), 1))
            zv = MultiPoly.var(v, registry=registry)
            for tj in lambdas:
                factors.append((LinearForm.from_poly(zv + tj), 1))
    return BlockKernel(num, tuple(factors), zs)


# ---------------------------------------------------------------------------
# problem description and results

@dataclass(frozen=True)
class ProblemSpec:
    n: int
    k: int
    V: BundleSpec
    phi: ChernExpr
    mode: Mode = Mode.MANIFOLD
    X: BundleSpec | None = None  # tangent bundle; explicit weights in equivariant mode
    q_overrides: Tuple[Tuple[int, str], ...] = ()
    convention: str = "calibrated"
    segre_order: int | None = None

    def __post_init__(self):
        if self.n < 0 or self.k < 1:
            raise SpecError("need n >= 0 and k >= 1")
        # fail fast on a missing Q before any expansion work
        if self.k > 1:
            q_source(self.k - 1, dict(self.q_overrides))
        p = self.phi.expand()
        if self.phi.max_index > self.V.rank * self.k:
            raise SpecError(f"c{self.phi.max_index} exceeds rank {self.V.rank * self.k}")
        if self.mode is Mode.MANIFOLD and not p.is_zero() and p.degrees() != {self.n * self.k}:
            raise SpecError(f"Phi must be homogeneous of degree {self.n * self.k}, "
                            f"got degrees {sorted(p.degrees())}")
        if self.mode is Mode.MANIFOLD and not self.V.formal:
            raise SpecError("manifold mode needs a formal bundle")
        if self.convention not in CONVENTIONS:
            raise SpecError(f"unknown convention {self.convention!r}")
        if self.X is not None and self.X.rank != self.n:
            raise SpecError("tangent bundle must have rank n")

    @property
    def q_map(self) -> Dict[int, str]:
        return dict(self.q_overrides)

    def lambdas(self, factor: int, registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
        if self.X is not None and not self.X.formal:
            return list(self.X.weights)
        return [MultiPoly.var(lam(factor, j), registry=registry) for j in range(1, self.n + 1)]


@dataclass
class PartitionTerm:
    partition: SetPartition
    value: MultiPoly              # graded (n,...,n) part, free of z and theta
    raw: MultiPoly | None = None  # full residue output before grading
    integrand_degree: int | None = None


@dataclass
class UniversalIntegral:
    n: int
    k: int
    rank: int
    terms: List[PartitionTerm]
    ordered_total: Fraction | None = None
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def total(self) -> Fraction | None:
        """``int_{GHilb^k}``; the partition sum itself integrates over ordered points."""
        if self.ordered_total is None:
            return None
        return self.ordered_total / factorial(self.k)

    def polynomial(self) -> MultiPoly:
        out = MultiPoly.zero()
        for t in self.terms:
            out = out + t.value
        return out

    def chern_numbers(self, basis: str = "segre") -> Dict[Tuple, Fraction]:
        """The integral as a polynomial in Chern numbers ``int_X m`` of degree-n monomials.

        Keys are sorted tuples of per-factor monomial keys (see :func:`factor_monomials`).
        """
        acc: Dict[Tuple, Fraction] = {}
        for t in self.terms:
            p = t.value if basis == "segre" else segre_to_chern(t.value, self.n)
            for key, v in factor_monomials(p).items():
                acc[key] = acc.get(key, 0) + v
        return {k: v for k, v in acc.items() if v}

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "rank": self.rank,
            "per_partition": [{"partition": t.partition.to_json(),
                               "value": t.value.to_json()} for t in self.terms],
            "total": None if self.total is None else _fstr(self.total),
            "ordered_total": None if self.ordered_total is None else _fstr(self.ordered_total),
            "metadata": self.metadata,
        }


def _fstr(v: Fraction) -> str:
    v = Fraction(v)
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def factor_monomials(p: MultiPoly) -> Dict[Tuple, Fraction]:
    """Split each term into per-factor monomials with the factor label erased."""
    out: Dict[Tuple, Fraction] = {}
    for exps, v in p.items():
        per: Dict[int, list] = {}
        for var_, e in exps.items():
            per.setdefault(var_.factor, []).append((var_.kind.value, var_.index, e))
        key = tuple(sorted(tuple(sorted(m)) for m in per.values()))
        out[key] = out.get(key, 0) + v
    return out


def segre_to_chern(p: MultiPoly, n: int) -> MultiPoly:
    """Rewrite ``s_i(X)`` of every copy through ``c_j(X)`` of that copy."""
    factors = {v.factor for v in p.variables() if v.kind is VarKind.SX}
    bind = {}
    for f in factors:
        cs = [MultiPoly.var(cX(f, i), registry=p.registry) for i in range(1, n + 1)]
        s = segre_from_chern(cs, n, p.registry)
        for i in range(1, n + 1):
            bind[sX(f, i)] = s[i]
    return substitute(p, bind)


def relabel_factors(p: MultiPoly, mapping: Mapping[int, int]) -> MultiPoly:
    """Move every non-residue variable from factor ``f`` to ``mapping[f]``."""
    reg = p.registry
    slot_map = {}
    out = {}
    for m, v in p.terms.items():
        mono = []
        for s, e in m:
            t = slot_map.get(s)
            if t is None:
                var_ = reg.var(s)
                if var_.kind is VarKind.Z or var_.factor not in mapping:
                    t = s
                else:
                    t = reg.slot(VarId(var_.kind, mapping[var_.factor], var_.index))
                slot_map[s] = t
            mono.append((t, e))
        out[tuple(sorted(mono))] = v
    return MultiPoly(out, reg, _clean=True)


# ---------------------------------------------------------------------------
# intersection tables

class IntersectionTable:
    """``int_X`` of degree-n monomials in ``c_i(X)`` and ``c_j(V)`` (factor label 0)."""

    def __init__(self, n: int, values: Mapping[Tuple, Fraction], name: str = ""):
        self.n = n
        self.values = {k: Fraction(v) for k, v in values.items()}
        self.name = name

    @staticmethod
    def key(exps: Mapping[VarId, int]) -> Tuple:
        return tuple(sorted((v.kind.value, v.index, e) for v, e in exps.items()))

    def lookup(self, mono_key: Tuple) -> Fraction:
        if mono_key not in self.values:
            raise SpecError(f"intersection table {self.name!r} lacks monomial {mono_key}")
        return self.values[mono_key]

    def integrate(self, p: MultiPoly) -> Fraction:
        """Integrate a polynomial in the classes of ``X^s`` (Segre classes allowed)."""
        p = segre_to_chern(p, self.n)
        total = Fraction(0)
        for exps, v in p.items():
            per: Dict[int, list] = {}
            for var_, e in exps.items():
                if var_.kind not in (VarKind.CX, VarKind.CV):
                    raise SpecError(f"cannot integrate variable {var_}")
                per.setdefault(var_.factor, []).append((var_.kind.value, var_.index, e))
            for mono in per.values():
                if sum(i * e for _, i, e in mono) != self.n:
                    raise ConsistencyError("monomial of wrong degree reached integration")
            value = v
            for mono in per.values():
                value *= self.lookup(tuple(sorted(mono)))
            total += value
        return total

    def to_json(self) -> dict:
        def name(k):
            return "*".join(f"{'cX' if kind == VarKind.CX else 'cV'}{i}" + (f"^{e}" if e > 1 else "")
                            for kind, i, e in k) or "1"
        return {"n": self.n, "name": self.name,
                "values": {name(k): _fstr(v) for k, v in sorted(self.values.items())}}

    @classmethod
    def from_polynomials(cls, n: int, cx: Sequence[MultiPoly], cv: Sequence[MultiPoly],
                         integrate: Callable[[MultiPoly], Fraction], name: str = ""
                         ) -> "IntersectionTable":
        """Table from explicit class representatives in a ring with integration map."""
        values = {}
        gens = [(VarKind.CX.value, i + 1, p) for i, p in enumerate(cx)] + \
               [(VarKind.CV.value, i + 1, p) for i, p in enumerate(cv)]
        # all monomials of weighted degree n
        def rec(idx, remaining, acc, mono):
            if remaining == 0:
                values[tuple(sorted(mono))] = integrate(acc)
                return
            if idx == len(gens):
                return
            kind, deg, p = gens[idx]
            e = 0
            cur = acc
            while e * deg <= remaining:
                rec(idx + 1, remaining - e * deg, cur, mono + ([(kind, deg, e)] if e else []))
                e += 1
                cur = cur * p
        rec(0, n, MultiPoly.one(), [])
        return cls(n, values, name)


def projective_space_table(n: int, line_degrees: Sequence[int]) -> IntersectionTable:
    """``X = P^n`` and ``V`` a sum of line bundles ``O(a_i)``."""
    h = MultiPoly.var(VarId(VarKind.Q, 99, 1))  # hyperplane class stand-in
    one = MultiPoly.one()
    cx_total = (one + h) ** (n + 1)
    cv_total = one
    for a in line_degrees:
        cv_total = cv_total * (one + h * a)
    cx = [_degree_part(cx_total, h, i) for i in range(1, n + 1)]
    cv = [_degree_part(cv_total, h, i) for i in range(1, len(line_degrees) + 1)]

    def integrate(p):
        return _coeff_power(p, h, n)
    name = f"P{n}:O(" + ",".join(map(str, line_degrees)) + ")"
    return IntersectionTable.from_polynomials(n, cx, cv, integrate, name)


def p1xp1_table(bidegrees: Sequence[Tuple[int, int]]) -> IntersectionTable:
    """``X = P^1 x P^1`` and ``V`` a sum of ``O(a, b)``."""
    h1 = MultiPoly.var(VarId(VarKind.Q, 99, 1))
    h2 = MultiPoly.var(VarId(VarKind.Q, 99, 2))
    one = MultiPoly.one()
    cx_total = _trunc2((one + h1 * 2) * (one + h2 * 2), h1, h2)
    cv_total = one
    for a, b in bidegrees:
        cv_total = _trunc2(cv_total * (one + h1 * a + h2 * b), h1, h2)
    cx = [_bideg_part(cx_total, h1, h2, i) for i in (1, 2)]
    cv = [_bideg_part(cv_total, h1, h2, i) for i in range(1, len(bidegrees) + 1)]

    def integrate(p):
        p = _trunc2(p, h1, h2)
        from .poly import coefficient_of
        return coefficient_of(coefficient_of(p, VarId(VarKind.Q, 99, 1), 1),
                              VarId(VarKind.Q, 99, 2), 1).constant_term()
    name = "P1xP1:" + ",".join(f"O({a},{b})" for a, b in bidegrees)
    return IntersectionTable.from_polynomials(2, cx, cv, integrate, name)


def _degree_part(p: MultiPoly, h: MultiPoly, i: int) -> MultiPoly:
    (hv,) = h.variables()
    from .poly import coefficient_of
    return coefficient_of(p, hv, i) * (h ** i)


def _coeff_power(p: MultiPoly, h: MultiPoly, i: int) -> Fraction:
    (hv,) = h.variables()
    from .poly import coefficient_of
    return coefficient_of(p, hv, i).constant_term()


def _trunc2(p, h1, h2):
    (v1,), (v2,) = h1.variables(), h2.variables()
    out = {}
    for m, val in p.terms.items():
        ex = dict(m)
        s1, s2 = p.registry.slot(v1), p.registry.slot(v2)
        if ex.get(s1, 0) <= 1 and ex.get(s2, 0) <= 1:
            out[m] = val
    return MultiPoly(out, p.registry, _clean=True)


def _bideg_part(p, h1, h2, deg):
    (v1,), (v2,) = h1.variables(), h2.variables()
    s1, s2 = p.registry.slot(v1), p.registry.slot(v2)
    out = {m: val for m, val in p.terms.items()
           if dict(m).get(s1, 0) + dict(m).get(s2, 0) == deg}
    return MultiPoly(out, p.registry, _clean=True)


# ---------------------------------------------------------------------------
# assembly

TWIST = 1  # Chern roots of V(z) are theta + TWIST * z


def partition_roots(spec: ProblemSpec, partition: SetPartition,
                    registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
    roots: List[MultiPoly] = []
    for l, block in enumerate(partition.blocks, start=1):
        base = spec.V.roots(l, registry)
        roots.extend(base)
        for i in range(1, len(block)):
            roots.extend(twist_roots(base, MultiPoly.var(z(l, i), registry=registry) * TWIST))
    return roots


def partition_term(spec: ProblemSpec, partition: SetPartition,
                   registry: Registry = DEFAULT_REGISTRY) -> RationalTerm:
    """Assembled integrand ``Phi(...) * prod_l kernel_l`` for one partition."""
    num = phi_eval_on_roots(spec.phi, partition_roots(spec, partition, registry), registry)
    factors: List[Tuple[LinearForm, int]] = []
    zs: List[VarId] = []
    for l, block in enumerate(partition.blocks, start=1):
        lambdas = spec.lambdas(l, registry) if spec.mode is Mode.EQUIVARIANT else None
        kern = block_integrand(len(block), spec.n, spec.mode, l, lambdas, spec.q_map,
                               spec.convention, spec.segre_order, registry)
        num = num * kern.numerator
        factors.extend(kern.factors)
        zs.extend(kern.zs)
    return RationalTerm(num, tuple(factors), tuple(zs))


def integrand_degree(term: RationalTerm) -> int:
    degs = term.numerator.degrees()
    if len(degs) > 1:
        raise ConsistencyError(f"integrand numerator not homogeneous: degrees {sorted(degs)}")
    return (degs.pop() if degs else 0) - term.denominator_degree()


def evaluate_partition(spec: ProblemSpec, partition: SetPartition, prune: bool = False,
                       check: bool = True, registry: Registry = DEFAULT_REGISTRY) -> PartitionTerm:
    term = partition_term(spec, partition, registry)
    s = partition.size
    deg = None
    if check and not term.numerator.is_zero():
        deg = integrand_degree(term)
        expected = (spec.n + 1) * s - spec.k
        if spec.mode is Mode.MANIFOLD and deg != expected:
            raise ConsistencyError(f"partition {partition}: integrand degree {deg} != {expected}")
    raw = residue_with_pruning(term) if prune else iterated_residue(term)
    value = raw
    if spec.mode is Mode.MANIFOLD:
        if check and not raw.is_zero() and not raw.is_homogeneous(spec.n * s):
            raise ConsistencyError(f"partition {partition}: residue not homogeneous of "
                                   f"degree {spec.n * s}: {sorted(raw.degrees())}")
        try:
            for l in range(1, s + 1):
                block = [theta(l, j) for j in range(1, spec.V.rank + 1)]
                targets = [cV(l, i) for i in range(1, spec.V.rank + 1)]
                value = symmetric_reduce(value, block, targets, check=check)
        except AsymmetryError as exc:
            raise ConsistencyError(f"partition {partition}: {exc}") from exc
        value = graded_part(value, {l: spec.n for l in range(1, s + 1)})
    return PartitionTerm(partition, value, raw, deg)


def _workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, workers)
    env = os.environ.get("TAUTRES_THREADS")
    return max(1, int(env)) if env else 1


def _shape_key(partition: SetPartition) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Descending block sizes and the permutation sorting the blocks that way."""
    order = sorted(range(partition.size), key=lambda i: -len(partition.blocks[i]))
    return tuple(len(partition.blocks[i]) for i in order), tuple(order)


def integrate_ghilb(spec: ProblemSpec, table: IntersectionTable | None = None,
                    prune: bool = False, check: bool = True, workers: int | None = None,
                    registry: Registry = DEFAULT_REGISTRY) -> UniversalIntegral:
    """Sum over set partitions of the iterated residues (manifold mode)."""
    if spec.mode is not Mode.MANIFOLD:
        raise SpecError("integrate_ghilb needs manifold mode")
    partitions = enumerate_partitions(spec.k)
    shapes: Dict[Tuple[int, ...], SetPartition] = {}
    for p in partitions:
        sizes, _ = _shape_key(p)
        if sizes not in shapes:
            blocks, start = [], 1
            for m in sizes:
                blocks.append(tuple(range(start, start + m)))
                start += m
            shapes[sizes] = SetPartition(tuple(blocks), spec.k)

    def run(rep: SetPartition) -> PartitionTerm:
        return evaluate_partition(spec, rep, prune, check, registry)

    reps = list(shapes.values())
    width = _workers(workers)
    if width > 1:
        with ThreadPoolExecutor(width) as pool:
            results = list(pool.map(run, reps))
    else:
        results = [run(r) for r in reps]
    by_shape = dict(zip(shapes.keys(), results))
    terms = []
    for p in partitions:
        sizes, order = _shape_key(p)
        rep = by_shape[sizes]
        # factor i of the representative is block order[i-1] of p
        mapping = {i + 1: order[i] + 1 for i in range(len(order))}
        value = relabel_factors(rep.value, mapping)
        raw = relabel_factors(rep.raw, mapping) if rep.raw is not None else None
        terms.append(PartitionTerm(p, value, raw, rep.integrand_degree))
    result = UniversalIntegral(spec.n, spec.k, spec.V.rank, terms,
                               metadata={"normalization": "ordered",
                                         "convention": spec.convention,
                                         "twist": TWIST,
                                         "q_overrides": spec.q_map})
    if table is not None:
        result.ordered_total = sum((table.integrate(t.value) for t in terms), Fraction(0))
    return result


@dataclass
class EquivariantIntegral:
    """``sum_alpha P_alpha / e^s`` where ``e`` is the product of the torus weights."""

    k: int
    per_partition: List[Tuple[SetPartition, MultiPoly]]
    euler: MultiPoly
    value: object  # RatFun, ordered normalization
    metadata: Dict[str, object] = field(default_factory=dict)

    @property
    def unordered(self):
        return self.value * Fraction(1, factorial(self.k))

    def to_json(self) -> dict:
        r = self.unordered.reduce()
        return {
            "k": self.k,
            "euler": str(self.euler),
            "per_partition": [{"partition": p.to_json(), "numerator": v.to_json()}
                              for p, v in self.per_partition],
            "value": {"numerator": r.num.to_json(),
                      "denominator": [{"factor": str(f), "mult": m} for f, m in sorted(
                          r.den.items(), key=lambda fm: str(fm[0]))]},
            "metadata": self.metadata,
        }


def integrate_equivariant(spec: ProblemSpec, prune: bool = False, check: bool = True,
                          workers: int | None = None,
                          registry: Registry = DEFAULT_REGISTRY) -> EquivariantIntegral:
    """Equivariant integral over ``GHilb^k(C^n)`` by the residue sum.

    ``V`` carries explicit weights (the same on every copy of ``C^n``), the
    tangent weights are ``spec.X.weights`` or formal ``lambda`` variables, and
    ``int_{C^n}`` of a class is its value at the origin over the Euler class.
    Without the pure ``z^(n+1)`` powers of the manifold kernel the denominator
    is ``z_i prod_j (lambda_j - z_i)``; its expansion at infinity supplies the
    missing ``n`` powers, so the two formulas match under Chern-Weil.
    """
    from .ratfun import RatFun
    if spec.mode is not Mode.EQUIVARIANT:
        raise SpecError("integrate_equivariant needs equivariant mode")
    if spec.V.formal:
        raise SpecError("equivariant mode needs explicit weights for V")
    partitions = enumerate_partitions(spec.k)
    lambdas = spec.lambdas(0, registry)
    euler = MultiPoly.one(registry)
    for w in lambdas:
        euler = euler * w

    def run(p: SetPartition) -> MultiPoly:
        term = partition_term(spec, p, registry)
        return residue_with_pruning(term) if prune else iterated_residue(term)

    width = _workers(workers)
    if width > 1:
        with ThreadPoolExecutor(width) as pool:
            values = list(pool.map(run, partitions))
    else:
        values = [run(p) for p in partitions]
    total = RatFun.zero(registry)
    for p, v in zip(partitions, values):
        if check and any(x.kind is VarKind.Z for x in v.variables()):
            raise ConsistencyError(f"partition {p}: residue still depends on z")
        total = total + _over_euler_power(v, lambdas, p.size)
    return EquivariantIntegral(spec.k, list(zip(partitions, values)), euler, total.reduce(),
                               metadata={"normalization": "ordered",
                                         "convention": spec.convention,
                                         "z_power": 1})


def _over_euler_power(v: MultiPoly, lambdas: Sequence[MultiPoly], s: int):
    from .ratfun import RatFun
    return RatFun.from_factors(v, [w for w in lambdas for _ in range(s)])


def chern_weil(raw: MultiPoly, tangent: Sequence[MultiPoly], v_weights: Sequence[MultiPoly],
               factors: int, order: int) -> MultiPoly:
    """Replace ``s_a(X)`` of every copy by the Segre classes of ``tangent`` and the
    roots ``theta`` of every copy by ``v_weights``."""
    from .chern import elementary_symmetric
    e = elementary_symmetric(tangent)
    seg = segre_from_chern(e[1:], order)
    bind = {}
    for f in range(1, factors + 1):
        for a in range(1, order + 1):
            bind[sX(f, a)] = seg[a]
        for j, w in enumerate(v_weights, start=1):
            bind[theta(f, j)] = w
    return substitute(raw, bind)


# ---------------------------------------------------------------------------
# closed forms for two and three points

def _finish(spec: ProblemSpec, value: MultiPoly, factors: int) -> MultiPoly:
    for l in range(1, factors + 1):
        block = [theta(l, j) for j in range(1, spec.V.rank + 1)]
        targets = [cV(l, i) for i in range(1, spec.V.rank + 1)]
        value = symmetric_reduce(value, block, targets)
    return graded_part(value, {l: spec.n for l in range(1, factors + 1)})


def _theta_roots(spec: ProblemSpec, factor: int) -> List[MultiPoly]:
    return [MultiPoly.var(theta(factor, j)) for j in range(1, spec.V.rank + 1)]


def _one_point_kernel(n: int, zv: VarId, factor: int) -> Tuple[MultiPoly, List[Tuple[LinearForm, int]]]:
    """``s_X(1/z) / z^(n+1)`` on copy ``factor``."""
    return segre_series_inverse(n, factor, zv), [(LinearForm.make({zv: 1}), n + 1)]


def closed_form_k2(spec: ProblemSpec, table: IntersectionTable | None = None) -> UniversalIntegral:
    """``int_X Res Phi(V + V(z)) s_X(1/z) dz / z^(n+1) + int_{X x X} Phi(V_1 + V_2)``."""
    if spec.k != 2 or spec.mode is not Mode.MANIFOLD:
        raise SpecError("closed_form_k2 needs k = 2 in manifold mode")
    th1, th2 = _theta_roots(spec, 1), _theta_roots(spec, 2)
    zv = z(1, 1)
    zp = MultiPoly.var(zv)
    seg, den = _one_point_kernel(spec.n, zv, 1)
    num = phi_eval_on_roots(spec.phi, th1 + [t + zp for t in th1]) * seg
    deep = _finish(spec, iterated_residue(RationalTerm(num, tuple(den), (zv,))), 1)
    prod_term = _finish(spec, phi_eval_on_roots(spec.phi, th1 + th2), 2)
    terms = [PartitionTerm(SetPartition(((1, 2),), 2), deep),
             PartitionTerm(SetPartition(((1,), (2,)), 2), prod_term)]
    return _closed_result(spec, terms, table, {"formula": "k=2"})


def closed_form_k3(spec: ProblemSpec, table: IntersectionTable | None = None,
                   deepest_coefficient: int = 2) -> UniversalIntegral:
    """Three-term formula for ``k = 3``.

    Deepest term ``Res Res Phi(V + V(z1) + V(z2)) (z1 - z2) s_X(1/z1) s_X(1/z2)
    / ((z1 z2)^(n+1) (2 z1 - z2))`` times ``deepest_coefficient``, three mixed
    terms (one per choice of the isolated point) and the product term.  The
    coefficient 2 is the one torus localization demands; pass 1 for the
    uncorrected shape.
    """
    if spec.k != 3 or spec.mode is not Mode.MANIFOLD:
        raise SpecError("closed_form_k3 needs k = 3 in manifold mode")
    n = spec.n
    th = [_theta_roots(spec, f) for f in (1, 2, 3)]
    z1, z2 = z(1, 1), z(1, 2)
    p1, p2 = MultiPoly.var(z1), MultiPoly.var(z2)
    s1, _ = _one_point_kernel(n, z1, 1)
    s2, _ = _one_point_kernel(n, z2, 1)
    roots = th[0] + [t + p1 for t in th[0]] + [t + p2 for t in th[0]]
    num = phi_eval_on_roots(spec.phi, roots) * (p1 - p2) * s1 * s2 * deepest_coefficient
    den = ((LinearForm.make({z1: 1}), n + 1), (LinearForm.make({z2: 1}), n + 1),
           (LinearForm.make({z1: 2, z2: -1}), 1))
    deep = _finish(spec, iterated_residue(RationalTerm(num, den, (z1, z2))), 1)
    terms = [PartitionTerm(SetPartition(((1, 2, 3),), 3), deep)]
    # mixed: the pair lives on copy 1, the isolated point on copy 2
    zv = z(1, 1)
    seg, dz = _one_point_kernel(n, zv, 1)
    mixed_num = phi_eval_on_roots(spec.phi, th[0] + [t + p1 for t in th[0]] + th[1]) * seg
    mixed = _finish(spec, iterated_residue(RationalTerm(mixed_num, tuple(dz), (zv,))), 2)
    for single in (3, 2, 1):
        pair = tuple(i for i in (1, 2, 3) if i != single)
        part = SetPartition.of([pair, (single,)])
        # copy 1 carries the block containing the smaller label
        mapping = {1: 1, 2: 2} if part.blocks[0] == pair else {1: 2, 2: 1}
        terms.append(PartitionTerm(part, relabel_factors(mixed, mapping)))
    prod_term = _finish(spec, phi_eval_on_roots(spec.phi, th[0] + th[1] + th[2]), 3)
    terms.append(PartitionTerm(SetPartition(((1,), (2,), (3,)), 3), prod_term))
    terms.sort(key=lambda t: _partition_rank(t.partition))
    return _closed_result(spec, terms, table,
                          {"formula": "k=3", "deepest_coefficient": deepest_coefficient})


def _partition_rank(p: SetPartition) -> int:
    return [q.blocks for q in enumerate_partitions(p.k)].index(p.blocks)


def _closed_result(spec, terms, table, meta) -> UniversalIntegral:
    result = UniversalIntegral(spec.n, spec.k, spec.V.rank, terms,
                               metadata={"normalization": "ordered", **meta})
    if table is not None:
        result.ordered_total = sum((table.integrate(t.value) for t in terms), Fraction(0))
    return result


# ---------------------------------------------------------------------------
# positivity experiment

def monomial_label(key: Tuple) -> str:
    """``[s1^2*cV1][s2]`` style label for a Chern-number product key."""
    names = {VarKind.SX.value: "s", VarKind.CX.value: "cX", VarKind.CV.value: "cV"}
    parts = []
    for mono in key:
        txt = "*".join(f"{names[kind]}{i}" + (f"^{e}" if e > 1 else "") for kind, i, e in mono)
        parts.append(f"[{txt or '1'}]")
    return "".join(parts)


def positivity_rows(spec: ProblemSpec, phi_text: str | None = None) -> List[dict]:
    """Coefficients of the (unordered) universal polynomial in Chern numbers
    of ``c(V)`` and ``s(X)``, one row per monomial."""
    result = integrate_ghilb(spec)
    numbers = result.chern_numbers("segre")
    rows = []
    for key in sorted(numbers, key=monomial_label):
        v = numbers[key] / factorial(spec.k)
        rows.append({"n": spec.n, "k": spec.k, "r": spec.V.rank,
                     "phi": phi_text if phi_text is not None else str(spec.phi),
                     "monomial": monomial_label(key), "coefficient": _fstr(v),
                     "sign": (v > 0) - (v < 0)})
    return rows


def chern_monomials(degree: int, max_index: int) -> List[str]:
    """All monomials ``c_{i1} ... c_{im}`` of the given weighted degree."""
    out = []

    def rec(remaining, largest, acc):
        if remaining == 0:
            out.append("*".join(acc) if acc else "1")
            return
        for i in range(min(largest, remaining), 0, -1):
            rec(remaining - i, i, acc + [f"c{i}"])
    rec(degree, max_index, [])
    return out


def positivity_scan(ns: Sequence[int], ks: Sequence[int], rs: Sequence[int],
                    phis: Sequence[str] | None = None, limit: int | None = None) -> dict:
    """Run :func:`positivity_rows` over a range; Chern monomials of ``V^[k]`` by default."""
    from .chern import parse_phi
    rows, candidates = [], []
    for n in ns:
        for k in ks:
            for r in rs:
                pool = list(phis) if phis else chern_monomials(n * k, r * k)
                if limit is not None:
                    pool = pool[:limit]
                for text in pool:
                    spec = ProblemSpec(n, k, BundleSpec(r), parse_phi(text))
                    for row in positivity_rows(spec, text):
                        rows.append(row)
                        if row["sign"] < 0:
                            candidates.append(row)
    return {"rows": rows, "negative": candidates}

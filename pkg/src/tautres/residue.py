"""Iterated residues at infinity of rational terms with linear denominators.

The contour is ``|z_1| << |z_2| << ... << |z_d|`` and the orientation makes
``Res dz_1..dz_d / (z_1 ... z_d) = (-1)^d``.  Each ``1/omega`` is expanded in
powers of its highest-ranked residue variable, and the coefficient of
``z_1^-1 ... z_d^-1`` is read off, eliminating ``z_d`` first.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import permutations
from typing import Dict, List, Sequence, Tuple

from .poly import (DEFAULT_REGISTRY, LinearForm, MultiPoly, Registry, VarId, VarKind,
                   split_by)


class TruncationError(RuntimeError):
    pass


class MalformedTerm(ValueError):
    pass


@dataclass(frozen=True)
class RationalTerm:
    """``numerator / prod(factor**mult)`` integrated over the residue variables ``z_order``."""

    numerator: MultiPoly
    factors: Tuple[Tuple[LinearForm, int], ...]
    z_order: Tuple[VarId, ...]

    def __post_init__(self):
        zs = set(self.z_order)
        if len(zs) != len(self.z_order):
            raise MalformedTerm("repeated residue variable")
        for v in zs:
            if v.kind is not VarKind.Z:
                raise MalformedTerm(f"{v} is not a residue variable")
        for form, mult in self.factors:
            if mult < 1:
                raise MalformedTerm("multiplicities must be positive")
            if not any(v.kind is VarKind.Z for v, _ in form.coeffs):
                raise MalformedTerm(f"denominator factor {form} has no residue variable")
            for v, _ in form.coeffs:
                if v.kind is VarKind.Z and v not in zs:
                    raise MalformedTerm(f"{v} missing from z_order")
        for v in self.numerator.variables():
            if v.kind is VarKind.Z and v not in zs:
                raise MalformedTerm(f"{v} missing from z_order")

    @property
    def rank(self) -> Dict[VarId, int]:
        return {v: i for i, v in enumerate(self.z_order)}

    def denominator_degree(self) -> int:
        return sum(m for _, m in self.factors)

    def scaled(self, a) -> "RationalTerm":
        return RationalTerm(self.numerator * a, self.factors, self.z_order)

    def to_json(self) -> dict:
        return {
            "numerator": self.numerator.to_json(),
            "factors": [{"form": str(f), "mult": m} for f, m in self.factors],
            "z_order": [v.name for v in self.z_order],
        }

    @classmethod
    def from_json(cls, data: dict, registry: Registry = DEFAULT_REGISTRY) -> "RationalTerm":
        from .parse import parse_poly
        num = data["numerator"]
        numerator = (MultiPoly.from_json(num, registry) if isinstance(num, list)
                     else parse_poly(str(num), registry))
        factors = []
        for f in data.get("factors", []):
            form = f["form"]
            p = parse_poly(form, registry) if isinstance(form, str) else MultiPoly.from_json(form, registry)
            factors.append((LinearForm.from_poly(p), int(f.get("mult", 1))))
        z_order = tuple(VarId.parse(s) if "[" in s else parse_poly(s, registry).variables().pop()
                        for s in data["z_order"])
        return cls(numerator, tuple(factors), z_order)


@dataclass
class ResidueReport:
    value: MultiPoly
    truncation: Dict[VarId, int] = field(default_factory=dict)


def _min_exponent(p: MultiPoly, v: VarId) -> int:
    return min(split_by(p, v))


def iterated_residue(term: RationalTerm, report: bool = False):
    """Exact iterated residue at infinity; a polynomial free of the residue variables."""
    reg = term.numerator.registry
    rank = term.rank
    d = len(term.z_order)
    by_top: Dict[VarId, List[Tuple[LinearForm, int]]] = {v: [] for v in term.z_order}
    for form, mult in term.factors:
        top, _ = form.top(rank)
        by_top[top].append((form, mult))
    current = term.numerator
    bounds: Dict[VarId, int] = {}
    for zq in reversed(term.z_order):
        current, bound = _eliminate(current, zq, by_top[zq], rank, reg)
        bounds[zq] = bound
        if current.is_zero():
            break
    value = current * (-1) ** d
    if report:
        return ResidueReport(value, bounds)
    return value


def _eliminate(num: MultiPoly, zq: VarId, forms: List[Tuple[LinearForm, int]],
               rank: Dict[VarId, int], reg: Registry) -> Tuple[MultiPoly, int]:
    """Coefficient of ``zq^-1`` in ``num / prod(forms)`` expanded around ``zq = infinity``."""
    shift = 0
    scale = Fraction(1)
    mixed: List[Tuple[Fraction, MultiPoly]] = []
    for form, mult in forms:
        top, a = form.top(rank)
        if form.is_monomial():
            shift += mult
            scale /= a ** mult
            continue
        rest = MultiPoly.const(form.constant, reg)
        for v, b in form.coeffs:
            if v != top:
                rest = rest + MultiPoly.var(v, coeff=b, registry=reg)
        mixed.extend([(a, rest)] * mult)
    groups = split_by(num, zq)
    # exponent of zq after dividing by the pure powers
    series: Dict[int, MultiPoly] = {e - shift: p * scale for e, p in groups.items()
                                    if not p.is_zero()}
    if not series:
        return MultiPoly.zero(reg), -1
    copies = len(mixed)
    top_exp = max(series)
    bound = max(top_exp + 1 - copies, -1)
    if bound < 0:
        return MultiPoly.zero(reg), bound
    remaining = copies
    for a, rest in mixed:
        remaining -= 1
        floor = remaining - 1  # lowest exponent that can still reach -1
        top_now = max(series)
        jmax = top_now - 1 - floor
        if jmax < 0:
            return MultiPoly.zero(reg), bound
        inv_a = Fraction(1) / a
        coeffs = []
        power = MultiPoly.one(reg)
        for j in range(jmax + 1):
            coeffs.append(power * ((-1) ** j * inv_a ** (j + 1)))
            if rest.is_zero():
                break
            if j < jmax:
                power = power * rest
        nxt: Dict[int, MultiPoly] = {}
        for e, p in series.items():
            for j, cj in enumerate(coeffs):
                ne = e - j - 1
                if ne < floor:
                    break
                prod = p * cj
                if ne in nxt:
                    nxt[ne] = nxt[ne] + prod
                else:
                    nxt[ne] = prod
        series = {e: p for e, p in nxt.items() if not p.is_zero()}
        if not series:
            return MultiPoly.zero(reg), bound
    return series.get(-1, MultiPoly.zero(reg)), bound


def residue_by_full_expansion(term: RationalTerm, truncation: int) -> MultiPoly:
    """Reference path: expand every factor to a fixed order, multiply everything,
    then take the coefficient of ``prod z_i^-1`` times ``(-1)^d``.

    Exact whenever ``truncation`` is large enough; used to cross-check
    :func:`iterated_residue`.
    """
    from .poly import coefficient_of, expand_inverse_linear
    reg = term.numerator.registry
    rank = term.rank
    total = term.numerator
    for form, mult in term.factors:
        inv = expand_inverse_linear(form, rank, truncation, reg)
        for _ in range(mult):
            total = total * inv
    for v in reversed(term.z_order):
        total = coefficient_of(total, v, -1)
    return total * (-1) ** len(term.z_order)


# ---------------------------------------------------------------------------
# vanishing criterion

def _top_index(form: LinearForm, rank: Dict[VarId, int]) -> int:
    return rank[form.top(rank)[0]]


def vanishing_precheck(term: RationalTerm) -> bool:
    """True only when the residue is provably zero by a degree count.

    For a tail ``z_l, ..., z_d`` of the contour order, rescaling those variables
    by ``t`` keeps the contour admissible; if numerator degree in the tail plus
    the number of tail variables is below the number of denominator factors
    touching the tail, the integral decays in ``t`` and therefore vanishes.
    The single-variable condition with every ``z_l`` factor dominated by ``z_l``
    is the case ``l = d``.
    """
    d = len(term.z_order)
    num = term.numerator
    if num.is_zero():
        return True
    reg = num.registry
    for l in range(d):
        tail = set(term.z_order[l:])
        tail_slots = {reg.slot(v) for v in tail}
        pdeg = max(sum(e for s, e in m if s in tail_slots) for m in num.terms)
        touching = sum(mult for form, mult in term.factors
                       if any(v in tail for v, _ in form.coeffs))
        if pdeg + len(tail) < touching:
            return True
    return False


def residue_with_pruning(term: RationalTerm) -> MultiPoly:
    """Split the numerator by residue-variable monomial, drop provably vanishing pieces,
    evaluate the rest."""
    reg = term.numerator.registry
    zslots = {reg.slot(v) for v in term.z_order}
    groups: Dict[tuple, dict] = {}
    for m, v in term.numerator.terms.items():
        key = tuple((s, e) for s, e in m if s in zslots)
        groups.setdefault(key, {})[m] = v
    out = MultiPoly.zero(reg)
    kept: Dict[tuple, dict] = {}
    for key, terms in groups.items():
        piece = RationalTerm(MultiPoly(terms, reg, _clean=True), term.factors, term.z_order)
        if vanishing_precheck(piece):
            continue
        kept.update(terms)
    if not kept:
        return out
    return iterated_residue(RationalTerm(MultiPoly(kept, reg, _clean=True), term.factors,
                                         term.z_order))


# ---------------------------------------------------------------------------
# flag localisation versus residue

def flag_sum_to_residue_check(Q: MultiPoly, lambdas: Sequence[MultiPoly], d: int,
                              zvars: Sequence[VarId] | None = None):
    """Both sides of the flag-manifold localisation identity.

    Left: sum over injections ``sigma: {1..d} -> {1..m}`` of
    ``Q(lambda_sigma) / prod_{j<=d} prod_{i>j} (lambda_{sigma i} - lambda_{sigma j})``,
    where ``sigma`` is extended to a permutation by listing the unused indices.
    Right: ``Res prod_{i<j}(z_i - z_j) Q(z) dz / prod_i prod_j (lambda_j - z_i)``.

    Returns ``(left, right)`` with ``left`` as a :class:`~tautres.ratfun.RatFun`.
    """
    from .poly import substitute
    from .ratfun import RatFun
    m = len(lambdas)
    if d > m:
        raise ValueError("d must not exceed the number of weights")
    reg = Q.registry
    if zvars is None:
        zvars = [VarId(VarKind.Z, 0, i) for i in range(1, d + 1)]
    zpolys = [MultiPoly.var(v, registry=reg) for v in zvars]
    left = RatFun.zero(reg)
    for chosen in permutations(range(m), d):
        rest = [i for i in range(m) if i not in chosen]
        order = list(chosen) + rest
        num = substitute(Q, {zvars[i]: lambdas[chosen[i]] for i in range(d)})
        den = []
        for j in range(d):
            for i in range(j + 1, m):
                den.append(lambdas[order[i]] - lambdas[order[j]])
        left = left + RatFun.from_factors(num, den)
    numerator = Q
    for i in range(d):
        for j in range(i + 1, d):
            numerator = numerator * (zpolys[i] - zpolys[j])
    factors = []
    for i in range(d):
        for lj in lambdas:
            factors.append((LinearForm.from_poly(lj - zpolys[i]), 1))
    right = iterated_residue(RationalTerm(numerator, tuple(factors), tuple(zvars)))
    return left, right

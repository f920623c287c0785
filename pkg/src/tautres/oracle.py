"""Torus localization on Hilbert schemes of points of toric surfaces.

Fixed points of ``Hilb^k`` of a toric surface are tuples of monomial ideals,
one per torus fixed point of the surface, with total colength ``k``.  A
monomial ideal is recorded by its Young diagram; ``parts[i]`` is the length of
row ``i`` (the monomials ``x^a y^i`` with ``a < parts[i]``).

Weights are additive characters.  ``l1, l2`` are the tangent weights of the
surface at a fixed point; the function ``x^a y^b`` then has weight
``-(a l1 + b l2)``.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import factorial
from typing import Dict, Iterator, List, Sequence, Tuple

from .chern import ChernExpr, phi_eval_on_roots
from .poly import DEFAULT_REGISTRY, MultiPoly, VarKind, lam, theta
from .ratfun import RatFun
from .setpart import integer_partitions


class OracleError(ArithmeticError):
    pass


@dataclass(frozen=True)
class YoungDiagram:
    parts: Tuple[int, ...]

    def __post_init__(self):
        if any(p <= 0 for p in self.parts) or list(self.parts) != sorted(self.parts, reverse=True):
            raise ValueError(f"{self.parts} is not a partition")

    @property
    def size(self) -> int:
        return sum(self.parts)

    def boxes(self) -> List[Tuple[int, int]]:
        return [(a, b) for b, row in enumerate(self.parts) for a in range(row)]

    def __contains__(self, box) -> bool:
        a, b = box
        return a >= 0 and 0 <= b < len(self.parts) and a < self.parts[b]

    def transpose(self) -> "YoungDiagram":
        if not self.parts:
            return self
        return YoungDiagram(tuple(sum(1 for p in self.parts if p > a) for a in range(self.parts[0])))

    def arm(self, box) -> int:
        a, b = box
        return self.parts[b] - a - 1

    def leg(self, box) -> int:
        a, b = box
        return sum(1 for p in self.parts[b + 1:] if p > a)

    def generators(self) -> List[Tuple[int, int]]:
        """Exponents of the minimal monomial generators of the ideal."""
        rows = list(self.parts) + [0]
        gens = []
        for b in range(len(rows)):
            if b == 0 or rows[b] < rows[b - 1]:
                gens.append((rows[b], b))
        return gens


def hilb_fixed_points(k: int) -> List[YoungDiagram]:
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return [YoungDiagram(())]
    return [YoungDiagram(p) for p in integer_partitions(k)]


def tangent_weights(mu: YoungDiagram, l1, l2) -> list:
    """Arm/leg weights of ``T_I Hilb^k(C^2)``, two per box."""
    out = []
    for box in mu.boxes():
        a, l = mu.arm(box), mu.leg(box)
        out.append(l1 * (a + 1) - l2 * l)
        out.append(-l1 * a + l2 * (l + 1))
    return out


def tangent_shifts_bruteforce(mu: YoungDiagram) -> List[Tuple[int, int]]:
    """Degree shifts of a basis of ``Hom_R(I, R/I)`` computed by linear algebra.

    A homogeneous homomorphism of shift ``s`` sends generator ``g`` to
    ``c_g x^(g+s)``; two generators impose ``c_1 = c_2`` (or ``c_i = 0``) whenever
    the shifted least common multiple survives in ``R/I``.
    """
    gens = mu.generators()
    k = mu.size
    out = []
    for s in product(range(-k - 1, k + 2), repeat=2):
        alive = [(g[0] + s[0], g[1] + s[1]) in mu for g in gens]
        idx = [i for i, a in enumerate(alive) if a]
        if not idx:
            continue
        rows = []
        for i in range(len(gens)):
            for j in range(i + 1, len(gens)):
                lcm = (max(gens[i][0], gens[j][0]), max(gens[i][1], gens[j][1]))
                if (lcm[0] + s[0], lcm[1] + s[1]) not in mu:
                    continue
                row = {}
                if alive[i]:
                    row[i] = row.get(i, 0) + 1
                if alive[j]:
                    row[j] = row.get(j, 0) - 1
                if row:
                    rows.append(row)
        dim = len(idx) - _rank(rows, idx)
        out.extend([s] * dim)
    return out


def _rank(rows: List[Dict[int, int]], cols: List[int]) -> int:
    m = [[Fraction(r.get(c, 0)) for c in cols] for r in rows]
    rank = 0
    for col in range(len(cols)):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col] / m[rank][col]
                m[i] = [x - f * y for x, y in zip(m[i], m[rank])]
        rank += 1
    return rank


def taut_weights(mu: YoungDiagram, l1, l2, v_weights: Sequence) -> list:
    """Weights of ``V^[k]`` at the fixed point: ``theta_t - a l1 - b l2`` per box ``(a, b)``."""
    return [t - l1 * a - l2 * b for (a, b) in mu.boxes() for t in v_weights]


# ---------------------------------------------------------------------------
# surfaces

@dataclass(frozen=True)
class FixedPoint:
    l1: object
    l2: object
    v_weights: Tuple[object, ...]


@dataclass(frozen=True)
class ToricSurfaceChart:
    name: str
    points: Tuple[FixedPoint, ...]
    compact: bool = True


def p2_chart(line_degrees: Sequence[int], w: Sequence = None) -> ToricSurfaceChart:
    """``P^2`` with torus weights ``w`` on ``C^3`` and ``V = sum O(a)``."""
    if w is None:
        w = [MultiPoly.var(lam(0, i)) for i in (1, 2, 3)]
    pts = []
    for i in range(3):
        j1, j2 = [j for j in range(3) if j != i]
        pts.append(FixedPoint(w[j1] - w[i], w[j2] - w[i], tuple(w[i] * (-a) for a in line_degrees)))
    return ToricSurfaceChart("p2", tuple(pts))


def p1xp1_chart(bidegrees: Sequence[Tuple[int, int]], u: Sequence = None,
                v: Sequence = None) -> ToricSurfaceChart:
    if u is None:
        u = [MultiPoly.var(lam(0, i)) for i in (1, 2)]
    if v is None:
        v = [MultiPoly.var(lam(0, i)) for i in (3, 4)]
    pts = []
    for i, j in product(range(2), repeat=2):
        pts.append(FixedPoint(u[1 - i] - u[i], v[1 - j] - v[j],
                              tuple(u[i] * (-a) + v[j] * (-b) for a, b in bidegrees)))
    return ToricSurfaceChart("p1xp1", tuple(pts))


def affine_chart(rank: int, l1=None, l2=None, v_weights=None) -> ToricSurfaceChart:
    if l1 is None:
        l1 = MultiPoly.var(lam(0, 1))
    if l2 is None:
        l2 = MultiPoly.var(lam(0, 2))
    if v_weights is None:
        v_weights = [MultiPoly.var(theta(1, j)) for j in range(1, rank + 1)]
    return ToricSurfaceChart("affine", (FixedPoint(l1, l2, tuple(v_weights)),), compact=False)


def distributions(k: int, npoints: int) -> Iterator[Tuple[YoungDiagram, ...]]:
    """Tuples of diagrams, one per surface fixed point, with total size ``k``."""
    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in comps(total - first, parts - 1):
                yield (first,) + rest
    for sizes in comps(k, npoints):
        for diagrams in product(*(hilb_fixed_points(s) for s in sizes)):
            yield diagrams


@dataclass
class OracleResult:
    value: object              # Fraction (numeric) or RatFun (symbolic)
    fixed_point_count: int
    contributions: List[Tuple[Tuple[Tuple[int, ...], ...], object]]
    normalization: str


def ab_integrate(surface: ToricSurfaceChart, k: int, phi: ChernExpr,
                 ordered: bool = False, keep_contributions: bool = False) -> OracleResult:
    """``sum_f Phi(V^[k])|_f / e(T_f Hilb^k)`` over the fixed points.

    Weights may be integers/Fractions (numeric evaluation) or polynomials
    (symbolic, result as a :class:`RatFun`).  ``ordered`` multiplies by ``k!``.
    """
    numeric = all(isinstance(x, (int, Fraction)) for p in surface.points
                  for x in (p.l1, p.l2, *p.v_weights))
    total = Fraction(0) if numeric else None
    contributions = []
    count = 0
    poly = phi.expand() if isinstance(phi, ChernExpr) else phi
    for diagrams in distributions(k, len(surface.points)):
        roots, tangent = [], []
        for pt, mu in zip(surface.points, diagrams):
            roots.extend(taut_weights(mu, pt.l1, pt.l2, pt.v_weights))
            tangent.extend(tangent_weights(mu, pt.l1, pt.l2))
        count += 1
        if numeric:
            num = _phi_numeric(poly, [Fraction(r) for r in roots])
            den = Fraction(1)
            for t in tangent:
                if t == 0:
                    raise OracleError("vanishing tangent weight; choose generic weights")
                den *= t
            term = num / den
            total += term
        else:
            reg = DEFAULT_REGISTRY
            rroots = [r if isinstance(r, MultiPoly) else MultiPoly.const(r, reg) for r in roots]
            num = phi_eval_on_roots(poly, rroots)
            tpolys = [t if isinstance(t, MultiPoly) else MultiPoly.const(t, reg) for t in tangent]
            if any(t.is_zero() for t in tpolys):
                raise OracleError("vanishing tangent weight")
            term = RatFun.from_factors(num, tpolys)
            total = term if total is None else total + term
        if keep_contributions:
            contributions.append((tuple(m.parts for m in diagrams), term))
    if total is None:
        total = RatFun.zero()
    if ordered:
        total = total * factorial(k)
    if not numeric:
        total = total.reduce()
    return OracleResult(total, count, contributions, "ordered" if ordered else "unordered")


def _phi_numeric(poly: MultiPoly, roots: List[Fraction]) -> Fraction:
    top = max((v.index for v in poly.variables()), default=0)
    if top > len(roots):
        raise OracleError(f"c{top} used but only {len(roots)} roots")
    e = [Fraction(1)] + [Fraction(0)] * top
    for r in roots:
        for i in range(top, 0, -1):
            e[i] += e[i - 1] * r
    total = Fraction(0)
    for exps, coeff in poly.items():
        term = coeff
        for v, x in exps.items():
            if v.kind is not VarKind.C:
                raise OracleError(f"Phi contains non-class variable {v}")
            term *= e[v.index] ** x
        total += term
    return total


def random_weights(count: int, rng: random.Random, bound: int = 97) -> List[int]:
    """Distinct integers with pairwise distinct differences (generic for small k)."""
    while True:
        w = rng.sample(range(-bound, bound + 1), count)
        diffs = {a - b for a in w for b in w if a != b}
        if len(diffs) == count * (count - 1):
            return w


def compact_integral(surface_builder, k: int, phi: ChernExpr, seeds: Sequence[int] = (1, 2),
                     nweights: int = 3, ordered: bool = False) -> Fraction:
    """Evaluate at several random integer weight choices and require agreement.

    ``surface_builder(weights)`` returns a numeric chart.  Non-generic draws
    (a vanishing tangent weight) are skipped.
    """
    values = []
    for seed in seeds:
        rng = random.Random(seed)
        for _ in range(50):
            try:
                r = ab_integrate(surface_builder(random_weights(nweights, rng)), k, phi, ordered)
            except OracleError:
                continue
            values.append(r.value)
            break
        else:
            raise OracleError("no generic weights found")
    if any(v != values[0] for v in values):
        raise OracleError(f"equivariant parameters do not cancel: {values}")
    return values[0]

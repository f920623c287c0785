"""Generating series of multiplicative classes of tautological bundles.

For a multiplicative class ``f`` (total class ``prod f(root)``) the integrals
``int_{GHilb^k} f_{nk}(V^[k])`` assemble into ``S_V(q) = sum_k (...) q^k``.
Because the class is multiplicative, each partition term of the residue sum is
a product of connected terms ``R_m`` (single-block terms, ordered points), so

    S_V(q) = exp( sum_m R_m q^m / m! ).

:func:`series_coefficients` computes the left side by the full partition sum
and the right side from the connected terms alone.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Mapping, Sequence, Tuple

from .chern import BundleSpec, ChernExpr
from .poly import LinearForm, MultiPoly, VarId, c, homogeneous_part, z
from .residue import RationalTerm
from .setpart import enumerate_partitions
from .tautint import (IntersectionTable, ProblemSpec, SpecError, UniversalIntegral, _fstr,
                      factor_monomials, integrate_ghilb, mixed_triples, q_polynomial,
                      relabel_factors, segre_series_inverse)


@dataclass(frozen=True)
class MultiplicativeClassSpec:
    """``f(x) = sum a_i x^i`` with ``a_0 = 1``; coefficients past the list are zero."""

    name: str
    coefficients: Tuple[Fraction, ...]

    def __post_init__(self):
        if not self.coefficients or self.coefficients[0] != 1:
            raise SpecError("a multiplicative class needs a_0 = 1")

    def a(self, i: int) -> Fraction:
        return self.coefficients[i] if i < len(self.coefficients) else Fraction(0)

    @classmethod
    def segre(cls, order: int) -> "MultiplicativeClassSpec":
        return cls("segre", tuple(Fraction((-1) ** i) for i in range(order + 1)))

    @classmethod
    def chern(cls) -> "MultiplicativeClassSpec":
        return cls("chern", (Fraction(1), Fraction(1)))

    @classmethod
    def from_json(cls, data: Mapping) -> "MultiplicativeClassSpec":
        try:
            coeffs = tuple(Fraction(str(x)) for x in data["coefficients"])
        except (KeyError, ValueError, TypeError) as exc:
            raise SpecError(f"bad multiplicative class: {exc}") from exc
        return cls(str(data.get("name", "custom")), coeffs)

    def log_coefficients(self, order: int) -> List[Fraction]:
        """``b`` with ``log f(x) = sum_{i>=1} b_i x^i``; ``b[0]`` is unused."""
        b = [Fraction(0)] * (order + 1)
        for m in range(1, order + 1):
            acc = self.a(m)
            for i in range(1, m):
                acc -= Fraction(i, m) * b[i] * self.a(m - i)
            b[m] = acc
        return b


def class_in_chern(spec: MultiplicativeClassSpec, rank: int, degree: int) -> MultiPoly:
    """Degree-``degree`` part of ``prod_{i<=rank} f(x_i)`` in ``c_j = e_j(x)``."""
    cs = [MultiPoly.one()] + [MultiPoly.var(c(j)) if j <= rank else MultiPoly.zero()
                              for j in range(1, degree + 1)]
    # Newton: p_m = (-1)^(m-1) m e_m + sum_{i<m} (-1)^(i-1) e_i p_{m-i}
    p = [MultiPoly.zero()] * (degree + 1)
    for m in range(1, degree + 1):
        acc = cs[m] * ((-1) ** (m - 1) * m)
        for i in range(1, m):
            acc = acc + cs[i] * p[m - i] * (-1) ** (i - 1)
        p[m] = acc
    b = spec.log_coefficients(degree)
    logs = [MultiPoly.zero()] + [p[i] * b[i] for i in range(1, degree + 1)]
    # graded exponential: E_m = (1/m) sum_i i L_i E_{m-i}
    e = [MultiPoly.one()]
    for m in range(1, degree + 1):
        acc = MultiPoly.zero()
        for i in range(1, m + 1):
            acc = acc + logs[i] * e[m - i] * i
        e.append(acc * Fraction(1, m))
    return e[degree]


def exp_coefficients(connected: Sequence[Fraction], k_max: int) -> List[Fraction]:
    """Coefficients of ``exp(sum_m connected[m] q^m / m!)`` up to ``q^k_max``."""
    g = [Fraction(0)] + [Fraction(connected[m]) / factorial(m) for m in range(1, k_max + 1)]
    out = [Fraction(1)]
    for k in range(1, k_max + 1):
        out.append(sum((m * g[m] * out[k - m] for m in range(1, k + 1)), Fraction(0)) / k)
    return out


def segre_kernel(k: int, n: int, V: BundleSpec, truncation: int | None = None,
                 q_overrides: Mapping[int, str] | None = None) -> RationalTerm:
    """Connected Segre integrand in the form with ``1/z`` expansions of ``1/(1 + theta + z)``.

    Numerator: Vandermonde, ``Q_{k-1}``, ``s_V`` and ``prod S(1/z_i) s_X(1/z_i)`` with
    ``S(1/z) = prod_j sum_t (-1)^t (1 + theta_j)^t z^-t`` truncated at ``t <= truncation``;
    denominator: mixed factors and ``(z_1 ... z_{k-1})^(r+n+1)``.

    This expansion treats ``1`` as small against ``z``, which is not the graded
    expansion the residue formula assumes; :func:`series_coefficients` uses the
    graded class instead.  The kernel is kept for inspection and comparison.
    """
    if k < 1:
        raise SpecError("k must be positive")
    r = V.rank
    d = k - 1
    if truncation is None:
        truncation = n * k + 1
    roots = V.roots(1)
    one = MultiPoly.one()
    s_v = one
    for t in roots:
        s_v = s_v * sum((((-t) ** i) for i in range(1, n * k + 1)), one)
    s_v = sum((homogeneous_part(s_v, deg) for deg in range(n * k + 1)), MultiPoly.zero())
    zs = tuple(z(1, i) for i in range(1, d + 1))
    num = s_v * q_polynomial(d, 1, q_overrides)
    zp = [MultiPoly.var(v) for v in zs]
    for i in range(d):
        for j in range(i + 1, d):
            num = num * (zp[i] - zp[j])
    factors = []
    for i, j, q in mixed_triples(d):
        coeffs: Dict[VarId, Fraction] = {}
        for idx, a in ((i, 1), (j, 1), (q, -1)):
            coeffs[zs[idx - 1]] = coeffs.get(zs[idx - 1], 0) + a
        factors.append((LinearForm.make(coeffs), 1))
    for v in zs:
        series = one
        for t in roots:
            inner = one
            for i in range(1, truncation + 1):
                inner = inner + MultiPoly.monomial({v: -i}, coeff=(-1) ** i) * (one + t) ** i
            series = series * inner
        num = num * series * segre_series_inverse(n, 1, v)
        factors.append((LinearForm.make({v: 1}), r + n + 1))
    return RationalTerm(num, tuple(factors), zs)


@dataclass
class SeriesCoefficient:
    k: int
    direct: UniversalIntegral          # partition sum for the degree-nk class
    direct_value: Fraction | None      # int_{GHilb^k} (unordered)
    connected: UniversalIntegral       # single-block term, ordered
    connected_value: Fraction | None
    exponential_value: Fraction | None
    symbolic_agreement: bool
    numeric_agreement: bool | None

    def to_json(self) -> dict:
        def f(x):
            return None if x is None else _fstr(x)
        return {"k": self.k, "direct": f(self.direct_value), "connected": f(self.connected_value),
                "exponential": f(self.exponential_value),
                "symbolic_agreement": self.symbolic_agreement,
                "numeric_agreement": self.numeric_agreement}


@dataclass
class SeriesReport:
    cls: MultiplicativeClassSpec
    n: int
    rank: int
    coefficients: List[SeriesCoefficient]
    convention: str
    candidates: Dict[str, bool] = field(default_factory=dict)

    @property
    def agreement(self) -> bool:
        return all(c.symbolic_agreement and c.numeric_agreement is not False
                   for c in self.coefficients)

    def to_json(self) -> dict:
        return {"class": self.cls.name, "n": self.n, "rank": self.rank,
                "coefficients": [c.to_json() for c in self.coefficients],
                "agreement": self.agreement, "convention": self.convention,
                "candidates": self.candidates}


def _connected_term(result: UniversalIntegral) -> MultiPoly:
    (term,) = [t for t in result.terms if t.partition.size == 1]
    return term.value


def series_coefficients(cls: MultiplicativeClassSpec, n: int, V: BundleSpec, k_max: int,
                        table: IntersectionTable | None = None, prune: bool = False,
                        q_overrides: Mapping[int, str] | None = None,
                        workers: int | None = None) -> SeriesReport:
    """Coefficients of ``q^k``, ``1 <= k <= k_max``, by the partition sum and by the
    exponential of connected terms.

    Symbolic agreement compares universal polynomials (Chern numbers as formal
    symbols): the direct partition sum against ``sum_alpha prod_l R_{|alpha_l|}``
    with each connected polynomial moved to copy ``l``.  With a table the
    numbers are compared as well, for both candidate factorial conventions.
    """
    if k_max < 1:
        raise SpecError("k_max must be positive")
    overrides = tuple(sorted((q_overrides or {}).items()))

    def run(k: int) -> UniversalIntegral:
        phi = ChernExpr.from_poly(class_in_chern(cls, V.rank * k, n * k))
        spec = ProblemSpec(n, k, V, phi, q_overrides=overrides)
        return integrate_ghilb(spec, table, prune=prune)

    ks = list(range(1, k_max + 1))
    width = workers if workers is not None else int(os.environ.get("TAUTRES_THREADS", "1") or 1)
    if width > 1:
        with ThreadPoolExecutor(width) as pool:
            results = list(pool.map(run, ks))
    else:
        results = [run(k) for k in ks]
    connected = {k: _connected_term(r) for k, r in zip(ks, results)}
    conn_values = None
    exp_values = None
    if table is not None:
        conn_values = [Fraction(0)] + [table.integrate(connected[k]) for k in ks]
        exp_values = exp_coefficients(conn_values, k_max)
    coeffs = []
    candidates = {"unordered": table is not None, "ordered": table is not None}
    for k, res in zip(ks, results):
        expected: Dict[Tuple, Fraction] = {}
        for alpha in enumerate_partitions(k):
            prod = MultiPoly.one()
            for l, block in enumerate(alpha.blocks, start=1):
                prod = prod * relabel_factors(connected[len(block)], {1: l})
            for key, v in factor_monomials(prod).items():
                expected[key] = expected.get(key, 0) + v
        expected = {key: v for key, v in expected.items() if v}
        symbolic = expected == res.chern_numbers("segre")
        numeric = None
        if table is not None:
            numeric = res.total == exp_values[k]
            candidates["unordered"] &= res.total == exp_values[k]
            candidates["ordered"] &= res.ordered_total == exp_values[k]
        single = [t for t in res.terms if t.partition.size == 1][0]
        conn = UniversalIntegral(n, k, V.rank, [single], metadata={"connected": True})
        if table is not None:
            conn.ordered_total = conn_values[k]
        coeffs.append(SeriesCoefficient(
            k, res, res.total, conn, None if conn_values is None else conn_values[k],
            None if exp_values is None else exp_values[k], symbolic, numeric))
    return SeriesReport(cls, n, V.rank, coeffs,
                        "coefficient of q^k is the unordered integral; "
                        "connected terms are ordered single-block terms", candidates)

"""Rational functions whose denominators are products of linear forms.

The denominator is kept factored (normalized linear polynomial -> multiplicity);
sums go through the least common multiple of the factor multisets and
cancellation is done by exact division.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, Iterable, Mapping, Tuple

from .poly import DEFAULT_REGISTRY, MultiPoly, Registry, VarId, split_by, substitute


def _normalize_linear(p: MultiPoly) -> Tuple[Fraction, MultiPoly]:
    """``p = scale * q`` with the leading coefficient of ``q`` equal to 1."""
    if p.is_zero():
        raise ZeroDivisionError("zero denominator factor")
    if p.is_constant():
        return p.constant_term(), MultiPoly.one(p.registry)
    lead = p.sorted_terms()[0][1]
    return lead, p * (Fraction(1) / lead)


def divide_linear(num: MultiPoly, lin: MultiPoly) -> MultiPoly | None:
    """Exact quotient ``num / lin`` or ``None`` if ``lin`` does not divide ``num``."""
    reg = num.registry
    if num.is_zero():
        return num
    (mono, a), *_ = lin.sorted_terms()
    if len(mono) != 1 or mono[0][1] != 1:
        raise ValueError(f"{lin} is not linear")
    v = reg.var(mono[0][0])
    rest = lin - MultiPoly.var(v, coeff=a, registry=reg)
    groups = split_by(num, v)
    if min(groups) < 0:
        return None
    top = max(groups)
    coeffs = [groups.get(e, MultiPoly.zero(reg)) for e in range(top + 1)]
    quotient = [MultiPoly.zero(reg)] * max(top, 1)
    inv_a = Fraction(1) / a
    for e in range(top, 0, -1):
        q = coeffs[e] * inv_a
        quotient[e - 1] = q
        coeffs[e - 1] = coeffs[e - 1] - q * rest
    if not coeffs[0].is_zero():
        return None
    out = MultiPoly.zero(reg)
    vp = MultiPoly.var(v, registry=reg)
    power = MultiPoly.one(reg)
    for q in quotient:
        out = out + q * power
        power = power * vp
    return out


class RatFun:
    __slots__ = ("num", "den")

    def __init__(self, num: MultiPoly, den: Mapping[MultiPoly, int] | None = None):
        self.num = num
        self.den: Dict[MultiPoly, int] = dict(den or {})

    @classmethod
    def zero(cls, registry: Registry = DEFAULT_REGISTRY) -> "RatFun":
        return cls(MultiPoly.zero(registry))

    @classmethod
    def from_factors(cls, num: MultiPoly, factors: Iterable[MultiPoly]) -> "RatFun":
        den: Dict[MultiPoly, int] = {}
        scale = Fraction(1)
        for f in factors:
            s, q = _normalize_linear(f)
            scale *= s
            if q.is_constant():
                continue
            den[q] = den.get(q, 0) + 1
        return cls(num * (Fraction(1) / scale), den)

    @property
    def registry(self) -> Registry:
        return self.num.registry

    def _expand_to(self, target: Mapping[MultiPoly, int]) -> MultiPoly:
        out = self.num
        for f, m in target.items():
            for _ in range(m - self.den.get(f, 0)):
                out = out * f
        return out

    def __add__(self, other: "RatFun") -> "RatFun":
        if isinstance(other, MultiPoly):
            other = RatFun(other)
        if self.num.is_zero():
            return other
        if other.num.is_zero():
            return self
        common = dict(self.den)
        for f, m in other.den.items():
            common[f] = max(common.get(f, 0), m)
        return RatFun(self._expand_to(common) + other._expand_to(common), common)

    def __neg__(self) -> "RatFun":
        return RatFun(-self.num, self.den)

    def __sub__(self, other: "RatFun") -> "RatFun":
        if isinstance(other, MultiPoly):
            other = RatFun(other)
        return self + (-other)

    def __mul__(self, other) -> "RatFun":
        if isinstance(other, RatFun):
            den = dict(self.den)
            for f, m in other.den.items():
                den[f] = den.get(f, 0) + m
            return RatFun(self.num * other.num, den)
        return RatFun(self.num * other, self.den)

    __rmul__ = __mul__

    def reduce(self) -> "RatFun":
        """Cancel every denominator factor that divides the numerator."""
        num = self.num
        den = {}
        for f, m in self.den.items():
            left = m
            while left:
                q = divide_linear(num, f)
                if q is None:
                    break
                num = q
                left -= 1
            if left:
                den[f] = left
        if num.is_zero():
            den = {}
        return RatFun(num, den)

    def is_polynomial(self) -> bool:
        return not self.reduce().den

    def to_poly(self) -> MultiPoly:
        r = self.reduce()
        if r.den:
            raise ValueError("rational function has a nontrivial denominator")
        return r.num

    def __eq__(self, other) -> bool:
        if isinstance(other, MultiPoly):
            other = RatFun(other)
        if not isinstance(other, RatFun):
            return NotImplemented
        common = dict(self.den)
        for f, m in other.den.items():
            common[f] = max(common.get(f, 0), m)
        return self._expand_to(common) == other._expand_to(common)

    __hash__ = None

    def evaluate(self, point: Mapping[VarId, Fraction]) -> Fraction:
        reg = self.registry
        bind = {v: MultiPoly.const(x, reg) for v, x in point.items()}
        num = substitute(self.num, bind)
        if not num.is_constant():
            raise ValueError("point does not fix every variable")
        value = num.constant_term()
        for f, m in self.den.items():
            fv = substitute(f, bind)
            if not fv.is_constant():
                raise ValueError("point does not fix every variable")
            x = fv.constant_term()
            if x == 0:
                raise ZeroDivisionError(f"denominator factor {f} vanishes")
            value /= x ** m
        return value

    def substitute(self, bindings: Mapping[VarId, MultiPoly]) -> "RatFun":
        num = substitute(self.num, bindings)
        factors = []
        for f, m in self.den.items():
            factors.extend([substitute(f, bindings)] * m)
        return RatFun.from_factors(num, factors)

    def __repr__(self) -> str:
        den = " * ".join(f"({f})^{m}" if m > 1 else f"({f})" for f, m in self.den.items())
        return f"({self.num}) / ({den or 1})"

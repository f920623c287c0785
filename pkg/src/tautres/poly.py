"""Sparse multivariate (Laurent) polynomials with exact rational coefficients.

Every symbolic quantity in the package is a :class:`MultiPoly`.  Variables are
:class:`VarId` values interned in a :class:`Registry`; a monomial is a sorted
tuple of ``(slot, exponent)`` pairs where ``slot`` is the registry position.
Negative exponents are allowed only on residue variables.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction
from typing import Dict, Iterable, Iterator, Mapping, Tuple, Union

Monomial = Tuple[Tuple[int, int], ...]
Scalar = Union[int, Fraction]


class RegistryMismatch(ValueError):
    pass


class NegativeExponentError(ValueError):
    pass


class VarKind(IntEnum):
    # declaration order is the canonical variable order
    Z = 0        # residue variable z[block, position]
    THETA = 1    # Chern root of V on a factor
    LAMBDA = 2   # torus weight (or Chern root of X) on a factor
    CX = 3       # Chern class c_i(X) on a factor
    SX = 4       # Segre class s_i(X) on a factor
    CV = 5       # Chern class c_i(V) on a factor
    C = 6        # Chern class c_i of the tautological bundle
    Q = 7        # formal series parameter


_PREFIX = {
    VarKind.Z: "z", VarKind.THETA: "t", VarKind.LAMBDA: "l", VarKind.CX: "cX",
    VarKind.SX: "sX", VarKind.CV: "cV", VarKind.C: "c", VarKind.Q: "q",
}
_BY_PREFIX = {v: k for k, v in _PREFIX.items()}


@dataclass(frozen=True, order=True)
class VarId:
    """A typed variable.

    ``factor`` is the residue block for ``Z`` and the copy of ``X`` for the
    other kinds; ``index`` is the position (roots, weights, z's) or the
    cohomological degree (classes).
    """

    kind: VarKind
    factor: int
    index: int

    @property
    def degree(self) -> int:
        if self.kind in (VarKind.CX, VarKind.SX, VarKind.CV, VarKind.C):
            return self.index
        if self.kind is VarKind.Q:
            return 0
        return 1

    @property
    def name(self) -> str:
        return f"{_PREFIX[self.kind]}[{self.factor},{self.index}]"

    def __repr__(self) -> str:
        return self.name

    @classmethod
    def parse(cls, name: str) -> "VarId":
        head, _, rest = name.partition("[")
        if head not in _BY_PREFIX or not rest.endswith("]"):
            raise ValueError(f"bad variable name {name!r}")
        factor, index = (int(x) for x in rest[:-1].split(","))
        return cls(_BY_PREFIX[head], factor, index)


def z(block: int, position: int) -> VarId:
    return VarId(VarKind.Z, block, position)


def theta(factor: int, position: int) -> VarId:
    return VarId(VarKind.THETA, factor, position)


def lam(factor: int, position: int) -> VarId:
    return VarId(VarKind.LAMBDA, factor, position)


def cX(factor: int, degree: int) -> VarId:
    return VarId(VarKind.CX, factor, degree)


def sX(factor: int, degree: int) -> VarId:
    return VarId(VarKind.SX, factor, degree)


def cV(factor: int, degree: int) -> VarId:
    return VarId(VarKind.CV, factor, degree)


def c(degree: int) -> VarId:
    return VarId(VarKind.C, 0, degree)


class Registry:
    """Append-only interning table ``VarId <-> slot``."""

    def __init__(self) -> None:
        self._slots: Dict[VarId, int] = {}
        self._vars: list = []
        self._lock = threading.Lock()

    def slot(self, var: VarId) -> int:
        s = self._slots.get(var)
        if s is None:
            if var.degree < 0 or (var.kind in (VarKind.CX, VarKind.SX, VarKind.CV, VarKind.C)
                                  and var.index < 1):
                raise ValueError(f"classes need degree >= 1, got {var}")
            with self._lock:
                s = self._slots.get(var)
                if s is None:
                    s = len(self._vars)
                    self._vars.append(var)
                    self._slots[var] = s
        return s

    def var(self, slot: int) -> VarId:
        return self._vars[slot]

    def __len__(self) -> int:
        return len(self._vars)


DEFAULT_REGISTRY = Registry()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    if not a:
        return b
    if not b:
        return a
    out = []
    i = j = 0
    la, lb = len(a), len(b)
    while i < la and j < lb:
        sa, ea = a[i]
        sb, eb = b[j]
        if sa < sb:
            out.append(a[i])
            i += 1
        elif sb < sa:
            out.append(b[j])
            j += 1
        else:
            e = ea + eb
            if e:
                out.append((sa, e))
            i += 1
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


class MultiPoly:
    """Immutable sparse polynomial ``{monomial: Fraction}``; zero terms never stored."""

    __slots__ = ("terms", "registry", "_hash")

    def __init__(self, terms: Mapping[Monomial, Scalar] | None = None,
                 registry: Registry = DEFAULT_REGISTRY, *, _clean: bool = False):
        if terms is None:
            terms = {}
        if _clean:
            self.terms = terms
        else:
            self.terms = {m: Fraction(v) for m, v in terms.items() if v}
        self.registry = registry
        self._hash = None

    # constructors -------------------------------------------------------
    @classmethod
    def const(cls, value: Scalar, registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        return cls({(): value} if value else {}, registry)

    @classmethod
    def var(cls, v: VarId, exponent: int = 1, coeff: Scalar = 1,
            registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        if exponent < 0 and v.kind is not VarKind.Z:
            raise NegativeExponentError(f"negative exponent on {v}")
        if exponent == 0:
            return cls.const(coeff, registry)
        return cls({((registry.slot(v), exponent),): coeff}, registry)

    @classmethod
    def monomial(cls, exps: Mapping[VarId, int], coeff: Scalar = 1,
                 registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        for v, e in exps.items():
            if e < 0 and v.kind is not VarKind.Z:
                raise NegativeExponentError(f"negative exponent on {v}")
        mono = tuple(sorted((registry.slot(v), e) for v, e in exps.items() if e))
        return cls({mono: coeff}, registry)

    @classmethod
    def zero(cls, registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        return cls({}, registry, _clean=True)

    @classmethod
    def one(cls, registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        return cls({(): Fraction(1)}, registry, _clean=True)

    # basic protocol ----------------------------------------------------
    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.registry is not self.registry:
                raise RegistryMismatch("polynomials live in different registries")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.const(other, self.registry)
        return NotImplemented

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.const(other, self.registry)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.registry is other.registry and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for m, v in small.items():
            w = out.get(m)
            if w is None:
                out[m] = v
            else:
                w += v
                if w:
                    out[m] = w
                else:
                    del out[m]
        return MultiPoly(out, self.registry, _clean=True)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly({m: -v for m, v in self.terms.items()}, self.registry, _clean=True)

    def __sub__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> "MultiPoly":
        return (-self) + other

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, Fraction)):
            if not other:
                return MultiPoly.zero(self.registry)
            return MultiPoly({m: v * other for m, v in self.terms.items()},
                             self.registry, _clean=True)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[Monomial, Fraction] = {}
        get = out.get
        for ma, va in self.terms.items():
            for mb, vb in other.terms.items():
                m = _mono_mul(ma, mb)
                w = get(m)
                out[m] = va * vb if w is None else w + va * vb
        return MultiPoly({m: v for m, v in out.items() if v}, self.registry, _clean=True)

    __rmul__ = __mul__

    def __truediv__(self, other: Scalar) -> "MultiPoly":
        if not isinstance(other, (int, Fraction)):
            return NotImplemented
        return self * (Fraction(1) / Fraction(other))

    def __pow__(self, e: int) -> "MultiPoly":
        if e < 0:
            if len(self.terms) == 1:
                (m, v), = self.terms.items()
                return MultiPoly.monomial_raw(self.registry, tuple((s, x * e) for s, x in m),
                                              Fraction(1) / v ** -e, check=True)
            raise ValueError("negative powers only of monomials")
        result = MultiPoly.one(self.registry)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    @classmethod
    def monomial_raw(cls, registry: Registry, mono: Monomial, coeff: Scalar,
                     check: bool = False) -> "MultiPoly":
        if check:
            for s, e in mono:
                if e < 0 and registry.var(s).kind is not VarKind.Z:
                    raise NegativeExponentError(f"negative exponent on {registry.var(s)}")
        return cls({mono: coeff}, registry)

    # inspection --------------------------------------------------------
    def items(self) -> Iterator[Tuple[Dict[VarId, int], Fraction]]:
        """Yield ``({VarId: exponent}, coefficient)`` in canonical order."""
        for m, v in self.sorted_terms():
            yield {self.registry.var(s): e for s, e in m}, v

    def sorted_terms(self):
        reg = self.registry
        return sorted(self.terms.items(),
                      key=lambda mv: [(reg.var(s), -e) for s, e in mv[0]])

    def variables(self) -> set:
        return {self.registry.var(s) for m in self.terms for s, _ in m}

    def constant_term(self) -> Fraction:
        return self.terms.get((), Fraction(0))

    def is_constant(self) -> bool:
        return all(not m for m in self.terms)

    def weighted_degree(self, mono: Monomial, pred=None) -> int:
        reg = self.registry
        total = 0
        for s, e in mono:
            v = reg.var(s)
            if pred is None or pred(v):
                total += e * v.degree
        return total

    def degrees(self, pred=None) -> set:
        """Set of weighted degrees of the terms (restricted to variables matching ``pred``)."""
        return {self.weighted_degree(m, pred) for m in self.terms}

    def is_homogeneous(self, degree: int | None = None) -> bool:
        ds = self.degrees()
        if not ds:
            return True
        return len(ds) == 1 and (degree is None or degree in ds)

    def degree_in(self, v: VarId) -> int | None:
        """Largest exponent of ``v``; ``None`` for the zero polynomial."""
        s = self.registry._slots.get(v)
        best = None
        for m in self.terms:
            e = 0
            if s is not None:
                for t, x in m:
                    if t == s:
                        e = x
                        break
            if best is None or e > best:
                best = e
        return best

    def __repr__(self) -> str:
        return f"MultiPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exps, v in self.items():
            mono = "*".join(v_.name if e == 1 else f"{v_.name}^{e}" for v_, e in exps.items())
            if not mono:
                parts.append(str(v))
            elif v == 1:
                parts.append(mono)
            elif v == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{v}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    # serialization -----------------------------------------------------
    def to_json(self) -> list:
        return [{"coeff": _frac_str(v), "monomial": {var.name: e for var, e in exps.items()}}
                for exps, v in self.items()]

    @classmethod
    def from_json(cls, data: Iterable[dict], registry: Registry = DEFAULT_REGISTRY) -> "MultiPoly":
        out = MultiPoly.zero(registry)
        for term in data:
            exps = {VarId.parse(k): int(e) for k, e in term["monomial"].items()}
            out = out + MultiPoly.monomial(exps, Fraction(term["coeff"]), registry)
        return out


def _frac_str(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def frac_str(v: Scalar) -> str:
    return _frac_str(Fraction(v))


def var(v: VarId, registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    return MultiPoly.var(v, registry=registry)


def const(value: Scalar, registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    return MultiPoly.const(value, registry)


def poly_add(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a + b


def poly_mul(a: MultiPoly, b: MultiPoly) -> MultiPoly:
    return a * b


def substitute(p: MultiPoly, bindings: Mapping[VarId, MultiPoly]) -> MultiPoly:
    """Simultaneously replace variables by polynomials.

    A bound variable may only occur with nonnegative exponents in ``p``.
    """
    reg = p.registry
    slot_bind = {}
    for v, q in bindings.items():
        if q.registry is not reg:
            raise RegistryMismatch("binding lives in a different registry")
        s = reg._slots.get(v)
        if s is not None:
            slot_bind[s] = q
    if not slot_bind:
        return p
    power_cache: Dict[Tuple[int, int], MultiPoly] = {}

    def power(s: int, e: int) -> MultiPoly:
        key = (s, e)
        r = power_cache.get(key)
        if r is None:
            r = slot_bind[s] ** e
            power_cache[key] = r
        return r

    out = MultiPoly.zero(reg)
    acc: Dict[Monomial, Fraction] = {}
    for m, v in p.terms.items():
        kept = []
        factors = []
        for s, e in m:
            if s in slot_bind:
                if e < 0:
                    raise NegativeExponentError(
                        f"cannot substitute into negative power of {reg.var(s)}")
                factors.append(power(s, e))
            else:
                kept.append((s, e))
        term = MultiPoly({tuple(kept): v}, reg, _clean=True)
        for f in factors:
            term = term * f
        for mm, vv in term.terms.items():
            w = acc.get(mm)
            acc[mm] = vv if w is None else w + vv
    out = MultiPoly({m: v for m, v in acc.items() if v}, reg, _clean=True)
    return out


def coefficient_of(p: MultiPoly, v: VarId, exponent: int) -> MultiPoly:
    """Coefficient of ``v**exponent`` (Laurent exponents allowed); the result is free of ``v``."""
    s = p.registry._slots.get(v)
    if s is None:
        return p if exponent == 0 else MultiPoly.zero(p.registry)
    out = {}
    for m, val in p.terms.items():
        e = 0
        rest = m
        for i, (t, x) in enumerate(m):
            if t == s:
                e = x
                rest = m[:i] + m[i + 1:]
                break
        if e == exponent:
            out[rest] = val
    return MultiPoly(out, p.registry, _clean=True)


def split_by(p: MultiPoly, v: VarId) -> Dict[int, MultiPoly]:
    """Group ``p`` by the exponent of ``v``: ``{exponent: coefficient polynomial}``."""
    s = p.registry._slots.get(v)
    groups: Dict[int, dict] = {}
    for m, val in p.terms.items():
        e = 0
        rest = m
        if s is not None:
            for i, (t, x) in enumerate(m):
                if t == s:
                    e = x
                    rest = m[:i] + m[i + 1:]
                    break
        groups.setdefault(e, {})[rest] = val
    return {e: MultiPoly(d, p.registry, _clean=True) for e, d in groups.items()}


def graded_part(p: MultiPoly, degrees: Mapping[int, int], factor_of=None) -> MultiPoly:
    """Terms whose weighted degree in each factor's variables equals ``degrees[factor]``.

    By default a variable belongs to factor ``VarId.factor``; residue variables and
    series parameters never count.  Factors absent from ``degrees`` are unconstrained.
    """
    if factor_of is None:
        def factor_of(v: VarId):
            return None if v.kind in (VarKind.Z, VarKind.Q) else v.factor
    reg = p.registry
    out = {}
    for m, val in p.terms.items():
        tally: Dict[int, int] = {}
        for s, e in m:
            v = reg.var(s)
            f = factor_of(v)
            if f is not None:
                tally[f] = tally.get(f, 0) + e * v.degree
        if all(tally.get(f, 0) == d for f, d in degrees.items()):
            out[m] = val
    return MultiPoly(out, reg, _clean=True)


def homogeneous_part(p: MultiPoly, degree: int, pred=None) -> MultiPoly:
    return MultiPoly({m: v for m, v in p.terms.items()
                      if p.weighted_degree(m, pred) == degree}, p.registry, _clean=True)


@dataclass(frozen=True)
class LinearForm:
    """Affine linear form ``constant + sum coeffs[v] * v``.

    ``coeffs`` may mention any variable kind; the residue variables among them
    decide the expansion direction.
    """

    constant: Fraction
    coeffs: Tuple[Tuple[VarId, Fraction], ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("linear form needs at least one nonzero coefficient")

    @classmethod
    def make(cls, coeffs: Mapping[VarId, Scalar], constant: Scalar = 0) -> "LinearForm":
        items = tuple(sorted((v, Fraction(a)) for v, a in coeffs.items() if a))
        return cls(Fraction(constant), items)

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "LinearForm":
        coeffs = {}
        constant = Fraction(0)
        for exps, v in p.items():
            if not exps:
                constant = v
            elif len(exps) == 1 and next(iter(exps.values())) == 1:
                coeffs[next(iter(exps))] = v
            else:
                raise ValueError(f"{p} is not affine linear")
        return cls.make(coeffs, constant)

    def to_poly(self, registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
        out = MultiPoly.const(self.constant, registry)
        for v, a in self.coeffs:
            out = out + MultiPoly.var(v, coeff=a, registry=registry)
        return out

    def top(self, rank: Mapping[VarId, int]) -> Tuple[VarId, Fraction]:
        """Highest-ranked residue variable with nonzero coefficient."""
        best = None
        for v, a in self.coeffs:
            if v in rank and (best is None or rank[v] > rank[best[0]]):
                best = (v, a)
        if best is None:
            raise ValueError(f"{self} contains no residue variable")
        return best

    def is_monomial(self) -> bool:
        return self.constant == 0 and len(self.coeffs) == 1

    def __str__(self) -> str:
        return str(self.to_poly())


def expand_inverse_linear(omega: LinearForm, order_rank: Mapping[VarId, int],
                          truncation: int, registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    """Laurent expansion of ``1/omega`` dominated by its highest-ranked residue variable.

    ``1/(a z + rest) = sum_{j=0}^{truncation} (-1)^j rest^j / (a z)^(j+1)``.
    """
    if truncation < 0:
        raise ValueError("truncation must be >= 0")
    top, a = omega.top(order_rank)
    rest = MultiPoly.const(omega.constant, registry)
    for v, b in omega.coeffs:
        if v != top:
            rest = rest + MultiPoly.var(v, coeff=b, registry=registry)
    out = MultiPoly.zero(registry)
    power = MultiPoly.one(registry)
    inv_a = Fraction(1) / a
    for j in range(truncation + 1):
        scale = (-1) ** j * inv_a ** (j + 1)
        out = out + power * MultiPoly.var(top, -(j + 1), scale, registry)
        if rest.is_zero():
            break
        power = power * rest
    return out

"""Chern and Segre class calculus on explicit root multisets."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Sequence, Tuple, Union

from .poly import (DEFAULT_REGISTRY, MultiPoly, Registry, VarId, VarKind, c, cV, cX,
                   substitute, theta)


class AsymmetryError(ArithmeticError):
    """Raised when a polynomial expected to be symmetric is not."""

    def __init__(self, message: str, transposition: Tuple[VarId, VarId] | None = None):
        super().__init__(message)
        self.transposition = transposition


class PhiSyntaxError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


# ---------------------------------------------------------------------------
# bundles

@dataclass(frozen=True)
class BundleSpec:
    """A bundle of rank ``rank`` given either formally or by explicit equivariant weights."""

    rank: int
    weights: Tuple[MultiPoly, ...] | None = None

    def __post_init__(self):
        if self.rank < 0:
            raise ValueError("rank must be nonnegative")
        if self.weights is not None:
            if len(self.weights) != self.rank:
                raise ValueError(f"{len(self.weights)} weights for a rank {self.rank} bundle")
            for w in self.weights:
                if not w.is_homogeneous(1):
                    raise ValueError(f"weight {w} is not of degree 1")

    @property
    def formal(self) -> bool:
        return self.weights is None

    def roots(self, factor: int, registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
        """Chern roots on copy ``factor`` of the base."""
        if self.weights is not None:
            return list(self.weights)
        return [MultiPoly.var(theta(factor, j), registry=registry) for j in range(1, self.rank + 1)]

    @classmethod
    def from_json(cls, data: dict, registry: Registry = DEFAULT_REGISTRY) -> "BundleSpec":
        from .parse import parse_linear
        rank = int(data["rank"])
        chern = data.get("chern", ["formal"])
        if chern == ["formal"] or chern == "formal":
            return cls(rank)
        return cls(rank, tuple(parse_linear(w, registry) for w in chern))


# ---------------------------------------------------------------------------
# integrand expressions

@dataclass(frozen=True)
class Num:
    value: Fraction


@dataclass(frozen=True)
class Sym:
    index: int


@dataclass(frozen=True)
class Add:
    left: "Node"
    right: "Node"
    sign: int = 1


@dataclass(frozen=True)
class Mul:
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Neg:
    operand: "Node"


Node = Union[Num, Sym, Add, Mul, Pow, Neg]


@dataclass(frozen=True)
class ChernExpr:
    """Integrand written in the Chern classes ``c1, c2, ...`` of a tautological bundle."""

    root: Node
    source: str = field(default="", compare=False)

    def expand(self, registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
        return _expand(self.root, registry)

    @property
    def max_index(self) -> int:
        return _max_index(self.root)

    def degrees(self) -> set:
        return self.expand().degrees()

    @classmethod
    def from_poly(cls, p: MultiPoly) -> "ChernExpr":
        root: Node = Num(Fraction(0))
        for exps, v in p.items():
            term: Node = Num(v)
            for var_, e in exps.items():
                if var_.kind is not VarKind.C:
                    raise ValueError(f"{var_} is not a Chern class symbol")
                term = Mul(term, Pow(Sym(var_.index), e) if e > 1 else Sym(var_.index))
            root = Add(root, term)
        return cls(root, str(p))

    def __str__(self) -> str:
        return self.source or str(self.expand())


def _expand(node: Node, reg: Registry) -> MultiPoly:
    if isinstance(node, Num):
        return MultiPoly.const(node.value, reg)
    if isinstance(node, Sym):
        return MultiPoly.var(c(node.index), registry=reg)
    if isinstance(node, Add):
        r = _expand(node.right, reg)
        return _expand(node.left, reg) + (r if node.sign > 0 else -r)
    if isinstance(node, Mul):
        return _expand(node.left, reg) * _expand(node.right, reg)
    if isinstance(node, Pow):
        return _expand(node.base, reg) ** node.exponent
    if isinstance(node, Neg):
        return -_expand(node.operand, reg)
    raise TypeError(node)


def _max_index(node: Node) -> int:
    if isinstance(node, Sym):
        return node.index
    if isinstance(node, (Add, Mul)):
        return max(_max_index(node.left), _max_index(node.right))
    if isinstance(node, Pow):
        return _max_index(node.base)
    if isinstance(node, Neg):
        return _max_index(node.operand)
    return 0


_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|(c\d+)|(.))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m.end() == pos:
                break
            start = m.start(m.lastindex) if m.lastindex else m.end()
            if m.group(1):
                self.tokens.append(("num", m.group(1), start))
            elif m.group(2):
                self.tokens.append(("sym", m.group(2), start))
            elif m.group(3):
                self.tokens.append(("op", m.group(3), start))
            pos = m.end()
        self.end = len(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else ("eof", "", self.end)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def expect(self, op):
        tok = self.take()
        if tok[:2] != ("op", op):
            raise PhiSyntaxError(f"expected {op!r}", tok[2])

    def expr(self) -> Node:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = 1 if self.take()[1] == "+" else -1
            node = Add(node, self.term(), sign)
        return node

    def term(self) -> Node:
        node = self.unary()
        while self.peek()[:2] == ("op", "*"):
            self.take()
            node = Mul(node, self.unary())
        return node

    def unary(self) -> Node:
        if self.peek()[:2] == ("op", "-"):
            self.take()
            return Neg(self.unary())
        return self.power()

    def power(self) -> Node:
        node = self.atom()
        while self.peek()[:2] == ("op", "^"):
            self.take()
            tok = self.take()
            if tok[0] != "num" or "/" in tok[1] or int(tok[1]) < 1:
                raise PhiSyntaxError("expected positive integer exponent", tok[2])
            node = Pow(node, int(tok[1]))
        return node

    def atom(self) -> Node:
        tok = self.take()
        kind, text, pos = tok
        if kind == "num":
            return Num(Fraction(text))
        if kind == "sym":
            idx = int(text[1:])
            if idx < 1:
                raise PhiSyntaxError("Chern class index must be >= 1", pos)
            return Sym(idx)
        if tok[:2] == ("op", "("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "eof":
            raise PhiSyntaxError("unexpected end of input", pos)
        raise PhiSyntaxError(f"unexpected {text!r}", pos)


def parse_phi(source: str) -> ChernExpr:
    """Parse ``expr := term (('+'|'-') term)*`` with ``term := factor ('*' factor)*``."""
    if not source.strip():
        raise PhiSyntaxError("empty integrand", 0)
    p = _Parser(source)
    node = p.expr()
    tok = p.peek()
    if tok[0] != "eof":
        raise PhiSyntaxError(f"unexpected {tok[1]!r}", tok[2])
    return ChernExpr(node, source)


# ---------------------------------------------------------------------------
# series and roots

def segre_from_chern(chern: Sequence[MultiPoly], order: int,
                     registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
    """``[s_0, ..., s_order]`` with ``(sum s_i)(1 + sum c_i) = 1`` through degree ``order``."""
    s = [MultiPoly.one(registry)]
    for m in range(1, order + 1):
        acc = MultiPoly.zero(registry)
        for i in range(1, min(m, len(chern)) + 1):
            acc = acc + chern[i - 1] * s[m - i]
        s.append(-acc)
    return s


def chern_from_segre(segre: Sequence[MultiPoly], order: int,
                     registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
    """Inverse series; same recursion with the roles swapped."""
    return segre_from_chern(segre, order, registry)


def segre_variables_to_chern(factor: int, n: int,
                             registry: Registry = DEFAULT_REGISTRY) -> Dict[VarId, MultiPoly]:
    """Bindings ``s_i(X) -> polynomial in c_j(X)`` on copy ``factor``."""
    cs = [MultiPoly.var(cX(factor, i), registry=registry) for i in range(1, n + 1)]
    s = segre_from_chern(cs, n, registry)
    from .poly import sX
    return {sX(factor, i): s[i] for i in range(1, n + 1)}


def twist_roots(roots: Sequence[MultiPoly], z) -> List[MultiPoly]:
    return [r + z for r in roots]


def elementary_symmetric(roots: Sequence[MultiPoly], upto: int | None = None,
                         registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
    """``[e_0, e_1, ..., e_upto]`` of the given roots."""
    if upto is None:
        upto = len(roots)
    e = [MultiPoly.one(registry)] + [MultiPoly.zero(registry)] * upto
    for r in roots:
        for i in range(upto, 0, -1):
            e[i] = e[i] + e[i - 1] * r
    return e


def phi_eval_on_roots(phi: ChernExpr | MultiPoly, roots: Sequence[MultiPoly],
                      registry: Registry = DEFAULT_REGISTRY) -> MultiPoly:
    """Substitute ``c_i -> e_i(roots)`` and expand."""
    p = phi.expand(registry) if isinstance(phi, ChernExpr) else phi
    top = max((v.index for v in p.variables() if v.kind is VarKind.C), default=0)
    if top > len(roots):
        raise ValueError(f"c{top} used but only {len(roots)} roots available")
    e = elementary_symmetric(roots, top, registry)
    return substitute(p, {c(i): e[i] for i in range(1, top + 1)})


def check_symmetric(p: MultiPoly, block: Sequence[VarId]) -> None:
    """Raise :class:`AsymmetryError` naming an adjacent transposition that changes ``p``."""
    reg = p.registry
    for a, b in zip(block, block[1:]):
        sa, sb = reg.slot(a), reg.slot(b)
        swapped = {}
        for m, v in p.terms.items():
            mm = tuple(sorted(((sb if s == sa else sa if s == sb else s), e) for s, e in m))
            swapped[mm] = v
        if swapped != p.terms:
            raise AsymmetryError(f"not symmetric under {a} <-> {b}", (a, b))


def symmetric_reduce(p: MultiPoly, block: Sequence[VarId], targets: Sequence[VarId],
                     check: bool = True) -> MultiPoly:
    """Rewrite a polynomial symmetric in ``block`` through the elementary symmetric
    functions of ``block``, named ``targets[i-1]`` for ``e_i``.
    """
    block = list(block)
    if len(targets) < len(block):
        raise ValueError("need one target per elementary symmetric function")
    reg = p.registry
    if check:
        check_symmetric(p, block)
    if not block:
        return p
    slots = [reg.slot(v) for v in block]
    pos = {s: i for i, s in enumerate(slots)}
    r = len(block)
    # split every term into (exponent vector on block, rest monomial)
    work: Dict[Tuple[Tuple[int, ...], tuple], Fraction] = {}
    for m, v in p.terms.items():
        ex = [0] * r
        rest = []
        for s, e in m:
            if s in pos:
                ex[pos[s]] = e
            else:
                rest.append((s, e))
        work[(tuple(ex), tuple(rest))] = v
    e_polys = elementary_symmetric([MultiPoly.var(b, registry=reg) for b in block], r, reg)
    e_split = []
    for i in range(r + 1):
        d = {}
        for m, v in e_polys[i].terms.items():
            ex = [0] * r
            for s, x in m:
                ex[pos[s]] = x
            d[tuple(ex)] = v
        e_split.append(d)
    target_slots = [reg.slot(t) for t in targets[:r]]
    out: Dict[tuple, Fraction] = {}
    prod_cache: Dict[Tuple[int, ...], Dict[Tuple[int, ...], Fraction]] = {}

    def e_product(powers: Tuple[int, ...]) -> Dict[Tuple[int, ...], Fraction]:
        got = prod_cache.get(powers)
        if got is not None:
            return got
        acc = {tuple([0] * r): Fraction(1)}
        for i, k in enumerate(powers, start=1):
            for _ in range(k):
                nxt: Dict[Tuple[int, ...], Fraction] = {}
                for a, va in acc.items():
                    for b, vb in e_split[i].items():
                        key = tuple(x + y for x, y in zip(a, b))
                        nxt[key] = nxt.get(key, 0) + va * vb
                acc = nxt
        prod_cache[powers] = acc
        return acc

    while work:
        # leading term in lex order of block exponents (per rest monomial)
        (ex, rest), v = max(work.items(), key=lambda kv: kv[0][0])
        if any(ex[i] < ex[i + 1] for i in range(r - 1)):
            raise AsymmetryError(f"leading exponent {ex} is not a partition")
        powers = tuple(ex[i] - (ex[i + 1] if i + 1 < r else 0) for i in range(r))
        mono = list(rest) + [(target_slots[i], k) for i, k in enumerate(powers) if k]
        key = tuple(sorted(mono))
        out[key] = out.get(key, 0) + v
        for b, vb in e_product(powers).items():
            kk = (b, rest)
            nv = work.get(kk, 0) - v * vb
            if nv:
                work[kk] = nv
            else:
                work.pop(kk, None)
    return MultiPoly({m: v for m, v in out.items() if v}, reg, _clean=True)


def chern_classes_of_roots(roots: Sequence[MultiPoly],
                           registry: Registry = DEFAULT_REGISTRY) -> List[MultiPoly]:
    return elementary_symmetric(roots, len(roots), registry)[1:]


def reduce_factor_roots(p: MultiPoly, factor: int, rank: int) -> MultiPoly:
    """Replace the ``theta`` roots of copy ``factor`` by ``c_i(V)`` of that copy."""
    block = [theta(factor, j) for j in range(1, rank + 1)]
    targets = [cV(factor, i) for i in range(1, rank + 1)]
    return symmetric_reduce(p, block, targets)

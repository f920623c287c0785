"""Parser for polynomial literals used in JSON specs (weights, Q overrides, terms)."""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Callable, Dict, Optional

from .poly import DEFAULT_REGISTRY, MultiPoly, Registry, VarId, VarKind

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z]+\[\s*-?\d+\s*,\s*-?\d+\s*\])|([A-Za-z]+\d*)|(.))")

_SHORT = {"z": VarKind.Z, "l": VarKind.LAMBDA, "t": VarKind.THETA, "c": VarKind.C}


def default_names(name: str) -> Optional[VarId]:
    """``z3 -> z[0,3]``, ``l1 -> l[0,1]``, ``t2 -> t[0,2]``, ``c4 -> c[0,4]``."""
    m = re.fullmatch(r"([a-z])(\d+)", name)
    if m and m.group(1) in _SHORT:
        return VarId(_SHORT[m.group(1)], 0, int(m.group(2)))
    return None


def parse_poly(text: str, registry: Registry = DEFAULT_REGISTRY,
               names: Callable[[str], Optional[VarId]] = default_names) -> MultiPoly:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            break
        kind = m.lastindex
        if kind is not None:
            tokens.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    i = 0

    def peek():
        return tokens[i] if i < len(tokens) else (0, "", len(text))

    def take():
        nonlocal i
        t = peek()
        i += 1
        return t

    def expr():
        node = term()
        while peek()[1] in ("+", "-") and peek()[0] == 4:
            op = take()[1]
            rhs = term()
            node = node + rhs if op == "+" else node - rhs
        return node

    def term():
        node = unary()
        while peek()[0] == 4 and peek()[1] == "*":
            take()
            node = node * unary()
        return node

    def unary():
        if peek()[0] == 4 and peek()[1] == "-":
            take()
            return -unary()
        return power()

    def power():
        node = atom()
        while peek()[0] == 4 and peek()[1] == "^":
            take()
            kind, txt, p = take()
            if kind != 1 or "/" in txt:
                raise ValueError(f"expected integer exponent at offset {p} in {text!r}")
            node = node ** int(txt)
        return node

    def atom():
        kind, txt, p = take()
        if kind == 1:
            return MultiPoly.const(Fraction(txt), registry)
        if kind == 2:
            return MultiPoly.var(VarId.parse(re.sub(r"\s", "", txt)), registry=registry)
        if kind == 3:
            v = names(txt)
            if v is None:
                raise ValueError(f"unknown symbol {txt!r} at offset {p} in {text!r}")
            return MultiPoly.var(v, registry=registry)
        if kind == 4 and txt == "(":
            node = expr()
            k2, t2, p2 = take()
            if t2 != ")":
                raise ValueError(f"expected ')' at offset {p2} in {text!r}")
            return node
        raise ValueError(f"unexpected {txt!r} at offset {p} in {text!r}")

    if not tokens:
        raise ValueError("empty polynomial")
    out = expr()
    if i != len(tokens):
        raise ValueError(f"trailing input at offset {peek()[2]} in {text!r}")
    return out


def parse_linear(text: str, registry: Registry = DEFAULT_REGISTRY,
                 names: Callable[[str], Optional[VarId]] = default_names) -> MultiPoly:
    p = parse_poly(text, registry, names)
    if not p.is_homogeneous(1) and not p.is_zero():
        raise ValueError(f"{text!r} is not a homogeneous linear form")
    return p


def names_with(mapping: Dict[str, VarId]) -> Callable[[str], Optional[VarId]]:
    def lookup(name: str) -> Optional[VarId]:
        return mapping.get(name) or default_names(name)
    return lookup

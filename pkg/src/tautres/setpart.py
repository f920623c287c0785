"""Set partitions of ``{1..k}`` via restricted growth strings."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterator, List, Tuple

MAX_K = 12


@dataclass(frozen=True)
class SetPartition:
    """Blocks are sorted tuples, ordered by their minimum element."""

    blocks: Tuple[Tuple[int, ...], ...]
    k: int

    def __post_init__(self):
        seen = sorted(x for b in self.blocks for x in b)
        if seen != list(range(1, self.k + 1)) or any(not b for b in self.blocks):
            raise ValueError(f"{self.blocks} is not a set partition of 1..{self.k}")

    @classmethod
    def of(cls, blocks) -> "SetPartition":
        bs = sorted((tuple(sorted(b)) for b in blocks), key=lambda b: b[0])
        return cls(tuple(bs), sum(len(b) for b in bs))

    @property
    def size(self) -> int:
        return len(self.blocks)

    @property
    def block_sizes(self) -> Tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def to_json(self) -> List[List[int]]:
        return [list(b) for b in self.blocks]

    def __str__(self) -> str:
        return "|".join("".join(map(str, b)) if self.k < 10 else ",".join(map(str, b))
                        for b in self.blocks)


def restricted_growth_strings(k: int) -> Iterator[Tuple[int, ...]]:
    """Strings a_1..a_k with a_1 = 0 and a_i <= 1 + max(a_1..a_{i-1}), in lex order."""
    if k == 0:
        yield ()
        return
    a = [0] * k
    m = [0] * k  # m[i] = max(a[0..i-1]) (m[0] unused)
    while True:
        yield tuple(a)
        i = k - 1
        while i > 0 and a[i] == m[i] + 1:
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, k):
            a[j] = 0
            m[j] = max(m[j - 1], a[j - 1])


def enumerate_partitions(k: int, max_k: int = MAX_K) -> List[SetPartition]:
    if not 1 <= k <= max_k:
        raise ValueError(f"k={k} outside supported range 1..{max_k}")
    out = []
    for rgs in restricted_growth_strings(k):
        blocks: List[List[int]] = []
        for i, label in enumerate(rgs, start=1):
            if label == len(blocks):
                blocks.append([])
            blocks[label].append(i)
        out.append(SetPartition(tuple(tuple(b) for b in blocks), k))
    return out


def bell(k: int) -> int:
    row = [1]
    for _ in range(k):
        nxt = [row[-1]]
        for x in row:
            nxt.append(nxt[-1] + x)
        row = nxt
    return row[0]


def sieve_coefficient(beta: SetPartition) -> Fraction:
    s = beta.size
    return Fraction((-1) ** (s - 1) * factorial(s - 1))


def refines(alpha: SetPartition, beta: SetPartition) -> bool:
    if alpha.k != beta.k:
        raise ValueError("partitions of different sets")
    where = {}
    for i, b in enumerate(beta.blocks):
        for x in b:
            where[x] = i
    return all(len({where[x] for x in b}) == 1 for b in alpha.blocks)


def integer_partitions(k: int, largest: int | None = None) -> Iterator[Tuple[int, ...]]:
    """Weakly decreasing positive tuples summing to ``k`` (reverse lex)."""
    if largest is None:
        largest = k
    if k == 0:
        yield ()
        return
    for first in range(min(k, largest), 0, -1):
        for rest in integer_partitions(k - first, first):
            yield (first,) + rest

"""Hereditarily finite sets, the levels of the cumulative hierarchy, and their
brace-word encodings over {l, r} (l = opening brace, r = closing brace).

This module is the brute-force semantic ground truth that the generated
formula families are checked against; it never consults the formula side.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Dict, Iterable, List, Tuple

from .errors import BadWordError, LevelTooLargeError, UnbalancedBracesError

MAX_LEVEL = 4  # materializing level 5 would need 2**16 member sets per word


class HFSet:
    """Canonical hereditarily finite set; elements are kept in ascending
    order of the symmetric-difference order (see `precedes`)."""

    __slots__ = ("elements", "_hash", "_rank")

    def __init__(self, elements: Iterable["HFSet"] = ()):
        unique: List[HFSet] = []
        for e in elements:
            if e not in unique:
                unique.append(e)
        unique.sort(key=_ORDER_KEY)
        self.elements = tuple(unique)
        self._hash = hash(self.elements)
        self._rank = 0 if not unique else 1 + max(e._rank for e in unique)

    @property
    def rank(self) -> int:
        return self._rank

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, HFSet):
            return NotImplemented
        return self._hash == other._hash and self.elements == other.elements

    def __contains__(self, item):
        return item in self.elements

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __repr__(self):
        return braces(encode_word(self))

    def with_element(self, extra: "HFSet") -> "HFSet":
        return HFSet(self.elements + (extra,))


def precedes(a: HFSet, b: HFSet) -> bool:
    """Strict order: the greatest element of the symmetric difference lies in b."""
    return _cmp(a, b) < 0


@functools.lru_cache(maxsize=None)
def _cmp(a: HFSet, b: HFSet) -> int:
    if a == b:
        return 0
    diff = set(a.elements).symmetric_difference(b.elements)
    greatest = max(diff, key=_ORDER_KEY)
    return 1 if greatest in a else -1


_ORDER_KEY = functools.cmp_to_key(lambda a, b: _cmp(a, b))

EMPTY = HFSet()


# ----------------------------------------------------------------- hierarchy


@functools.lru_cache(maxsize=None)
def v_set(i: int) -> HFSet:
    """The set V_i itself (V_0 is empty, V_{i+1} the power set of V_i)."""
    if i < 0:
        raise LevelTooLargeError("level must be nonnegative")
    if i > MAX_LEVEL:
        raise LevelTooLargeError(f"level {i} exceeds the materializable bound {MAX_LEVEL}")
    if i == 0:
        return EMPTY
    members = v_set(i - 1).elements
    subsets = [
        HFSet(chosen) for n in range(len(members) + 1) for chosen in combinations(members, n)
    ]
    return HFSet(subsets)


def v_level(i: int) -> Tuple[HFSet, ...]:
    """Members of V_i in ascending order."""
    return v_set(i).elements


def prec(i: int, a: HFSet, b: HFSet) -> bool:
    """The order on level-i sets; both arguments must belong to V_i."""
    members = v_level(i)
    if a not in members or b not in members:
        raise LevelTooLargeError(f"arguments are not both members of V_{i}")
    return precedes(a, b)


# ----------------------------------------------------------------- encodings


@functools.lru_cache(maxsize=None)
def encode_word(s: HFSet) -> str:
    """Duplicate-free encoding with elements in ascending order, recursively."""
    return "l" + "".join(encode_word(e) for e in s.elements) + "r"


def encode_fo(i: int) -> str:
    """The ordered encoding of V_i (the word the first-order family defines)."""
    return encode_word(v_set(i))


@functools.lru_cache(maxsize=None)
def _least_word(s: HFSet) -> str:
    parts = sorted(
        (_least_word(e) for e in s.elements),
        key=functools.cmp_to_key(lambda u, v: -1 if u + v < v + u else (u > v) - (u < v)),
    )
    return "l" + "".join(parts) + "r"


def encode_mso(i: int) -> str:
    """The shortlex-least duplicate-free encoding of V_i (l before r)."""
    return _least_word(v_set(i))


def enumerate_encodings(i: int) -> frozenset:
    """All duplicate-free encodings of V_i over all recursive element orders."""
    if i > 2:
        raise LevelTooLargeError(f"exhaustive enumeration is capped at level 2, got {i}")

    def walk(s: HFSet) -> List[str]:
        per_element = [walk(e) for e in s.elements]
        out = []
        for order in permutations(range(len(per_element))):
            prefix = [""]
            for idx in order:
                prefix = [p + enc for p in prefix for enc in per_element[idx]]
            out.extend(prefix)
        return ["l" + body + "r" for body in set(out)] if out else ["lr"]

    return frozenset(walk(v_set(i)))


# ------------------------------------------------------------------- parsing


@dataclass(frozen=True)
class BraceNode:
    """A matched pair: 1-based span [start, end], child pairs, decoded set."""

    start: int
    end: int
    children: Tuple["BraceNode", ...]
    value: HFSet

    @property
    def height(self) -> int:
        return 0 if not self.children else 1 + max(c.height for c in self.children)


@dataclass(frozen=True)
class BraceWord:
    word: str
    roots: Tuple[BraceNode, ...]

    def all_nodes(self) -> List[BraceNode]:
        out: List[BraceNode] = []
        stack = list(self.roots)
        while stack:
            node = stack.pop()
            out.append(node)
            stack.extend(node.children)
        out.sort(key=lambda n: (n.start, n.end))
        return out


def parse_braces(word: str) -> BraceWord:
    """Match l/r as braces; raises UnbalancedBracesError with a 1-based position."""
    for pos, ch in enumerate(word, start=1):
        if ch not in "lr":
            raise BadWordError(f"bad character {ch!r} at position {pos}")
    stack: List[Tuple[int, List[BraceNode]]] = []
    roots: List[BraceNode] = []
    for pos, ch in enumerate(word, start=1):
        if ch == "l":
            stack.append((pos, []))
        else:
            if not stack:
                raise UnbalancedBracesError("unmatched closing brace", pos)
            start, children = stack.pop()
            node = BraceNode(start, pos, tuple(children), HFSet(c.value for c in children))
            (stack[-1][1] if stack else roots).append(node)
    if stack:
        raise UnbalancedBracesError("unmatched opening brace", stack[-1][0])
    return BraceWord(word, tuple(roots))


def decode(word: str) -> HFSet:
    """The set denoted by a single-rooted encoding (repetitions collapse)."""
    parsed = parse_braces(word)
    if len(parsed.roots) != 1:
        position = 1 if not parsed.roots else parsed.roots[1].start
        raise UnbalancedBracesError("expected a single outermost pair", position)
    return parsed.roots[0].value


def levels_of(word: str) -> Dict[int, int]:
    """Position -> level map: a root pair sits at its own nesting height and
    every element sits one level below its parent, so equal sets may carry
    different levels at different depths."""
    parsed = parse_braces(word)
    levels: Dict[int, int] = {}

    def assign(node: BraceNode, level: int):
        levels[node.start] = level
        levels[node.end] = level
        for child in node.children:
            assign(child, level - 1)

    for root in parsed.roots:
        assign(root, root.height)
    return levels


def braces(word: str) -> str:
    """Pretty form with actual brace characters."""
    return word.replace("l", "{").replace("r", "}")


def ackermann(s: HFSet) -> int:
    """Independent order oracle: n(s) = sum over elements of 2**n(e)."""
    return sum(2 ** ackermann(e) for e in s.elements)

"""Formula AST over the word vocabulary {<, =, P_l, P_r} with FO and MSO binders.

Size counts one node per atom or constant, one extra node per connective,
negation and quantifier.  Quantifier rank counts nesting depth of binders of
either order and ignores negation.  Both are fixed at construction time, so
reading them is O(1) even on shared sub-DAGs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import (
    CaptureError,
    FormulaSyntaxError,
    SortError,
    UnboundVariableError,
)

# ------------------------------------------------------------------ variables


@dataclass(frozen=True)
class VariableId:
    """A sorted variable: second-order names start with an uppercase letter."""

    name: str
    second_order: bool

    def __post_init__(self):
        if not self.name or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", self.name):
            raise SortError(f"bad variable name {self.name!r}")
        if self.name[0].isupper() != self.second_order:
            kind = "second" if self.second_order else "first"
            raise SortError(
                f"{kind}-order variable {self.name!r} violates the case convention"
            )

    def __str__(self):
        return self.name


def fo_var(name: str) -> VariableId:
    return VariableId(name, second_order=False)


def so_var(name: str) -> VariableId:
    return VariableId(name, second_order=True)


def var_for_name(name: str) -> VariableId:
    """Infer the sort from the case convention of the external grammar."""
    return VariableId(name, second_order=name[0].isupper())


# ------------------------------------------------------------------ AST kinds

ATOM_LT = "lt"
ATOM_EQ = "eq"
ATOM_LETTER_L = "letter-l"
ATOM_LETTER_R = "letter-r"
ATOM_IN = "in"
VERUM = "true"
FALSUM = "false"
NOT = "not"
AND = "and"
OR = "or"
EXISTS1 = "exists1"
FORALL1 = "forall1"
EXISTS2 = "exists2"
FORALL2 = "forall2"

_ATOMS = frozenset({ATOM_LT, ATOM_EQ, ATOM_LETTER_L, ATOM_LETTER_R, ATOM_IN})
_CONSTANTS = frozenset({VERUM, FALSUM})
_QUANTIFIERS = frozenset({EXISTS1, FORALL1, EXISTS2, FORALL2})
_BINARY = frozenset({AND, OR})

_EMPTY: frozenset = frozenset()


class Formula:
    """Immutable formula node.  Structural equality, cached hash."""

    __slots__ = ("kind", "children", "var", "args", "size", "qr", "free1", "free2", "_hash")

    kind: str
    children: tuple
    var: Optional[VariableId]
    args: tuple
    size: int
    qr: int
    free1: frozenset  # free first-order variable names
    free2: frozenset  # free second-order variable names

    def __init__(self, kind, children=(), var=None, args=()):
        self.kind = kind
        self.children = children
        self.var = var
        self.args = args
        if kind in _ATOMS or kind in _CONSTANTS:
            self.size = 1
            self.qr = 0
            self.free1 = frozenset(a.name for a in args if not a.second_order)
            self.free2 = frozenset(a.name for a in args if a.second_order)
        elif kind == NOT:
            (c,) = children
            self.size = c.size + 1
            self.qr = c.qr
            self.free1, self.free2 = c.free1, c.free2
        elif kind in _BINARY:
            a, b = children
            self.size = a.size + b.size + 1
            self.qr = max(a.qr, b.qr)
            self.free1 = a.free1 | b.free1
            self.free2 = a.free2 | b.free2
        elif kind in _QUANTIFIERS:
            (c,) = children
            self.size = c.size + 1
            self.qr = c.qr + 1
            if var.second_order:
                self.free1, self.free2 = c.free1, c.free2 - {var.name}
            else:
                self.free1, self.free2 = c.free1 - {var.name}, c.free2
        else:  # pragma: no cover - builders prevent this
            raise ValueError(f"unknown kind {kind!r}")
        self._hash = hash((kind, var, args, tuple(ch._hash for ch in children)))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula):
            return NotImplemented
        stack = [(self, other)]
        while stack:
            a, b = stack.pop()
            if a is b:
                continue
            if (
                a.kind != b.kind
                or a.var != b.var
                or a.args != b.args
                or a._hash != b._hash
                or len(a.children) != len(b.children)
            ):
                return False
            stack.extend(zip(a.children, b.children))
        return True

    @property
    def is_sentence(self) -> bool:
        return not self.free1 and not self.free2

    def __repr__(self):
        text = pformat(self)
        if len(text) > 120:
            text = text[:117] + "..."
        return f"Formula({text})"

    def __str__(self):
        return pformat(self)


# ------------------------------------------------------------------ builders


def _check_fo(v: VariableId, where: str):
    if v.second_order:
        raise SortError(f"second-order variable {v.name!r} in {where}")


def _check_so(v: VariableId, where: str):
    if not v.second_order:
        raise SortError(f"first-order variable {v.name!r} in {where}")


def lt(a: VariableId, b: VariableId) -> Formula:
    _check_fo(a, "lt"), _check_fo(b, "lt")
    return Formula(ATOM_LT, args=(a, b))


def eq(a: VariableId, b: VariableId) -> Formula:
    _check_fo(a, "eq"), _check_fo(b, "eq")
    return Formula(ATOM_EQ, args=(a, b))


def letter_l(a: VariableId) -> Formula:
    _check_fo(a, "letter-l")
    return Formula(ATOM_LETTER_L, args=(a,))


def letter_r(a: VariableId) -> Formula:
    _check_fo(a, "letter-r")
    return Formula(ATOM_LETTER_R, args=(a,))


def member(a: VariableId, big: VariableId) -> Formula:
    _check_fo(a, "in"), _check_so(big, "in")
    return Formula(ATOM_IN, args=(a, big))


def true_() -> Formula:
    return Formula(VERUM)


def false_() -> Formula:
    return Formula(FALSUM)


def not_(f: Formula) -> Formula:
    return Formula(NOT, children=(f,))


def and_(a: Formula, b: Formula) -> Formula:
    return Formula(AND, children=(a, b))


def or_(a: Formula, b: Formula) -> Formula:
    return Formula(OR, children=(a, b))


def exists1(v: VariableId, f: Formula) -> Formula:
    _check_fo(v, "exists1")
    return Formula(EXISTS1, children=(f,), var=v)


def forall1(v: VariableId, f: Formula) -> Formula:
    _check_fo(v, "forall1")
    return Formula(FORALL1, children=(f,), var=v)


def exists2(v: VariableId, f: Formula) -> Formula:
    _check_so(v, "exists2")
    return Formula(EXISTS2, children=(f,), var=v)


def forall2(v: VariableId, f: Formula) -> Formula:
    _check_so(v, "forall2")
    return Formula(FORALL2, children=(f,), var=v)


# Desugaring helpers.  All bounded families associate to the right.


def implies(a: Formula, b: Formula) -> Formula:
    return or_(not_(a), b)


def iff(a: Formula, b: Formula) -> Formula:
    return and_(or_(not_(a), b), or_(not_(b), a))


def neq(a: VariableId, b: VariableId) -> Formula:
    return not_(eq(a, b))


def le(a: VariableId, b: VariableId) -> Formula:
    return or_(lt(a, b), eq(a, b))


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return true_()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = and_(p, out)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return false_()
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = or_(p, out)
    return out


def successor(a: VariableId, b: VariableId, between: VariableId) -> Formula:
    """b is the immediate successor of a; `between` is the witness variable."""
    return and_(lt(a, b), not_(exists1(between, and_(lt(a, between), lt(between, b)))))


# ------------------------------------------------------------------ measures


def size(f: Formula) -> int:
    return f.size


def quantifier_rank(f: Formula) -> int:
    return f.qr


def is_first_order(f: Formula) -> bool:
    """True iff the formula has no second-order binder and no membership atom."""
    seen = set()
    stack = [f]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        if node.kind in (EXISTS2, FORALL2, ATOM_IN):
            return False
        stack.extend(node.children)
    return True


def subformulas(f: Formula):
    """Every distinct node of the formula DAG, children before parents."""
    seen = set()
    order = []
    stack = [(f, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for ch in node.children:
            stack.append((ch, False))
    return order


# ------------------------------------------------------------------ printing


def pformat(f: Formula) -> str:
    """Canonical text in the external grammar (parenthesized prefix form)."""
    out = []
    stack = [f]
    while stack:
        node = stack.pop()
        if isinstance(node, str):
            out.append(node)
            continue
        k = node.kind
        if k in _CONSTANTS:
            out.append(k)
        elif k in _ATOMS:
            out.append(f"({k} {' '.join(a.name for a in node.args)})")
        elif k == NOT:
            out.append("(not ")
            stack.append(")")
            stack.append(node.children[0])
        elif k in _BINARY:
            out.append(f"({k} ")
            stack.append(")")
            stack.append(node.children[1])
            stack.append(" ")
            stack.append(node.children[0])
        else:
            out.append(f"({k} {node.var.name} ")
            stack.append(")")
            stack.append(node.children[0])
    return "".join(out)


# ------------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(r"\(|\)|[A-Za-z][A-Za-z0-9_'\-]*|\S")

_KEYWORDS = {
    "and": (AND, 2),
    "or": (OR, 2),
    "not": (NOT, 1),
    "exists1": (EXISTS1, 1),
    "forall1": (FORALL1, 1),
    "exists2": (EXISTS2, 1),
    "forall2": (FORALL2, 1),
}
_ATOM_KEYWORDS = {
    "lt": (ATOM_LT, 2),
    "eq": (ATOM_EQ, 2),
    "letter-l": (ATOM_LETTER_L, 1),
    "letter-r": (ATOM_LETTER_R, 1),
    "in": (ATOM_IN, 2),
}
_RESERVED = set(_KEYWORDS) | set(_ATOM_KEYWORDS) | {"true", "false"}


def _parse_variable(name, position, second_order):
    if name in _RESERVED or not re.fullmatch(r"[A-Za-z][A-Za-z0-9_']*", name):
        raise FormulaSyntaxError(f"expected a variable, got {name!r}", position)
    v = var_for_name(name)
    if v.second_order != second_order:
        want = "second" if second_order else "first"
        raise SortError(
            f"{v.name!r} used as a {want}-order variable at position {position}"
            f" (sort is fixed by the case of the first letter)"
        )
    return v


def parse(text: str, require_sentence: bool = False) -> Formula:
    """Parse the external grammar.  `require_sentence` rejects free variables."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaSyntaxError("empty input", 0)
    i = 0
    n = len(tokens)

    # Frames: [kind, position, collected children or None-for-pending, binder]
    stack = []
    result = None

    def reduce_with(value):
        nonlocal result
        if not stack:
            result = value
        else:
            stack[-1][2].append(value)

    while i < n:
        tok, pos = tokens[i]
        if result is not None:
            raise FormulaSyntaxError("trailing content after formula", pos)
        if tok == "(":
            if i + 1 >= n:
                raise FormulaSyntaxError("unexpected end of input", pos)
            head, hpos = tokens[i + 1]
            i += 2
            if head in _ATOM_KEYWORDS:
                kind, arity = _ATOM_KEYWORDS[head]
                args = []
                for j in range(arity):
                    if i >= n or tokens[i][0] in "()":
                        raise FormulaSyntaxError(f"{head} expects {arity} variables", hpos)
                    second = head == "in" and j == 1
                    args.append(_parse_variable(tokens[i][0], tokens[i][1], second))
                    i += 1
                if i >= n or tokens[i][0] != ")":
                    raise FormulaSyntaxError(f"expected ')' after {head}", hpos)
                i += 1
                if kind == ATOM_LT:
                    node = lt(*args)
                elif kind == ATOM_EQ:
                    node = eq(*args)
                elif kind == ATOM_LETTER_L:
                    node = letter_l(*args)
                elif kind == ATOM_LETTER_R:
                    node = letter_r(*args)
                else:
                    node = member(*args)
                reduce_with(node)
            elif head in _KEYWORDS:
                kind, arity = _KEYWORDS[head]
                binder = None
                if kind in _QUANTIFIERS:
                    if i >= n or tokens[i][0] in "()":
                        raise FormulaSyntaxError(f"{head} expects a variable", hpos)
                    binder = _parse_variable(
                        tokens[i][0], tokens[i][1], kind in (EXISTS2, FORALL2)
                    )
                    i += 1
                stack.append([kind, hpos, [], binder, arity])
            else:
                raise FormulaSyntaxError(f"unknown operator {head!r}", hpos)
        elif tok == ")":
            if not stack:
                raise FormulaSyntaxError("unmatched ')'", pos)
            kind, fpos, kids, binder, arity = stack.pop()
            if len(kids) != arity:
                raise FormulaSyntaxError(
                    f"{kind} expects {arity} subformula(s), got {len(kids)}", fpos
                )
            if kind == NOT:
                node = not_(kids[0])
            elif kind == AND:
                node = and_(kids[0], kids[1])
            elif kind == OR:
                node = or_(kids[0], kids[1])
            elif kind == EXISTS1:
                node = exists1(binder, kids[0])
            elif kind == FORALL1:
                node = forall1(binder, kids[0])
            elif kind == EXISTS2:
                node = exists2(binder, kids[0])
            else:
                node = forall2(binder, kids[0])
            i += 1
            reduce_with(node)
        elif tok == "true":
            i += 1
            reduce_with(true_())
        elif tok == "false":
            i += 1
            reduce_with(false_())
        else:
            raise FormulaSyntaxError(f"unexpected token {tok!r}", pos)

    if result is None:
        raise FormulaSyntaxError("unexpected end of input", tokens[-1][1] + 1)
    if require_sentence and (result.free1 or result.free2):
        raise UnboundVariableError(result.free1 | result.free2)
    return result


# ------------------------------------------------------------- substitutions


def rename_free(f: Formula, mapping: dict) -> Formula:
    """Rename free variable occurrences; raises CaptureError if a target name
    is bound anywhere a renamed occurrence could land under."""
    if not mapping:
        return f
    for old, new in mapping.items():
        if old.second_order != new.second_order:
            raise SortError(f"cannot rename {old.name!r} across sorts")
    by_name = {old.name: new for old, new in mapping.items()}
    targets = {new.name for new in mapping.values()}

    memo: dict = {}
    order = subformulas(f)
    for node in order:
        touched = (node.free1 | node.free2) & by_name.keys()
        if not touched:
            memo[id(node)] = node
            continue
        if node.var is not None and node.var.name in targets:
            raise CaptureError(
                f"renaming into {node.var.name!r} would be captured by its binder"
            )
        if node.var is not None and node.var.name in by_name:
            # The binder shadows a renamed name, so occurrences below it are
            # bound, not free; a flat rewrite would silently change semantics.
            raise CaptureError(
                f"cannot rename {node.var.name!r} across a binder that shadows it"
            )
        if node.kind in _ATOMS:
            new_args = tuple(
                by_name.get(a.name, a) if a.name in touched else a for a in node.args
            )
            memo[id(node)] = Formula(node.kind, args=new_args)
        else:
            kids = tuple(memo[id(ch)] for ch in node.children)
            memo[id(node)] = Formula(node.kind, children=kids, var=node.var, args=node.args)
    return memo[id(f)]


def substitute_letter_atoms(f: Formula, l_target: VariableId, r_target: VariableId) -> Formula:
    """Replace letter-l(t) by (in t L) and letter-r(t) by (in t R).

    Both targets must be second-order and must not be bound inside `f`;
    size and quantifier rank are preserved (atoms map to atoms).
    """
    _check_so(l_target, "substitute_letter_atoms")
    _check_so(r_target, "substitute_letter_atoms")
    bound = {node.var.name for node in subformulas(f) if node.var is not None}
    for t in (l_target, r_target):
        if t.name in bound:
            raise CaptureError(f"target {t.name!r} is bound inside the formula")

    memo: dict = {}
    for node in subformulas(f):
        if node.kind == ATOM_LETTER_L:
            memo[id(node)] = member(node.args[0], l_target)
        elif node.kind == ATOM_LETTER_R:
            memo[id(node)] = member(node.args[0], r_target)
        elif any(id(ch) in memo and memo[id(ch)] is not ch for ch in node.children):
            kids = tuple(memo[id(ch)] for ch in node.children)
            memo[id(node)] = Formula(node.kind, children=kids, var=node.var, args=node.args)
        else:
            memo[id(node)] = node
    return memo[id(f)]

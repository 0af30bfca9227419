"""Word models over {l, r} and a direct recursive evaluator.

The evaluator is the semantic reference implementation: plain recursion over
the formula with short-circuiting connectives and quantifier loops.  First-
order values are 1-based positions; second-order values are bitmasks over
positions (bit p-1 set means position p belongs to the set).  Results are
memoized per (subformula, values of its free variables); the memo lives for
one call only, so concurrent evaluations never share state.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Optional, Tuple, Union

from . import formulas as F
from .errors import ArityMismatchError, BadWordError, EvalBudgetExceededError, WordLogicError

DEFAULT_EVAL_BUDGET = 10**8

_WORD_RE = re.compile(r"[lr]+")


def word_from_text(text: str) -> str:
    """Validate a word over {l, r}; the empty word is not a model."""
    if not text:
        raise BadWordError("empty word is not a model")
    m = _WORD_RE.fullmatch(text)
    if not m:
        bad = next(i for i, ch in enumerate(text, start=1) if ch not in "lr")
        raise BadWordError(f"bad character {text[bad - 1]!r} at position {bad}")
    return text


@dataclass(frozen=True)
class Interpretation:
    """A word with r set parameters and s point parameters.

    By convention the set parameters bind the names P1..Pr and the point
    parameters bind p1..ps when the interpretation is evaluated directly.
    """

    word: str
    set_values: Tuple[frozenset, ...] = ()
    point_values: Tuple[int, ...] = ()

    def __post_init__(self):
        word_from_text(self.word)
        n = len(self.word)
        object.__setattr__(self, "set_values", tuple(frozenset(s) for s in self.set_values))
        object.__setattr__(self, "point_values", tuple(self.point_values))
        for s in self.set_values:
            if not all(1 <= p <= n for p in s):
                raise ArityMismatchError(f"set value {sorted(s)} outside positions 1..{n}")
        for p in self.point_values:
            if not (1 <= p <= n):
                raise ArityMismatchError(f"point value {p} outside positions 1..{n}")

    def env(self) -> Dict[str, object]:
        bindings: Dict[str, object] = {}
        for j, s in enumerate(self.set_values, start=1):
            bindings[f"P{j}"] = s
        for j, p in enumerate(self.point_values, start=1):
            bindings[f"p{j}"] = p
        return bindings


def _mask_of(value, n: int) -> int:
    if isinstance(value, int):
        return value
    mask = 0
    for p in value:
        if not (1 <= p <= n):
            raise WordLogicError(f"position {p} outside 1..{n}")
        mask |= 1 << (p - 1)
    return mask


def evaluate(
    model: Union[str, Interpretation],
    phi: F.Formula,
    env: Optional[Dict[str, object]] = None,
    *,
    memoize: bool = True,
    budget: int = DEFAULT_EVAL_BUDGET,
    cache: Optional[dict] = None,
) -> bool:
    """Truth of `phi` on the word model under `env` (name -> value).

    `cache` lets a caller share the memo table across evaluate calls; it is
    only sound for repeated evaluations on the same word, which is checked.
    """
    if isinstance(model, Interpretation):
        word = model.word
        bindings = model.env()
        if env:
            bindings.update(env)
    else:
        word = word_from_text(model)
        bindings = dict(env) if env else {}

    n = len(word)
    values: Dict[str, object] = {}
    for name, value in bindings.items():
        if name[0].isupper():
            values[name] = _mask_of(value, n)
        else:
            if not isinstance(value, int) or not (1 <= value <= n):
                raise WordLogicError(f"bad position {value!r} for variable {name}")
            values[name] = value

    missing = (phi.free1 | phi.free2) - values.keys()
    if missing:
        raise WordLogicError(f"unbound variables: {', '.join(sorted(missing))}")

    is_l = [False] * (n + 1)
    for p, ch in enumerate(word, start=1):
        is_l[p] = ch == "l"

    free_cache: Dict[int, Tuple[str, ...]] = {}
    if cache is not None:
        stamp = cache.setdefault("__word__", word)
        if stamp != word:
            raise WordLogicError("shared evaluation cache reused on a different word")
        memo: Optional[dict] = cache
    else:
        memo = {} if memoize else None
    steps = 0
    full_mask = (1 << n) - 1

    def free_names(node) -> Tuple[str, ...]:
        got = free_cache.get(id(node))
        if got is None:
            got = tuple(sorted(node.free1 | node.free2))
            free_cache[id(node)] = got
        return got

    def ev(node) -> bool:
        nonlocal steps
        steps += 1
        if steps > budget:
            raise EvalBudgetExceededError(f"evaluation budget of {budget} steps exceeded")
        k = node.kind
        if k == "and":
            a, b = node.children
            return ev(a) and ev(b)
        if k == "or":
            a, b = node.children
            return ev(a) or ev(b)
        if k == "not":
            return not ev(node.children[0])
        if k == "lt":
            a, b = node.args
            return values[a.name] < values[b.name]
        if k == "eq":
            a, b = node.args
            return values[a.name] == values[b.name]
        if k == "letter-l":
            return is_l[values[node.args[0].name]]
        if k == "letter-r":
            return not is_l[values[node.args[0].name]]
        if k == "in":
            a, big = node.args
            return (values[big.name] >> (values[a.name] - 1)) & 1 == 1
        if k == "true":
            return True
        if k == "false":
            return False

        # quantifiers; memoized on the restriction of the env to free vars
        key = None
        if memo is not None:
            key = (id(node), tuple(values[nm] for nm in free_names(node)))
            got = memo.get(key)
            if got is not None:
                return got

        name = node.var.name
        child = node.children[0]
        saved = values.get(name)
        if k == "exists1":
            result = False
            for p in range(1, n + 1):
                values[name] = p
                if ev(child):
                    result = True
                    break
        elif k == "forall1":
            result = True
            for p in range(1, n + 1):
                values[name] = p
                if not ev(child):
                    result = False
                    break
        elif k == "exists2":
            result = False
            for mask in range(full_mask + 1):
                values[name] = mask
                if ev(child):
                    result = True
                    break
        else:  # forall2
            result = True
            for mask in range(full_mask + 1):
                values[name] = mask
                if not ev(child):
                    result = False
                    break
        if saved is None:
            values.pop(name, None)
        else:
            values[name] = saved
        if memo is not None:
            memo[key] = result
        return result

    return ev(phi)

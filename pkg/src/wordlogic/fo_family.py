"""First-order formula family defining the ordered encoding of V_i.

Families (one per recursive definition):

  set(i)    pair encodes a set of rank <= i, repetitions allowed
  elem(i)   first pair is a top-level element occurrence inside the second
  sim(i)    the two pairs encode extensionally equal sets
  prec(i)   the greatest element of the symmetric difference is in the right
  oset(i)   like set, but duplicate-free with elements ascending under prec
  add(i)    first pair = second pair plus the singleton of the third
  vlevel(i) pair encodes the set V_i itself
  psi(i)    sentence: the whole word is the ordered encoding of V_i
  psi_no_order(i)  the Löwenheim-Skolem variant: every oset is replaced by
                   set throughout the vlevel recursion, so element order and
                   duplicate-freeness are no longer pinned

Templates use the free variable names x1,x2 / y1,y2 / z1,z2 for their pair
arguments; every binder is suffixed with its family and level, so renaming a
template into an argument position can never capture.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from . import hfsets
from .algebra import AstAlgebra, Metric, MetricAlgebra
from .errors import WordLogicError
from .formulas import Formula
from .words import DEFAULT_EVAL_BUDGET, evaluate

FO_FAMILIES = (
    "set",
    "elem",
    "sim",
    "prec",
    "oset",
    "add",
    "vlevel",
    "psi",
    "psi_no_order",
)

_PAIR = ("x1", "x2")
_CONTAINER = ("y1", "y2")


def _pair_map(template_pair, actual_pair):
    return dict(zip(template_pair, actual_pair))


class _Builder:
    """Generates the family against one algebra, caching each template."""

    def __init__(self, alg):
        self.alg = alg
        self.cache: Dict[Tuple[str, int], object] = {}

    def _memo(self, key, fn):
        got = self.cache.get(key)
        if got is None:
            got = fn()
            self.cache[key] = got
        return got

    # -- the common core shell: x1 < x2, letters, and every interior position
    #    pairs with a partner so that the ordered pair satisfies theta
    def core(self, tag: str, theta):
        alg = self.alg
        y, z, s, t = f"y{tag}", f"z{tag}", f"s{tag}", f"t{tag}"
        inner = alg.conj(
            [
                alg.implies(alg.lt(y, z), alg.and_(alg.eq(s, y), alg.eq(t, z))),
                alg.implies(alg.lt(z, y), alg.and_(alg.eq(s, z), alg.eq(t, y))),
                theta,
            ]
        )
        zbody = alg.conj(
            [
                alg.lt("x1", z),
                alg.lt(z, "x2"),
                alg.neq(y, z),
                alg.exists1(s, alg.exists1(t, inner)),
            ]
        )
        ybody = alg.implies(
            alg.and_(alg.lt("x1", y), alg.lt(y, "x2")), alg.exists1(z, zbody)
        )
        return alg.conj(
            [
                alg.lt("x1", "x2"),
                alg.letter_l("x1"),
                alg.letter_r("x2"),
                alg.forall1(y, ybody),
            ]
        )

    def base_pair(self, tag: str):
        """L(x1) and R(x2) and x2 is the successor of x1."""
        alg = self.alg
        return alg.conj(
            [alg.letter_l("x1"), alg.letter_r("x2"), alg.successor("x1", "x2", f"w{tag}")]
        )

    def set_(self, i: int):
        def build():
            if i == 0:
                return self.base_pair("_set0")
            tag = f"_set{i}"
            theta = self.alg.rename(self.set_(i - 1), _pair_map(_PAIR, (f"s{tag}", f"t{tag}")))
            return self.core(tag, theta)

        return self._memo(("set", i), build)

    def elem(self, i: int):
        def build():
            alg = self.alg
            z1, z2 = f"z1_elem{i}", f"z2_elem{i}"
            blocker = alg.conj(
                [
                    alg.rename(self.set_(i), _pair_map(_PAIR, (z1, z2))),
                    alg.lt("y1", z1),
                    alg.lt(z1, "x1"),
                    alg.lt("x2", z2),
                    alg.lt(z2, "y2"),
                ]
            )
            return alg.conj(
                [
                    alg.lt("y1", "x1"),
                    alg.lt("x1", "x2"),
                    alg.lt("x2", "y2"),
                    alg.not_(alg.exists1(z1, alg.exists1(z2, blocker))),
                ]
            )

        return self._memo(("elem", i), build)

    def _elem_at(self, i, element, container):
        return self.alg.rename(
            self.elem(i), {**_pair_map(_PAIR, element), **_pair_map(_CONTAINER, container)}
        )

    def sim(self, i: int):
        def build():
            alg = self.alg
            if i == 0:
                return alg.true()
            j = i - 1
            a = (f"a1_sim{i}", f"a2_sim{i}")
            b = (f"b1_sim{i}", f"b2_sim{i}")
            inner = alg.conj(
                [
                    alg.rename(self.set_(j), _pair_map(_PAIR, b)),
                    alg.implies(self._elem_at(j, a, _PAIR), self._elem_at(j, b, _CONTAINER)),
                    alg.implies(self._elem_at(j, a, _CONTAINER), self._elem_at(j, b, _PAIR)),
                    alg.rename(self.sim(j), {**_pair_map(_PAIR, a), **_pair_map(_CONTAINER, b)}),
                ]
            )
            body = alg.implies(
                alg.rename(self.set_(j), _pair_map(_PAIR, a)),
                alg.exists1(b[0], alg.exists1(b[1], inner)),
            )
            return alg.forall1(a[0], alg.forall1(a[1], body))

        return self._memo(("sim", i), build)

    def _sim_at(self, i, left, right):
        return self.alg.rename(
            self.sim(i), {**_pair_map(_PAIR, left), **_pair_map(_CONTAINER, right)}
        )

    def prec(self, i: int):
        def build():
            alg = self.alg
            if i == 0:
                return alg.false()
            j = i - 1
            z = (f"z1_prec{i}", f"z2_prec{i}")
            a = (f"a1_prec{i}", f"a2_prec{i}")
            b = (f"b1_prec{i}", f"b2_prec{i}")
            all_of_y_differs = alg.forall1(
                b[0],
                alg.forall1(
                    b[1],
                    alg.implies(
                        alg.and_(
                            alg.rename(self.set_(j), _pair_map(_PAIR, b)),
                            self._elem_at(j, b, _CONTAINER),
                        ),
                        alg.not_(self._sim_at(j, a, b)),
                    ),
                ),
            )
            consequent = alg.and_(
                alg.not_(self._sim_at(j, a, z)),
                alg.implies(
                    all_of_y_differs,
                    alg.rename(
                        self.prec(j), {**_pair_map(_PAIR, a), **_pair_map(_CONTAINER, z)}
                    ),
                ),
            )
            abody = alg.implies(
                alg.and_(
                    alg.rename(self.set_(j), _pair_map(_PAIR, a)), self._elem_at(j, a, _PAIR)
                ),
                consequent,
            )
            return alg.exists1(
                z[0],
                alg.exists1(
                    z[1],
                    alg.conj(
                        [
                            alg.rename(self.set_(j), _pair_map(_PAIR, z)),
                            self._elem_at(j, z, _CONTAINER),
                            alg.forall1(a[0], alg.forall1(a[1], abody)),
                        ]
                    ),
                ),
            )

        return self._memo(("prec", i), build)

    def oset(self, i: int):
        def build():
            alg = self.alg
            if i == 0:
                return self.base_pair("_oset0")
            tag = f"_oset{i}"
            j = i - 1
            theta = alg.rename(self.oset(j), _pair_map(_PAIR, (f"s{tag}", f"t{tag}")))
            a = (f"a1_ord{i}", f"a2_ord{i}")
            b = (f"b1_ord{i}", f"b2_ord{i}")
            ordered = alg.implies(
                alg.conj(
                    [
                        alg.rename(self.set_(j), _pair_map(_PAIR, a)),
                        alg.rename(self.set_(j), _pair_map(_PAIR, b)),
                        self._elem_at(j, a, _PAIR),
                        self._elem_at(j, b, _PAIR),
                        alg.lt(a[0], b[0]),
                    ]
                ),
                alg.rename(self.prec(j), {**_pair_map(_PAIR, a), **_pair_map(_CONTAINER, b)}),
            )
            order_clause = alg.forall1(
                a[0], alg.forall1(a[1], alg.forall1(b[0], alg.forall1(b[1], ordered)))
            )
            return alg.and_(self.core(tag, theta), order_clause)

        return self._memo(("oset", i), build)

    def add(self, i: int):
        def build():
            alg = self.alg
            if i == 0:
                raise WordLogicError("add is defined from level 1 upward")
            j = i - 1
            a = (f"a1_add{i}", f"a2_add{i}")
            b = (f"b1_add{i}", f"b2_add{i}")
            c = (f"c1_add{i}", f"c2_add{i}")
            d = (f"d1_add{i}", f"d2_add{i}")
            e = (f"e1_add{i}", f"e2_add{i}")
            subset = alg.forall1(
                a[0],
                alg.forall1(
                    a[1],
                    alg.implies(
                        alg.and_(
                            alg.rename(self.set_(j), _pair_map(_PAIR, a)),
                            self._elem_at(j, a, _CONTAINER),
                        ),
                        alg.exists1(
                            b[0],
                            alg.exists1(
                                b[1],
                                alg.conj(
                                    [
                                        alg.rename(self.set_(j), _pair_map(_PAIR, b)),
                                        self._elem_at(j, b, _PAIR),
                                        self._sim_at(j, a, b),
                                    ]
                                ),
                            ),
                        ),
                    ),
                ),
            )
            rest_in_y = alg.forall1(
                d[0],
                alg.forall1(
                    d[1],
                    alg.implies(
                        alg.conj(
                            [
                                alg.rename(self.set_(j), _pair_map(_PAIR, d)),
                                self._elem_at(j, d, _PAIR),
                                alg.neq(d[0], c[0]),
                            ]
                        ),
                        alg.exists1(
                            e[0],
                            alg.exists1(
                                e[1],
                                alg.conj(
                                    [
                                        alg.rename(self.set_(j), _pair_map(_PAIR, e)),
                                        self._elem_at(j, e, _CONTAINER),
                                        self._sim_at(j, e, d),
                                    ]
                                ),
                            ),
                        ),
                    ),
                ),
            )
            witness = alg.exists1(
                c[0],
                alg.exists1(
                    c[1],
                    alg.conj(
                        [
                            alg.rename(self.set_(j), _pair_map(_PAIR, c)),
                            self._elem_at(j, c, _PAIR),
                            self._sim_at(j, c, ("z1", "z2")),
                            rest_in_y,
                        ]
                    ),
                ),
            )
            return alg.and_(subset, witness)

        return self._memo(("add", i), build)

    def _add_at(self, i, result, base, extra):
        mapping = {
            **_pair_map(_PAIR, result),
            **_pair_map(_CONTAINER, base),
            **_pair_map(("z1", "z2"), extra),
        }
        return self.alg.rename(self.add(i), mapping)

    def vlevel(self, i: int, ordered: bool = True):
        family = "vlevel" if ordered else "vlevel_no_order"

        def build():
            alg = self.alg
            if i == 0:
                return self.base_pair("_v0")
            tag = f"_v{i}" if ordered else f"_u{i}"
            shell = self.oset(i) if ordered else self.set_(i)
            a = (f"a1{tag}", f"a2{tag}")
            b = (f"b1{tag}", f"b2{tag}")
            first_is_empty = alg.exists1(
                a[0],
                alg.exists1(
                    a[1],
                    alg.and_(
                        alg.rename(self.vlevel(0, ordered), _pair_map(_PAIR, a)),
                        alg.successor("x1", a[0], f"wa{tag}"),
                    ),
                ),
            )
            b_parts = [
                alg.rename(self.vlevel(i - 1, ordered), _pair_map(_PAIR, b)),
                alg.successor(b[1], "x2", f"wb{tag}"),
            ]
            if i >= 2:
                c = (f"c1{tag}", f"c2{tag}")
                d = (f"d1{tag}", f"d2{tag}")
                e = (f"e1{tag}", f"e2{tag}")
                closure_body = alg.implies(
                    alg.conj(
                        [
                            alg.rename(self.set_(i - 1), _pair_map(_PAIR, c)),
                            self._elem_at(i - 1, c, _PAIR),
                            alg.rename(self.set_(i - 2), _pair_map(_PAIR, d)),
                            self._elem_at(i - 2, d, b),
                        ]
                    ),
                    alg.exists1(
                        e[0],
                        alg.exists1(
                            e[1],
                            alg.conj(
                                [
                                    alg.rename(self.set_(i - 1), _pair_map(_PAIR, e)),
                                    self._elem_at(i - 1, e, _PAIR),
                                    self._add_at(i - 1, e, c, d),
                                ]
                            ),
                        ),
                    ),
                )
                b_parts.append(
                    alg.forall1(
                        c[0],
                        alg.forall1(
                            c[1], alg.forall1(d[0], alg.forall1(d[1], closure_body))
                        ),
                    )
                )
            last_is_previous_level = alg.exists1(
                b[0], alg.exists1(b[1], alg.conj(b_parts))
            )
            return alg.conj([shell, first_is_empty, last_is_previous_level])

        return self._memo((family, i), build)

    def psi(self, i: int, ordered: bool = True):
        family = "psi" if ordered else "psi_no_order"

        def build():
            alg = self.alg
            tag = f"_psi{i}" if ordered else f"_psino{i}"
            x, y, z = f"x{tag}", f"y{tag}", f"z{tag}"
            body = alg.conj(
                [
                    alg.le(x, z),
                    alg.le(z, y),
                    alg.rename(self.vlevel(i, ordered), _pair_map(_PAIR, (x, y))),
                ]
            )
            return alg.exists1(x, alg.exists1(y, alg.forall1(z, body)))

        return self._memo((family, i), build)

    def build(self, name: str, i: int):
        if name == "core":
            raise WordLogicError(
                "core is a shared shell; request set or oset, which instantiate it"
            )
        if name not in FO_FAMILIES:
            raise WordLogicError(f"unknown family {name!r}; expected one of {FO_FAMILIES}")
        if i < 0:
            raise WordLogicError("level must be nonnegative")
        if name == "set":
            return self.set_(i)
        if name == "elem":
            return self.elem(i)
        if name == "sim":
            return self.sim(i)
        if name == "prec":
            return self.prec(i)
        if name == "oset":
            return self.oset(i)
        if name == "add":
            return self.add(i)
        if name == "vlevel":
            return self.vlevel(i)
        if name == "psi":
            return self.psi(i)
        return self.psi(i, ordered=False)


_AST = _Builder(AstAlgebra())
_METRIC = _Builder(MetricAlgebra())


def build_fo(name: str, i: int) -> Formula:
    """The family member exactly as constructed, after desugaring."""
    return _AST.build(name, i)


def fo_metrics(name: str, i: int) -> Metric:
    """Exact (size, quantifier rank) without materializing the tree."""
    return _METRIC.build(name, i)


def size_table_fo(max_i: int) -> List[Tuple[int, str, int, int]]:
    """Rows (i, family, size, qr) for every family, 0 <= i <= max_i."""
    if max_i < 1:
        raise WordLogicError("max_i must be at least 1")
    rows = []
    for i in range(max_i + 1):
        for name in FO_FAMILIES:
            if name == "add" and i == 0:
                continue
            m = fo_metrics(name, i)
            rows.append((i, name, m.size, m.qr))
    return rows


def clear_caches():
    _AST.cache.clear()
    _METRIC.cache.clear()


# ------------------------------------------------------------- crosschecking


@dataclass(frozen=True)
class Disagreement:
    family: str
    level: int
    spans: Tuple[Tuple[int, int], ...]
    formula_value: bool
    oracle_value: bool


@dataclass
class CrosscheckReport:
    word: str
    level: int
    checks: int = 0
    disagreements: List[Disagreement] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.disagreements


def _pairs_env(spans):
    names = [_PAIR, _CONTAINER, ("z1", "z2")]
    env = {}
    for (n1, n2), node in zip(names, spans):
        env[n1], env[n2] = node.start, node.end
    return env


def crosscheck_fo(i: int, eval_budget: int = DEFAULT_EVAL_BUDGET) -> CrosscheckReport:
    """Evaluate elem/sim/prec/add on the spans of encode_fo(i) and compare
    with the set oracle.

    elem is compared against the direct-child relation of the parse (that is
    what a top-level element occurrence means on a duplicate-free encoding);
    sim against extensional equality of the decoded sets; prec against the
    symmetric-difference order; add against union with a singleton.  Each
    relation is checked at every level from the least one admitted by the
    operands' ranks up to i.
    """
    word = hfsets.encode_fo(i)
    report = CrosscheckReport(word=word, level=i)
    nodes = hfsets.parse_braces(word).all_nodes()
    cache: dict = {}

    def run(family, level, formula, spans, oracle_value):
        value = evaluate(word, formula, _pairs_env(spans), budget=eval_budget, cache=cache)
        report.checks += 1
        if value != oracle_value:
            report.disagreements.append(
                Disagreement(
                    family,
                    level,
                    tuple((s.start, s.end) for s in spans),
                    value,
                    oracle_value,
                )
            )

    for a in nodes:
        for b in nodes:
            if a is b:
                continue
            ra, rb = a.value.rank, b.value.rank
            child = a in b.children
            for j in range(max(ra, rb - 1), i):
                run("elem", j, _AST.elem(j), (a, b), child)
            for j in range(max(ra, rb), i + 1):
                run("sim", j, _AST.sim(j), (a, b), a.value == b.value)
            for j in range(max(ra, rb, 1), i + 1):
                run("prec", j, _AST.prec(j), (a, b), hfsets.precedes(a.value, b.value))

    for a in nodes:
        for b in nodes:
            for c in nodes:
                lo = max(a.value.rank, b.value.rank, c.value.rank + 1, 1)
                for j in range(lo, i + 1):
                    oracle = a.value == b.value.with_element(c.value)
                    run("add", j, _AST.add(j), (a, b, c), oracle)
    return report

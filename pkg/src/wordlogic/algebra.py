"""Two interpretations of the formula-building vocabulary.

The family generators are written once against this interface.  `AstAlgebra`
materializes real `Formula` objects; `MetricAlgebra` runs the same
construction arithmetically and yields exact (size, quantifier rank) pairs
without allocating trees, which is what makes size tables up to i = 50 cheap.
Variables are referred to by name; the sort follows the case convention.
"""

from __future__ import annotations

from typing import Dict, Iterable, NamedTuple

from . import formulas as F


class Metric(NamedTuple):
    size: int
    qr: int


class AstAlgebra:
    """Builds Formula values."""

    def lt(self, a, b):
        return F.lt(F.var_for_name(a), F.var_for_name(b))

    def eq(self, a, b):
        return F.eq(F.var_for_name(a), F.var_for_name(b))

    def letter_l(self, a):
        return F.letter_l(F.var_for_name(a))

    def letter_r(self, a):
        return F.letter_r(F.var_for_name(a))

    def member(self, a, big):
        return F.member(F.var_for_name(a), F.var_for_name(big))

    def true(self):
        return F.true_()

    def false(self):
        return F.false_()

    def not_(self, f):
        return F.not_(f)

    def and_(self, f, g):
        return F.and_(f, g)

    def or_(self, f, g):
        return F.or_(f, g)

    def exists1(self, v, f):
        return F.exists1(F.var_for_name(v), f)

    def forall1(self, v, f):
        return F.forall1(F.var_for_name(v), f)

    def exists2(self, v, f):
        return F.exists2(F.var_for_name(v), f)

    def forall2(self, v, f):
        return F.forall2(F.var_for_name(v), f)

    def rename(self, f, mapping: Dict[str, str]):
        table = {
            F.var_for_name(old): F.var_for_name(new)
            for old, new in mapping.items()
            if old != new
        }
        return F.rename_free(f, table) if table else f

    # ---- derived forms shared by both algebras

    def conj(self, parts: Iterable):
        parts = list(parts)
        if not parts:
            return self.true()
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = self.and_(p, out)
        return out

    def disj(self, parts: Iterable):
        parts = list(parts)
        if not parts:
            return self.false()
        out = parts[-1]
        for p in reversed(parts[:-1]):
            out = self.or_(p, out)
        return out

    def implies(self, a, b):
        return self.or_(self.not_(a), b)

    def iff(self, a, b):
        return self.and_(self.or_(self.not_(a), b), self.or_(self.not_(b), a))

    def neq(self, a, b):
        return self.not_(self.eq(a, b))

    def le(self, a, b):
        return self.or_(self.lt(a, b), self.eq(a, b))

    def successor(self, a, b, witness):
        return self.and_(
            self.lt(a, b),
            self.not_(self.exists1(witness, self.and_(self.lt(a, witness), self.lt(witness, b)))),
        )


class MetricAlgebra(AstAlgebra):
    """Same construction, but values are (size, qr) pairs."""

    def _atom(self):
        return Metric(1, 0)

    def lt(self, a, b):
        return self._atom()

    def eq(self, a, b):
        return self._atom()

    def letter_l(self, a):
        return self._atom()

    def letter_r(self, a):
        return self._atom()

    def member(self, a, big):
        return self._atom()

    def true(self):
        return self._atom()

    def false(self):
        return self._atom()

    def not_(self, f):
        return Metric(f.size + 1, f.qr)

    def and_(self, f, g):
        return Metric(f.size + g.size + 1, max(f.qr, g.qr))

    or_ = and_

    def _quant(self, v, f):
        return Metric(f.size + 1, f.qr + 1)

    exists1 = forall1 = exists2 = forall2 = _quant

    def rename(self, f, mapping):
        return f

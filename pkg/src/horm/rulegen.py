"""Association rules from count arrays or completed support tables.

Thresholds are compared on integer counts by cross-multiplication, so a
rule sitting exactly on ``minsup`` or ``minconf`` is always kept.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, List, Optional, Tuple

from .constraints import ConstraintExpr, SupportTable, satisfies
from .stream import StreamState, check_threshold, meets, superset_sums
from .taxonomy import ItemCode, format_code

Itemset = Tuple[ItemCode, ...]


@dataclass(frozen=True)
class AssociationRule:
    parent: Optional[ItemCode]
    antecedent: Itemset
    consequent: Itemset
    count_xy: int
    count_x: int
    n: int
    # bitmasks over the parent's children; zero for table rules
    x_mask: int = 0
    y_mask: int = 0

    @property
    def support(self) -> Fraction:
        return Fraction(self.count_xy, self.n)

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.count_xy, self.count_x)

    def sort_key(self):
        return (self.parent or (), self.x_mask, self.y_mask, self.antecedent, self.consequent)

    def describe(self) -> str:
        a = ",".join(map(format_code, self.antecedent))
        c = ",".join(map(format_code, self.consequent))
        return f"{{{a}}} => {{{c}}} supp={self.support} conf={self.confidence}"


def _submasks(mask: int):
    """Non-empty proper submasks of ``mask``."""
    sub = (mask - 1) & mask
    while sub:
        yield sub
        sub = (sub - 1) & mask


def rules_from_class(state: StreamState, c, minsup, minconf) -> List[AssociationRule]:
    minsup = check_threshold(minsup, "minsup")
    minconf = check_threshold(minconf, "minconf")
    ic = state.interest(c)
    n = state.n
    if n == 0:
        return []
    sums = superset_sums(state.arrays[ic.code])
    rules = []
    for f in range(1, 1 << ic.m):
        if f & (f - 1) == 0:
            continue
        cf = int(sums[f])
        if cf == 0 or not meets(cf, n, minsup):
            continue
        for x in _submasks(f):
            cx = int(sums[x])
            if meets(cf, cx, minconf):
                y = f ^ x
                rules.append(
                    AssociationRule(
                        ic.code, ic.children_of_mask(x), ic.children_of_mask(y), cf, cx, n, x, y
                    )
                )
    rules.sort(key=AssociationRule.sort_key)
    return rules


def rules_from_table(table: SupportTable, minconf, b: Optional[ConstraintExpr] = None) -> List[AssociationRule]:
    """Rules from each frequent itemset using table lookups only."""
    minconf = check_threshold(minconf, "minconf")
    rules = []
    for key in sorted(table.frequent, key=lambda k: (len(k), k)):
        if len(key) < 2:
            continue
        if b is not None and not satisfies(frozenset(key), b):
            continue
        cxy = table.count(key)
        for r in range(1, len(key)):
            for x in itertools.combinations(key, r):
                cx = table.count(x)
                if meets(cxy, cx, minconf):
                    y = tuple(i for i in key if i not in x)
                    rules.append(AssociationRule(None, x, y, cxy, cx, table.n))
    rules.sort(key=lambda r: (r.antecedent, r.consequent))
    return rules


def _covers(a: AssociationRule, b: AssociationRule) -> bool:
    """``a`` makes ``b`` redundant: smaller-or-equal antecedent, larger-or-equal consequent."""
    ax, ay = set(a.antecedent), set(a.consequent)
    bx, by = set(b.antecedent), set(b.consequent)
    return ax <= bx and ay >= by and (ax, ay) != (bx, by)


def prune_redundant(rules: Iterable[AssociationRule]) -> List[AssociationRule]:
    """Keep the min-antecedent / max-consequent rules of each support and confidence group."""
    rules = list(rules)
    groups = {}
    for r in rules:
        groups.setdefault((r.parent, r.support, r.confidence), []).append(r)
    kept = []
    for r in rules:
        peers = groups[(r.parent, r.support, r.confidence)]
        if not any(_covers(o, r) for o in peers if o is not r):
            kept.append(r)
    return kept


def covering_rule(rule: AssociationRule, retained: Iterable[AssociationRule]) -> Optional[AssociationRule]:
    for r in retained:
        if (
            r.parent == rule.parent
            and r.support == rule.support
            and r.confidence == rule.confidence
            and set(r.antecedent) <= set(rule.antecedent)
            and set(r.consequent) >= set(rule.consequent)
        ):
            return r
    return None


def rules_for_state(state: StreamState, minsup, minconf, prune: bool = False) -> List[AssociationRule]:
    out = []
    for code in state.codes:
        rules = rules_from_class(state, code, minsup, minconf)
        out.extend(prune_redundant(rules) if prune else rules)
    return out


__all__ = [
    "AssociationRule",
    "rules_from_class",
    "rules_from_table",
    "prune_redundant",
    "covering_rule",
    "rules_for_state",
]

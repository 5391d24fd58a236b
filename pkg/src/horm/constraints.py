"""Boolean item constraints and constrained frequent-itemset mining.

A constraint is kept in disjunctive normal form: a list of disjuncts, each a
conjunction of literals. A literal names a taxonomy node and may widen it
to the node's ancestors or descendants (the node itself always included)
and may be negated.

Three mining strategies return the same frequent, constraint-satisfying
itemsets and differ only in which candidates get counted:

``discard``
    plain level-wise mining, then drop itemsets that fail the constraint.
``selected``
    count only candidates that contain an item of the selected set ``S``.
``direct``
    grow itemsets in code order and count a candidate only while some
    extension with larger frequent items could still satisfy the constraint.
"""

from __future__ import annotations

import itertools
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Dict, FrozenSet, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .errors import ConfigError, ConstraintSyntaxError, DataError, IncompleteTableError, UnknownItemError
from .stream import Transaction, check_threshold, meets
from .taxonomy import ClassificationTree, ItemCode, format_code

log = logging.getLogger(__name__)

Itemset = Tuple[ItemCode, ...]

EXACT, ANCESTORS, DESCENDANTS = "exact", "ancestors", "descendants"
STRATEGIES = ("selected", "direct", "discard")


@dataclass(frozen=True)
class Literal:
    target: ItemCode
    positive: bool = True
    modifier: str = EXACT
    # target plus its ancestors/descendants, resolved against the tree
    members: FrozenSet[ItemCode] = field(default=frozenset(), compare=False, repr=False)

    def holds(self, itemset: FrozenSet[ItemCode]) -> bool:
        hit = not self.members.isdisjoint(itemset)
        return hit if self.positive else not hit

    def text(self, tree: Optional[ClassificationTree] = None) -> str:
        name = tree.label(self.target) if tree is not None else format_code(self.target)
        if self.modifier == ANCESTORS:
            name = f"anc({name})"
        elif self.modifier == DESCENDANTS:
            name = f"desc({name})"
        return name if self.positive else "!" + name


@dataclass(frozen=True)
class ConstraintExpr:
    disjuncts: Tuple[Tuple[Literal, ...], ...]

    def __post_init__(self):
        if not self.disjuncts or any(not d for d in self.disjuncts):
            raise ConfigError("constraint needs at least one non-empty disjunct")

    def text(self, tree: Optional[ClassificationTree] = None) -> str:
        return " | ".join(" & ".join(lit.text(tree) for lit in d) for d in self.disjuncts)


def literal(tree: ClassificationTree, target: ItemCode, positive: bool = True, modifier: str = EXACT) -> Literal:
    tree.check(target)
    if modifier == EXACT:
        members = {target}
    elif modifier == DESCENDANTS:
        members = set(tree.subtree(target))
    elif modifier == ANCESTORS:
        members = {target[:i] for i in range(1, len(target) + 1)}
    else:
        raise ConfigError(f"unknown literal modifier {modifier!r}")
    return Literal(target, positive, modifier, frozenset(members))


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<op>[&|!()])|(?P<word>[^\s&|!()]+))")
_MODIFIERS = {
    "anc": ANCESTORS,
    "ancestors": ANCESTORS,
    "desc": DESCENDANTS,
    "descendants": DESCENDANTS,
}


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:  # pragma: no cover - the pattern accepts any non-space run
            raise ConstraintSyntaxError("unexpected character", pos)
        kind = "op" if m.group("op") else "word"
        out.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str, tree: ClassificationTree):
        self.text = text
        self.tree = tree
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.next()
        if val != value or kind != "op":
            raise ConstraintSyntaxError(f"expected {value!r}", pos)

    def parse(self):
        dnf = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ConstraintSyntaxError("unexpected token", pos)
        return dnf

    def expr(self):
        dnf = self.conj()
        while self.peek()[1] == "|" and self.peek()[0] == "op":
            self.next()
            dnf = dnf + self.conj()
        return dnf

    def conj(self):
        dnf = self.unary()
        while self.peek()[1] == "&" and self.peek()[0] == "op":
            self.next()
            right = self.unary()
            dnf = [a + b for a in dnf for b in right]
        return dnf

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "op" and val == "!":
            self.next()
            nkind, nval, npos = self.peek()
            if nkind == "op" and nval == "(":
                raise ConstraintSyntaxError("negation applies to a single item", npos)
            lit = self.atom()
            return [[Literal(lit.target, False, lit.modifier, lit.members)]]
        if kind == "op" and val == "(":
            self.next()
            dnf = self.expr()
            self.expect(")")
            return dnf
        return [[self.atom()]]

    def name(self):
        """One item name; adjacent words form a multi-word label."""
        kind, val, pos = self.next()
        if kind != "word":
            raise ConstraintSyntaxError("expected item", pos)
        words = [val]
        while self.peek()[0] == "word":
            words.append(self.next()[1])
        return " ".join(words), pos

    def atom(self) -> Literal:
        kind, val, pos = self.peek()
        modifier = EXACT
        nxt = self.toks[self.i + 1] if kind == "word" else None
        if kind == "word" and val.lower() in _MODIFIERS and nxt[:2] == ("op", "("):
            modifier = _MODIFIERS[val.lower()]
            self.i += 2
            val, pos = self.name()
            self.expect(")")
        else:
            val, pos = self.name()
        try:
            code = self.tree.resolve(val)
        except UnknownItemError as exc:
            raise UnknownItemError(f"{exc} at offset {pos}") from None
        return literal(self.tree, code, True, modifier)


def parse_constraint(text: str, tree: ClassificationTree) -> ConstraintExpr:
    """Parse ``a & b | !desc(c)`` style input into DNF.

    Parenthesised groups are distributed into DNF; ``!`` may only prefix a
    single item, ``anc(...)`` or ``desc(...)``.
    """
    dnf = _Parser(text, tree).parse()
    disjuncts = []
    for conj in dnf:
        seen = []
        for lit in conj:
            if lit not in seen:
                seen.append(lit)
        if tuple(seen) not in disjuncts:
            disjuncts.append(tuple(seen))
    return ConstraintExpr(tuple(disjuncts))


def satisfies(itemset: Iterable[ItemCode], b: ConstraintExpr, tree: Optional[ClassificationTree] = None) -> bool:
    items = itemset if isinstance(itemset, (set, frozenset)) else frozenset(itemset)
    return any(all(lit.holds(items) for lit in d) for d in b.disjuncts)


# -- selected items --------------------------------------------------------


def _literal_cover(lit: Literal, universe: FrozenSet[ItemCode]) -> FrozenSet[ItemCode]:
    if lit.positive:
        return lit.members & universe
    return universe - lit.members


def selected_items(
    b: ConstraintExpr,
    universe: Iterable[ItemCode],
    supports: Mapping[ItemCode, int],
) -> Set[ItemCode]:
    """Minimum-support item set ``S`` hit by every itemset that satisfies ``b``.

    One literal is picked from each disjunct; a positive literal contributes
    its members, a negative one everything in the universe except its
    members. Every combination is tried; ties go to the smaller set, then
    to the lexicographically smaller sorted item list.
    """
    universe = frozenset(universe)
    options = []
    for d in b.disjuncts:
        opts = sorted({_literal_cover(lit, universe) for lit in d}, key=lambda s: sorted(s))
        options.append(opts)

    best_key = None
    best: FrozenSet[ItemCode] = frozenset()
    for combo in itertools.product(*options):
        s = frozenset().union(*combo)
        key = (sum(supports.get(i, 0) for i in s), len(s), sorted(s))
        if best_key is None or key < best_key:
            best_key, best = key, s
    if universe and best == universe:
        log.warning("selected items cover the whole universe; the constraint does not prune")
    return set(best)


# -- support tables --------------------------------------------------------


def canonical(itemset: Iterable[ItemCode]) -> Itemset:
    return tuple(sorted(set(itemset)))


@dataclass
class SupportTable:
    n: int
    counts: Dict[Itemset, int]
    frequent: FrozenSet[Itemset]
    rule_complete: bool = False
    stats: dict = field(default_factory=dict, compare=False, repr=False)

    def count(self, itemset: Iterable[ItemCode]) -> int:
        key = canonical(itemset)
        try:
            return self.counts[key]
        except KeyError:
            raise IncompleteTableError(
                "incomplete support table: no entry for {" + ", ".join(map(format_code, key)) + "}"
            ) from None

    def support(self, itemset: Iterable[ItemCode]) -> Fraction:
        return Fraction(self.count(itemset), self.n)

    def frequent_items(self) -> List[Tuple[Itemset, int]]:
        return [(k, self.counts[k]) for k in sorted(self.frequent, key=lambda k: (len(k), k))]


def _load(dataset) -> List[FrozenSet[ItemCode]]:
    out = []
    for t in dataset:
        out.append(t.items if isinstance(t, Transaction) else frozenset(t))
    return out


def _count(transactions: Sequence[FrozenSet[ItemCode]], candidates: Iterable[Itemset]) -> Dict[Itemset, int]:
    cands = {c: frozenset(c) for c in candidates}
    counts = dict.fromkeys(cands, 0)
    if not cands:
        return counts
    k = len(next(iter(cands)))
    same_size = all(len(c) == k for c in cands)
    for t in transactions:
        if same_size and len(t) >= k and comb(len(t), k) < len(cands):
            for combo in itertools.combinations(sorted(t), k):
                if combo in counts:
                    counts[combo] += 1
        else:
            for c, cs in cands.items():
                if cs <= t:
                    counts[c] += 1
    return counts


def _singletons(transactions) -> Counter:
    c: Counter = Counter()
    for t in transactions:
        c.update(t)
    return c


def _apriori_candidates(level: Set[Itemset]) -> Set[Itemset]:
    out = set()
    prev = sorted(level)
    for a, b in itertools.combinations(prev, 2):
        if a[:-1] != b[:-1]:
            continue
        cand = a + (b[-1],) if a[-1] < b[-1] else b + (a[-1],)
        if all(cand[:i] + cand[i + 1 :] in level for i in range(len(cand))):
            out.add(cand)
    return out


def _mine_discard(transactions, n, minsup, b, stats):
    singles = _singletons(transactions)
    stats["candidates"].append(len(singles))
    frequent: Dict[Itemset, int] = {}
    level = {(i,): c for i, c in singles.items() if meets(c, n, minsup)}
    while level:
        frequent.update(level)
        cands = _apriori_candidates(set(level))
        if not cands:
            break
        stats["candidates"].append(len(cands))
        counts = _count(transactions, cands)
        level = {c: k for c, k in counts.items() if meets(k, n, minsup)}
    stats["frequent_unconstrained"] = len(frequent)
    if b is None:
        return frequent
    return {k: v for k, v in frequent.items() if satisfies(frozenset(k), b)}


def _mine_selected(transactions, n, minsup, b, stats):
    singles = _singletons(transactions)
    stats["candidates"].append(len(singles))
    s = selected_items(b, singles.keys(), singles)
    stats["selected_items"] = [format_code(i) for i in sorted(s)]
    f1 = sorted(i for i, c in singles.items() if meets(c, n, minsup))
    out: Dict[Itemset, int] = {}
    level = {(i,): singles[i] for i in f1 if i in s}
    while level:
        out.update(level)
        cands = set()
        for x in level:
            for i in f1:
                if i in x:
                    continue
                cand = tuple(sorted(x + (i,)))
                if cand in cands:
                    continue
                # subsets without a selected item were never counted
                if all(
                    sub in level
                    for sub in itertools.combinations(cand, len(cand) - 1)
                    if not s.isdisjoint(sub)
                ):
                    cands.add(cand)
        if not cands:
            break
        stats["candidates"].append(len(cands))
        counts = _count(transactions, cands)
        level = {c: k for c, k in counts.items() if meets(k, n, minsup)}
    return {k: v for k, v in out.items() if satisfies(frozenset(k), b)}


class _Feasibility:
    """Can an itemset still be extended with larger items to satisfy ``b``?"""

    def __init__(self, b: ConstraintExpr, frequent_items: Sequence[ItemCode]):
        self.plans = []
        for d in b.disjuncts:
            banned = frozenset().union(*(lit.members for lit in d if not lit.positive))
            positives = []
            for lit in d:
                if lit.positive:
                    usable = [i for i in frequent_items if i in lit.members and i not in banned]
                    positives.append((lit.members, max(usable) if usable else None))
            self.plans.append((banned, positives))

    def __call__(self, x: Itemset) -> bool:
        xs = frozenset(x)
        top = x[-1]
        for banned, positives in self.plans:
            if not banned.isdisjoint(xs):
                continue
            if all(not members.isdisjoint(xs) or (best is not None and best > top) for members, best in positives):
                return True
        return False


def _mine_direct(transactions, n, minsup, b, stats):
    singles = _singletons(transactions)
    stats["candidates"].append(len(singles))
    f1 = sorted(i for i, c in singles.items() if meets(c, n, minsup))
    feasible = _Feasibility(b, f1)
    out: Dict[Itemset, int] = {}
    level = {(i,): singles[i] for i in f1 if feasible((i,))}
    while level:
        out.update(level)
        cands = set()
        for x in level:
            for i in f1:
                if i > x[-1] and feasible(x + (i,)):
                    cands.add(x + (i,))
        if not cands:
            break
        stats["candidates"].append(len(cands))
        counts = _count(transactions, cands)
        level = {c: k for c, k in counts.items() if meets(k, n, minsup)}
    return {k: v for k, v in out.items() if satisfies(frozenset(k), b)}


_MINERS = {"selected": _mine_selected, "direct": _mine_direct, "discard": _mine_discard}


def mine_constrained(dataset, tree: ClassificationTree, b: ConstraintExpr, minsup, strategy: str = "selected") -> SupportTable:
    """Frequent itemsets that satisfy ``b``, with exact counts."""
    minsup = check_threshold(minsup, "minsup")
    if strategy not in _MINERS:
        raise ConfigError(f"unknown strategy {strategy!r}; choose from {', '.join(STRATEGIES)}")
    transactions = _load(dataset)
    if not transactions:
        raise DataError("empty dataset")
    stats = {"strategy": strategy, "candidates": []}
    found = _MINERS[strategy](transactions, len(transactions), minsup, b, stats)
    stats["counted"] = sum(stats["candidates"])
    stats["passes"] = len(stats["candidates"])
    stats["frequent"] = len(found)
    return SupportTable(len(transactions), dict(found), frozenset(found), False, stats)


def frequent_itemsets(dataset, minsup) -> Dict[Itemset, int]:
    """Unconstrained level-wise mining; every frequent itemset with its count."""
    minsup = check_threshold(minsup, "minsup")
    transactions = _load(dataset)
    if not transactions:
        raise DataError("empty dataset")
    return _mine_discard(transactions, len(transactions), minsup, None, {"candidates": []})


def complete_subset_supports(dataset, frequents: SupportTable) -> SupportTable:
    """Add exact counts for every subset of every frequent itemset in one scan."""
    missing = set()
    for key in frequents.frequent:
        for r in range(1, len(key)):
            for sub in itertools.combinations(key, r):
                if sub not in frequents.counts:
                    missing.add(sub)
    transactions = _load(dataset)
    counts = dict(frequents.counts)
    if missing:
        tally = dict.fromkeys(missing, 0)
        subs = {m: frozenset(m) for m in missing}
        for t in transactions:
            for m, ms in subs.items():
                if ms <= t:
                    tally[m] += 1
        counts.update(tally)
    stats = dict(frequents.stats)
    stats["phase2_counted"] = len(missing)
    return SupportTable(frequents.n, counts, frequents.frequent, True, stats)


def constraint_selectivity(table_all: Mapping[Itemset, int], b: ConstraintExpr) -> Fraction:
    """Fraction of the given frequent itemsets that satisfy ``b``."""
    if not table_all:
        return Fraction(0)
    hits = sum(1 for k in table_all if satisfies(frozenset(k), b))
    return Fraction(hits, len(table_all))


__all__ = [
    "Literal",
    "ConstraintExpr",
    "SupportTable",
    "STRATEGIES",
    "literal",
    "parse_constraint",
    "satisfies",
    "selected_items",
    "mine_constrained",
    "frequent_itemsets",
    "complete_subset_supports",
    "constraint_selectivity",
    "canonical",
]

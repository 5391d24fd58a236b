"""Temporal association mining between two class subtrees.

For every pair of nodes drawn breadth-first from the two subtrees, the
event sets are joined pairwise. Pairs whose join is larger than the
``min_support`` count are scanned with each temporal pattern, and matches
are tallied per ``(value1, value2, pattern)``. Rules below the count or
confidence thresholds are dropped at the end.
"""

from __future__ import annotations

import logging
from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, Iterable, List, Mapping, Sequence

from .errors import ConfigError, DataError, UnknownItemError
from .stream import as_fraction
from .taxonomy import ClassificationTree, ItemCode, format_code

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Event:
    class_code: ItemCode
    value: str
    t_start: int
    t_end: int

    def __post_init__(self):
        if self.t_start > self.t_end:
            raise ValueError(f"event ends before it starts: {self.t_start} > {self.t_end}")


def _before(a: Event, b: Event) -> bool:
    return a.t_end < b.t_start


def _after(a: Event, b: Event) -> bool:
    return b.t_end < a.t_start


def _equal(a: Event, b: Event) -> bool:
    return a.t_start == b.t_start and a.t_end == b.t_end


def _overlaps(a: Event, b: Event) -> bool:
    return a.t_start < b.t_start <= a.t_end < b.t_end


def _during(a: Event, b: Event) -> bool:
    return b.t_start < a.t_start and a.t_end < b.t_end


PATTERNS: Dict[str, Callable[[Event, Event], bool]] = {
    "before": _before,
    "after": _after,
    "equal": _equal,
    "overlaps": _overlaps,
    "during": _during,
}


def eval_pattern(pattern: str, a: Event, b: Event) -> bool:
    try:
        return PATTERNS[pattern](a, b)
    except KeyError:
        raise ConfigError(f"unknown temporal pattern {pattern!r}") from None


@dataclass(frozen=True)
class TemporalRule:
    class1: ItemCode
    class2: ItemCode
    value1: str
    value2: str
    pattern: str
    count: int
    join_size: int
    value1_pairs: int

    @property
    def support(self) -> Fraction:
        return Fraction(self.count, self.join_size)

    @property
    def confidence(self) -> Fraction:
        return Fraction(self.count, self.value1_pairs)

    def key(self):
        return (self.class1, self.class2, self.value1, self.value2, self.pattern)


def load_events(text: str, tree: ClassificationTree) -> Dict[ItemCode, List[Event]]:
    """Parse ``<class>\\t<value>\\t<t_start>[\\t<t_end>]`` lines, grouped by class."""
    out: Dict[ItemCode, List[Event]] = defaultdict(list)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) not in (3, 4):
            raise DataError("expected <class>TAB<value>TAB<t_start>[TAB<t_end>]", lineno)
        try:
            code = tree.resolve(parts[0])
        except UnknownItemError:
            raise DataError(f"unknown class {parts[0].strip()!r}", lineno) from None
        try:
            start = int(parts[2])
            end = int(parts[3]) if len(parts) == 4 else start
        except ValueError:
            raise DataError("timestamps must be integers", lineno) from None
        if start > end:
            raise DataError(f"t_start {start} is after t_end {end}", lineno)
        out[code].append(Event(code, parts[1], start, end))
    return dict(out)


def format_events(events: Mapping[ItemCode, Sequence[Event]]) -> str:
    lines = []
    for code in sorted(events):
        for e in events[code]:
            lines.append(f"{format_code(code)}\t{e.value}\t{e.t_start}\t{e.t_end}")
    return "".join(line + "\n" for line in lines)


def mine_temporal(
    events: Mapping[ItemCode, Sequence[Event]],
    tree: ClassificationTree,
    class1: ItemCode,
    class2: ItemCode,
    patterns: Iterable[str],
    min_support: int,
    min_confidence=0,
) -> List[TemporalRule]:
    patterns = list(patterns)
    for p in patterns:
        if p not in PATTERNS:
            raise ConfigError(f"unknown temporal pattern {p!r}")
    if min_support < 0:
        raise ConfigError("min_support is a non-negative count")
    min_confidence = as_fraction(min_confidence)
    if not 0 <= min_confidence <= 1:
        raise ConfigError("min_confidence must be in [0, 1]")
    sub1 = tree.subtree(class1)
    sub2 = tree.subtree(class2)
    if not any(events.get(c) for c in sub1) or not any(events.get(c) for c in sub2):
        log.warning("no events under %s or %s", format_code(class1), format_code(class2))
        return []

    checks = [(p, PATTERNS[p]) for p in patterns]
    rules: List[TemporalRule] = []
    for c1 in sub1:
        ev1 = events.get(c1, ())
        if not ev1:
            continue
        for c2 in sub2:
            ev2 = events.get(c2, ())
            join_size = len(ev1) * len(ev2)
            if join_size <= min_support:
                continue
            counts: Counter = Counter()
            for a in ev1:
                for b in ev2:
                    for name, check in checks:
                        if check(a, b):
                            counts[(a.value, b.value, name)] += 1
            per_value = Counter(a.value for a in ev1)
            for (v1, v2, name), count in counts.items():
                rule = TemporalRule(c1, c2, v1, v2, name, count, join_size, per_value[v1] * len(ev2))
                if count >= min_support and rule.confidence >= min_confidence:
                    rules.append(rule)
    rules.sort(key=TemporalRule.key)
    return rules


def parse_class(tree: ClassificationTree, token: str) -> ItemCode:
    try:
        return tree.resolve(token)
    except UnknownItemError:
        raise ConfigError(f"unknown class {token!r}") from None


__all__ = [
    "Event",
    "TemporalRule",
    "PATTERNS",
    "eval_pattern",
    "load_events",
    "format_events",
    "mine_temporal",
    "parse_class",
]


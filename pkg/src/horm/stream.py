"""Single-pass subset counting over a transaction stream.

Each class of interest owns a count array of ``2**m`` cells, one per subset
of its ``m`` children. A transaction bumps exactly one cell per class: the
cell addressed by the bitmask of children its items fall under. Support of
a subset is recovered at query time by summing over all supersets.

Two processing routines share the same state:

* :func:`process_horm` checks the whole transaction against every class.
* :func:`process_mhorm` walks the interest classes as a forest. A class
  whose projection is empty skips its whole sub-forest, and the items a
  class claims are removed before disjoint siblings are matched.

Both leave identical count arrays behind; only ``touches`` differs.
"""

from __future__ import annotations

import copy
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from .errors import ConfigError
from .taxonomy import ClassificationTree, ItemCode, format_code

DEFAULT_BITMASK_BOUND = 24
MAX_BITMASK_BOUND = 63


@dataclass(frozen=True)
class Transaction:
    seq: int
    items: FrozenSet[ItemCode]
    ts: Optional[int] = None

    @classmethod
    def of(cls, items: Iterable[ItemCode], seq: int = 0, ts: Optional[int] = None) -> "Transaction":
        return cls(seq, frozenset(items), ts)


@dataclass
class InterestClass:
    code: ItemCode
    children: Tuple[ItemCode, ...]
    # child index (last path element) -> single-bit mask
    bit_of: Dict[int, int]
    sic_parent: Optional[ItemCode] = None
    sic_children: List["InterestClass"] = field(default_factory=list, repr=False)

    @property
    def m(self) -> int:
        return len(self.children)

    @property
    def full_mask(self) -> int:
        return (1 << self.m) - 1

    def mask_of(self, child_codes: Iterable[ItemCode]) -> int:
        mask = 0
        for child in child_codes:
            if child[:-1] != self.code or child[-1] not in self.bit_of:
                raise ConfigError(f"{format_code(child)} is not a child of {format_code(self.code)}")
            mask |= self.bit_of[child[-1]]
        return mask

    def children_of_mask(self, mask: int) -> Tuple[ItemCode, ...]:
        return tuple(c for j, c in enumerate(self.children) if mask >> j & 1)


def _as_mask(ic: InterestClass, mask) -> int:
    if isinstance(mask, int):
        return mask
    return ic.mask_of(mask)


class StreamState:
    """Count arrays for every interest class plus the stream position."""

    def __init__(self, tree: ClassificationTree, sic: List[InterestClass], bitmask_bound: int):
        self.tree = tree
        self.sic = sic
        self.bitmask_bound = bitmask_bound
        self.arrays: Dict[ItemCode, np.ndarray] = {
            ic.code: np.zeros(1 << ic.m, dtype=np.int64) for ic in sic
        }
        self.n = 0
        self.touches: Counter = Counter()
        self._by_code = {ic.code: ic for ic in sic}
        self.roots = [ic for ic in sic if ic.sic_parent is None]

    def interest(self, code: ItemCode) -> InterestClass:
        try:
            return self._by_code[code]
        except KeyError:
            raise ConfigError(f"{format_code(code)} is not a class of interest") from None

    @property
    def codes(self) -> List[ItemCode]:
        return [ic.code for ic in self.sic]

    @property
    def counter_total(self) -> int:
        return sum(a.size for a in self.arrays.values())

    def copy(self) -> "StreamState":
        return copy.deepcopy(self)

    def same_counts(self, other: "StreamState") -> bool:
        return (
            self.n == other.n
            and self.codes == other.codes
            and all(np.array_equal(self.arrays[c], other.arrays[c]) for c in self.codes)
        )


def new_state(
    tree: ClassificationTree,
    interest_codes: Sequence[ItemCode],
    bitmask_bound: int = DEFAULT_BITMASK_BOUND,
) -> StreamState:
    if not 1 <= bitmask_bound <= MAX_BITMASK_BOUND:
        raise ConfigError(f"bitmask_bound must be in [1, {MAX_BITMASK_BOUND}]")
    seen: Set[ItemCode] = set()
    for code in interest_codes:
        tree.check(code)
        if code in seen:
            raise ConfigError(f"duplicate class of interest {format_code(code)}")
        seen.add(code)
        kids = tree.children(code)
        if not kids:
            raise ConfigError(f"{format_code(code)} is a leaf, not a class")
        if len(kids) > bitmask_bound:
            raise ConfigError(
                f"fanout exceeds bitmask bound: {format_code(code)} has {len(kids)} children "
                f"(bound {bitmask_bound})"
            )
    # sorted index paths put every ancestor before its descendants
    ordered = sorted(seen)
    sic: List[InterestClass] = []
    by_code: Dict[ItemCode, InterestClass] = {}
    for code in ordered:
        kids = tree.children(code)
        parent = next((code[:i] for i in range(len(code) - 1, 0, -1) if code[:i] in seen), None)
        ic = InterestClass(code, kids, {k[-1]: 1 << j for j, k in enumerate(kids)}, parent)
        sic.append(ic)
        by_code[code] = ic
        if parent is not None:
            by_code[parent].sic_children.append(ic)
    return StreamState(tree, sic, bitmask_bound)


def _items_of(t) -> Iterable[ItemCode]:
    return t.items if isinstance(t, Transaction) else t


def _partition(items, ic: InterestClass):
    """One scan: (mask, items under ic, items not under ic)."""
    code = ic.code
    d = len(code)
    bit_of = ic.bit_of
    mask = 0
    inside = []
    rest = []
    for it in items:
        if it[:d] == code:
            mask |= bit_of[it[d]]
            inside.append(it)
        else:
            rest.append(it)
    return mask, inside, rest


def _mask_only(items, ic: InterestClass) -> int:
    code = ic.code
    d = len(code)
    bit_of = ic.bit_of
    mask = 0
    for it in items:
        if it[:d] == code:
            mask |= bit_of[it[d]]
    return mask


def project(state: StreamState, t, c, algo: str = "project") -> Tuple[int, FrozenSet[ItemCode]]:
    """Bitmask of ``c``'s children present in ``t`` and the items under ``c``.

    Every item examined is charged to ``state.touches[algo]``.
    """
    ic = c if isinstance(c, InterestClass) else state.interest(c)
    items = list(_items_of(t))
    mask, inside, _ = _partition(items, ic)
    state.touches[algo] += len(items)
    return mask, frozenset(inside)


def process_horm(state: StreamState, t) -> int:
    """Baseline update; returns the number of item tests performed."""
    items = list(_items_of(t))
    state.n += 1
    if not items:
        return 0
    arrays = state.arrays
    for ic in state.sic:
        mask = _mask_only(items, ic)
        if mask:
            arrays[ic.code][mask] += 1
    touched = len(items) * len(state.sic)
    state.touches["horm"] += touched
    return touched


def _mhorm_group(arrays, classes: List[InterestClass], items: List[ItemCode]) -> int:
    touched = 0
    for ic in classes:
        if not items:
            break
        mask, inside, rest = _partition(items, ic)
        touched += len(items)
        if mask:
            arrays[ic.code][mask] += 1
            if ic.sic_children:
                touched += _mhorm_group(arrays, ic.sic_children, inside)
            # classes later in this group are disjoint from ic
            items = rest
    return touched


def process_mhorm(state: StreamState, t) -> int:
    """Hierarchy-aware counting with transaction reduction."""
    items = list(_items_of(t))
    state.n += 1
    touched = _mhorm_group(state.arrays, state.roots, items)
    state.touches["mhorm"] += touched
    return touched


PROCESSORS = {"horm": process_horm, "mhorm": process_mhorm}


def superset_sums(cells: np.ndarray) -> np.ndarray:
    """``out[s] = sum(cells[t] for t ⊇ s)`` via the subset-sum transform."""
    out = np.array(cells, dtype=np.int64, copy=True)
    m = out.size.bit_length() - 1
    for bit in range(m):
        view = out.reshape(-1, 2, 1 << bit)
        view[:, 0, :] += view[:, 1, :]
    return out


def support_count(state: StreamState, c, mask) -> int:
    ic = c if isinstance(c, InterestClass) else state.interest(c)
    mask = _as_mask(ic, mask)
    if mask == 0:
        raise ConfigError("support of the empty subset is undefined")
    if mask & ~ic.full_mask:
        raise ConfigError(f"mask {mask:#x} out of range for {format_code(ic.code)}")
    cells = state.arrays[ic.code]
    free = ic.full_mask & ~mask
    total = 0
    sub = free
    # enumerate every superset mask | sub of the query mask
    while True:
        total += int(cells[mask | sub])
        if sub == 0:
            break
        sub = (sub - 1) & free
    return total


def support(state: StreamState, c, mask) -> Fraction:
    if state.n == 0:
        raise ConfigError("support is undefined before any transaction")
    return Fraction(support_count(state, c, mask), state.n)


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(repr(value))
    return Fraction(value)


def check_threshold(value, name: str = "threshold") -> Fraction:
    try:
        frac = as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"{name} is not a number: {value!r}") from None
    if not 0 < frac <= 1:
        raise ConfigError(f"{name} must be in (0, 1], got {value}")
    return frac


def meets(count: int, n: int, threshold: Fraction) -> bool:
    """``count / n >= threshold`` without floating point."""
    return count * threshold.denominator >= threshold.numerator * n


def frequent_subsets(state: StreamState, c, minsup) -> Set[int]:
    minsup = check_threshold(minsup, "minsup")
    ic = c if isinstance(c, InterestClass) else state.interest(c)
    if state.n == 0:
        return set()
    sums = superset_sums(state.arrays[ic.code])
    # count * den >= num * n, vectorised
    ok = sums * minsup.denominator >= minsup.numerator * state.n
    ok[0] = False
    return {int(i) for i in np.flatnonzero(ok)}


__all__ = [
    "Transaction",
    "InterestClass",
    "StreamState",
    "new_state",
    "project",
    "process_horm",
    "process_mhorm",
    "PROCESSORS",
    "superset_sums",
    "support",
    "support_count",
    "frequent_subsets",
    "as_fraction",
    "check_threshold",
    "meets",
]

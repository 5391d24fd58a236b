"""Seeded synthetic taxonomies, transaction streams and event files.

All randomness comes from one :class:`random.Random` seeded by the caller,
so the same parameters always produce the same bytes.
"""

from __future__ import annotations

import itertools
import random
import string
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .errors import ConfigError
from .stream import Transaction
from .taxonomy import ClassificationTree, ItemCode, format_code, parse_code
from .temporal import Event


@dataclass(frozen=True)
class Plant:
    """Make ``dst`` co-occur with ``src`` with probability ``p``.

    Transactions touching ``src`` get an item under ``dst`` with probability
    ``p`` and lose every ``dst`` item otherwise, which pins the class-level
    confidence of ``{src} => {dst}`` near ``p``.
    """

    src: ItemCode
    dst: ItemCode
    p: float

    @classmethod
    def parse(cls, text: str) -> "Plant":
        try:
            src, dst, p = text.split(":")
            plant = cls(parse_code(src), parse_code(dst), float(p))
        except ValueError:
            raise ConfigError(f"plant must look like SRC:DST:P, got {text!r}") from None
        if not 0 <= plant.p <= 1:
            raise ConfigError("plant probability must be in [0, 1]")
        return plant


def _label(code: ItemCode) -> str:
    head = string.ascii_uppercase[code[0]] if code[0] < 26 else f"C{code[0]}"
    return head + "".join(f"-{i}" for i in code[1:])


def generate_taxonomy(fanout: int, depth: int, items: Optional[int] = None) -> ClassificationTree:
    """The first ``items`` leaves of a complete ``fanout``-ary tree plus their ancestors."""
    if fanout < 1 or depth < 1:
        raise ConfigError("fanout and depth must be positive")
    capacity = fanout ** depth
    if items is None:
        items = capacity
    if items < 1:
        raise ConfigError("need at least one item")
    if items > capacity:
        raise ConfigError(f"{items} items do not fit in fanout {fanout} and depth {depth} (max {capacity})")
    labels: Dict[ItemCode, str] = {}
    for k in range(items):
        digits = []
        for _ in range(depth):
            k, r = divmod(k, fanout)
            digits.append(r)
        leaf = tuple(reversed(digits))
        for i in range(1, depth + 1):
            labels.setdefault(leaf[:i], _label(leaf[:i]))
    return ClassificationTree(labels, max(fanout, 16))


def _under(item: ItemCode, cls: ItemCode) -> bool:
    return item[: len(cls)] == cls


def generate_transactions(
    tree: ClassificationTree,
    n: int,
    seed: int,
    avg_items: float = 4.0,
    skew: float = 1.0,
    plants: Sequence[Plant] = (),
    timestamps: bool = False,
) -> List[Transaction]:
    """Transactions of 1 to ``2*avg_items - 1`` leaves drawn with Zipf-like weights."""
    rng = random.Random(seed)
    leaves = tree.leaves()
    if not leaves:
        raise ConfigError("taxonomy has no items")
    for plant in plants:
        for code in (plant.src, plant.dst):
            tree.check(code)
    ranks = list(range(len(leaves)))
    rng.shuffle(ranks)
    cum = list(itertools.accumulate(1.0 / (r + 1) ** skew for r in ranks))
    max_size = max(1, min(len(leaves), int(round(2 * avg_items - 1))))
    out = []
    for seq in range(n):
        size = rng.randint(1, max_size)
        chosen = set()
        for leaf in rng.choices(leaves, cum_weights=cum, k=4 * size):
            chosen.add(leaf)
            if len(chosen) >= size:
                break
        for plant in plants:
            if any(_under(i, plant.src) for i in chosen):
                if rng.random() < plant.p:
                    if not any(_under(i, plant.dst) for i in chosen):
                        pool = [leaf for leaf in leaves if _under(leaf, plant.dst)]
                        chosen.add(rng.choice(pool))
                else:
                    chosen = {i for i in chosen if not _under(i, plant.dst)}
        out.append(Transaction(seq, frozenset(chosen), seq if timestamps else None))
    return out


def generate_events(
    tree: ClassificationTree,
    classes: Sequence[ItemCode],
    per_class: int,
    seed: int,
    values: Sequence[str] = ("lo", "hi"),
    horizon: int = 100,
    max_len: int = 5,
) -> Dict[ItemCode, List[Event]]:
    rng = random.Random(seed)
    out: Dict[ItemCode, List[Event]] = {}
    for code in classes:
        tree.check(code)
        evs = []
        for _ in range(per_class):
            start = rng.randint(0, horizon)
            evs.append(Event(code, rng.choice(list(values)), start, start + rng.randint(0, max_len)))
        out[code] = evs
    return out


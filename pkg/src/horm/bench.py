"""HORM vs MHORM and discard vs selected/direct comparison workloads."""

from __future__ import annotations

import itertools
import math
import time
from fractions import Fraction
from typing import Dict, List, Optional, Sequence

from .constraints import (
    ConstraintExpr,
    constraint_selectivity,
    frequent_itemsets,
    literal,
    mine_constrained,
)
from .datagen import generate_taxonomy, generate_transactions
from .stream import new_state, process_horm, process_mhorm
from .taxonomy import ItemCode, format_code

# deep chain under class 0 plus three disjoint top-level classes
NESTED_SIC = [(0,), (0, 0), (0, 0, 0), (1,), (2,), (3,)]


def stream_workload(seed: int, n: int, fanout: int = 4, depth: int = 4, avg_items: float = 3.0):
    tree = generate_taxonomy(fanout, depth)
    return tree, generate_transactions(tree, n, seed, avg_items=avg_items, skew=0.5)


def run_stream_bench(
    seed: int = 0,
    n: int = 5000,
    sic: Optional[Sequence[ItemCode]] = None,
    workload=None,
) -> Dict:
    tree, transactions = workload if workload is not None else stream_workload(seed, n)
    sic = list(sic) if sic is not None else NESTED_SIC
    horm = new_state(tree, sic)
    mhorm = new_state(tree, sic)

    per_txn_h = [process_horm(horm, t) for t in transactions]
    per_txn_m = [process_mhorm(mhorm, t) for t in transactions]

    timing = {}
    for name, fn in (("horm", process_horm), ("mhorm", process_mhorm)):
        scratch = new_state(tree, sic)
        start = time.perf_counter()
        for t in transactions:
            fn(scratch, t)
        timing[name] = time.perf_counter() - start

    strict = sum(1 for h, m in zip(per_txn_h, per_txn_m) if m < h)
    worse = sum(1 for h, m in zip(per_txn_h, per_txn_m) if m > h)
    th, tm = horm.touches["horm"], mhorm.touches["mhorm"]
    return {
        "transactions": len(transactions),
        "sic": [format_code(c) for c in sic],
        "touches_horm": th,
        "touches_mhorm": tm,
        "touch_ratio": tm / th if th else 1.0,
        "strictly_fewer_fraction": strict / len(transactions) if transactions else 0.0,
        "more_touches_transactions": worse,
        "counts_equal": horm.same_counts(mhorm),
        "seconds_horm": timing["horm"],
        "seconds_mhorm": timing["mhorm"],
    }


def constrained_workload(seed: int, n: int = 1000):
    tree = generate_taxonomy(8, 2)
    return tree, generate_transactions(tree, n, seed, avg_items=5.0, skew=0.7)


def pick_constraint(tree, frequents: Dict, target: float) -> ConstraintExpr:
    """Single item or item pair whose selectivity is closest to ``target`` on a log scale."""
    items = sorted({i for k in frequents for i in k})
    options = [(i,) for i in items] + list(itertools.combinations(items, 2))
    best, best_gap = None, math.inf
    total = len(frequents)
    for opt in options:
        hits = sum(1 for k in frequents if set(opt) <= set(k))
        if hits == 0:
            continue
        gap = abs(math.log(hits / total) - math.log(target))
        if gap < best_gap:
            best, best_gap = opt, gap
    lits = tuple(literal(tree, i) for i in best)
    return ConstraintExpr((lits,))


def run_constrained_bench(
    seed: int = 0,
    n: int = 1000,
    minsup: Fraction = Fraction(1, 100),
    selectivities: Sequence[float] = (0.1, 0.01),
) -> List[Dict]:
    tree, transactions = constrained_workload(seed, n)
    freq = frequent_itemsets(transactions, minsup)
    reports = []
    for target in selectivities:
        b = pick_constraint(tree, freq, target)
        row = {
            "target_selectivity": target,
            "constraint": b.text(),
            "selectivity": float(constraint_selectivity(freq, b)),
            "frequent_unconstrained": len(freq),
        }
        tables = {}
        for strategy in ("discard", "selected", "direct"):
            start = time.perf_counter()
            table = mine_constrained(transactions, tree, b, minsup, strategy)
            row[f"seconds_{strategy}"] = time.perf_counter() - start
            row[f"candidates_{strategy}"] = table.stats["counted"]
            tables[strategy] = table
        row["tables_equal"] = tables["discard"] == tables["selected"] == tables["direct"]
        row["candidate_ratio_selected"] = row["candidates_discard"] / max(1, row["candidates_selected"])
        row["candidate_ratio_direct"] = row["candidates_discard"] / max(1, row["candidates_direct"])
        row["speedup_selected"] = row["seconds_discard"] / max(1e-9, row["seconds_selected"])
        reports.append(row)
    return reports

"""Command-line front end.

Exit codes: 0 success, 1 bad input data, 2 bad usage or configuration.
Tables are TSV with a ``#`` header; ``--stats`` appends one ``#stats``
line holding a JSON object (wall time and memory live only there).
"""

from __future__ import annotations

import argparse
import contextlib
import json
import logging
import resource
import sys
import time
from fractions import Fraction
from typing import Iterable, List, Optional, TextIO

from . import bench as benchmod
from .constraints import STRATEGIES, complete_subset_supports, mine_constrained, parse_constraint
from .datagen import Plant, generate_taxonomy, generate_transactions
from .errors import ConfigError, ConstraintSyntaxError, HormError, UnknownItemError
from .rulegen import AssociationRule, prune_redundant, rules_from_class, rules_from_table
from .snapshot import read_snapshot, write_snapshot
from .stream import PROCESSORS, as_fraction, check_threshold, frequent_subsets, new_state, support_count
from .streamio import read_transactions, write_transactions
from .taxonomy import ClassificationTree, format_code, metrics_report, parse_taxonomy, serialize_taxonomy
from .temporal import PATTERNS, load_events, mine_temporal, parse_class

log = logging.getLogger("horm")

EXIT_OK, EXIT_DATA, EXIT_USAGE = 0, 1, 2

RULE_HEADER = "# kind\tclass\tantecedent\tconsequent\tcount\tsupport\tconfidence"


def _codes(items) -> str:
    return ",".join(format_code(i) for i in items)


def _load_tree(path: Optional[str]) -> ClassificationTree:
    if not path:
        raise ConfigError("--taxonomy is required")
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy(fh.read())


@contextlib.contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, encoding="utf-8") as fh:
            yield fh


@contextlib.contextmanager
def _open_out(path: Optional[str]):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def _peak_rss_kb() -> int:
    return resource.getrusage(resource.RUSAGE_SELF).ru_maxrss


def _emit_stats(out: TextIO, stats: dict) -> None:
    out.write("#stats\t" + json.dumps(stats, sort_keys=True) + "\n")


def _rule_row(kind: str, parent, x, y, count: int, supp, conf) -> str:
    cls = format_code(parent) if parent else "-"
    return f"{kind}\t{cls}\t{_codes(x)}\t{_codes(y) if y else '-'}\t{count}\t{supp}\t{conf if conf is not None else '-'}"


def _write_rule(out: TextIO, r: AssociationRule) -> None:
    out.write(_rule_row("rule", r.parent, r.antecedent, r.consequent, r.count_xy, r.support, r.confidence) + "\n")


def _write_state_tables(out: TextIO, state, minsup, minconf, prune: bool) -> int:
    out.write(RULE_HEADER + "\n")
    emitted = 0
    for ic in state.sic:
        if state.n:
            for mask in sorted(frequent_subsets(state, ic.code, minsup)):
                count = support_count(state, ic, mask)
                out.write(
                    _rule_row("itemset", ic.code, ic.children_of_mask(mask), (), count,
                              Fraction(count, state.n), None) + "\n"
                )
        rules = rules_from_class(state, ic.code, minsup, minconf)
        if prune:
            rules = prune_redundant(rules)
        for r in rules:
            _write_rule(out, r)
            emitted += 1
    return emitted


def _parse_sic(tree: ClassificationTree, specs: Iterable[str]) -> List:
    codes = []
    for spec in specs:
        for token in spec.split(","):
            if token.strip():
                try:
                    codes.append(tree.resolve(token))
                except UnknownItemError as exc:
                    raise ConfigError(str(exc)) from None
    return codes


# -- commands --------------------------------------------------------------


def cmd_generate(args) -> int:
    plants = [Plant.parse(p) for p in args.plant]
    tree = generate_taxonomy(args.fanout, args.depth, args.items)
    for plant in plants:
        if plant.src not in tree or plant.dst not in tree:
            raise ConfigError("plant classes must exist in the generated taxonomy")
    txns = generate_transactions(
        tree, args.transactions, args.seed, args.avg_items, args.skew, plants, args.timestamps
    )
    if args.taxonomy_out:
        with _open_out(args.taxonomy_out) as fh:
            fh.write(serialize_taxonomy(tree))
    with _open_out(args.output) as fh:
        write_transactions(txns, fh)
    return EXIT_OK


def cmd_mine_stream(args) -> int:
    tree = _load_tree(args.taxonomy)
    minsup = check_threshold(args.minsup, "minsup")
    minconf = check_threshold(args.minconf, "minconf")
    sic = _parse_sic(tree, args.sic)
    if args.resume:
        state = read_snapshot(args.resume, tree)
        if sic and sorted(sic) != state.codes:
            raise ConfigError("--sic differs from the classes stored in the snapshot")
    else:
        if not sic:
            raise ConfigError("--sic is required unless --resume is given")
        state = new_state(tree, sic)
    process = PROCESSORS[args.algo]
    start_n = state.n
    began = time.perf_counter()
    with _open_in(args.input) as fh:
        for t in read_transactions(fh, tree, strict=not args.lenient):
            process(state, t)
    elapsed = time.perf_counter() - began
    if args.snapshot_out:
        write_snapshot(state, args.snapshot_out)
    out = sys.stdout
    emitted = _write_state_tables(out, state, minsup, minconf, args.prune)
    if args.stats:
        _emit_stats(out, {
            "algo": args.algo,
            "n": state.n,
            "processed": state.n - start_n,
            "touches": dict(sorted(state.touches.items())),
            "counters": state.counter_total,
            "classes": len(state.sic),
            "rules": emitted,
            "wall_seconds": round(elapsed, 6),
            "peak_rss_kb": _peak_rss_kb(),
        })
    return EXIT_OK


def cmd_rules(args) -> int:
    tree = _load_tree(args.taxonomy)
    if not args.resume:
        raise ConfigError("rules needs --resume SNAPSHOT")
    minsup = check_threshold(args.minsup, "minsup")
    minconf = check_threshold(args.minconf, "minconf")
    state = read_snapshot(args.resume, tree)
    emitted = _write_state_tables(sys.stdout, state, minsup, minconf, args.prune)
    if args.stats:
        _emit_stats(sys.stdout, {"n": state.n, "rules": emitted, "counters": state.counter_total})
    return EXIT_OK


def cmd_mine_constrained(args) -> int:
    tree = _load_tree(args.taxonomy)
    minsup = check_threshold(args.minsup, "minsup")
    minconf = check_threshold(args.minconf, "minconf")
    if not args.constraint:
        raise ConfigError("--constraint is required")
    b = parse_constraint(args.constraint, tree)
    with _open_in(args.input) as fh:
        data = list(read_transactions(fh, tree, strict=not args.lenient))
    began = time.perf_counter()
    phase1 = mine_constrained(data, tree, b, minsup, args.strategy)
    table = complete_subset_supports(data, phase1)
    rules = rules_from_table(table, minconf, b)
    if args.prune:
        rules = prune_redundant(rules)
    elapsed = time.perf_counter() - began
    out = sys.stdout
    out.write(RULE_HEADER + "\n")
    for key, count in phase1.frequent_items():
        out.write(_rule_row("itemset", None, key, (), count, Fraction(count, table.n), None) + "\n")
    for r in rules:
        _write_rule(out, r)
    if args.stats:
        _emit_stats(out, {
            "strategy": args.strategy,
            "n": table.n,
            "candidates_per_pass": phase1.stats["candidates"],
            "phase1_counted": phase1.stats["counted"],
            "phase2_counted": table.stats["phase2_counted"],
            "selected_items": phase1.stats.get("selected_items"),
            "frequent": len(phase1.frequent),
            "rules": len(rules),
            "wall_seconds": round(elapsed, 6),
        })
    return EXIT_OK


def cmd_temporal(args) -> int:
    tree = _load_tree(args.taxonomy)
    c1 = parse_class(tree, args.class1)
    c2 = parse_class(tree, args.class2)
    patterns = [p.strip() for p in args.patterns.split(",") if p.strip()]
    for p in patterns:
        if p not in PATTERNS:
            raise ConfigError(f"unknown temporal pattern {p!r}")
    with _open_in(args.input) as fh:
        events = load_events(fh.read(), tree)
    rules = mine_temporal(events, tree, c1, c2, patterns, args.min_support, check_conf(args.min_confidence))
    out = sys.stdout
    out.write("# class1\tclass2\tvalue1\tvalue2\tpattern\tcount\tjoin_size\tsupport\tconfidence\n")
    for r in rules:
        out.write(
            f"{format_code(r.class1)}\t{format_code(r.class2)}\t{r.value1}\t{r.value2}\t{r.pattern}\t"
            f"{r.count}\t{r.join_size}\t{r.support}\t{r.confidence}\n"
        )
    if args.stats:
        _emit_stats(out, {"rules": len(rules), "events": sum(len(v) for v in events.values())})
    return EXIT_OK


def check_conf(value):
    try:
        frac = as_fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise ConfigError(f"min-confidence is not a number: {value!r}") from None
    if not 0 <= frac <= 1:
        raise ConfigError("min-confidence must be in [0, 1]")
    return frac


def cmd_metrics(args) -> int:
    tree = _load_tree(args.taxonomy)
    report = metrics_report(tree, args.warn_dit)
    out = sys.stdout
    out.write("# path\tlabel\tdit\tnoc\tflag\n")
    for code, d, n, flagged in report.rows():
        out.write(f"{format_code(code)}\t{tree.label(code)}\t{d}\t{n}\t{'deep' if flagged else '-'}\n")
    out.write(
        f"# max_dit={report.max_dit}\tmax_noc={report.max_noc}\tmean_dit={report.mean_dit}"
        f"\tnodes={len(tree)}\tflagged={len(report.flagged)}\n"
    )
    return EXIT_OK


def cmd_bench(args) -> int:
    out = sys.stdout
    summary = {}
    if args.mode in ("stream", "all"):
        sic = _parse_sic(generate_taxonomy(4, 4), args.sic) if args.sic else None
        s = benchmod.run_stream_bench(args.seed, args.transactions, sic)
        summary["stream"] = s
        out.write("# stream\tsic\ttransactions\ttouches_horm\ttouches_mhorm\tratio\tstrict_fraction\tcounts_equal\n")
        out.write(
            f"stream\t{','.join(s['sic'])}\t{s['transactions']}\t{s['touches_horm']}\t{s['touches_mhorm']}\t"
            f"{s['touch_ratio']:.4f}\t{s['strictly_fewer_fraction']:.4f}\t{s['counts_equal']}\n"
        )
    if args.mode in ("constrained", "all"):
        rows = benchmod.run_constrained_bench(args.seed)
        summary["constrained"] = rows
        out.write("# constrained\ttarget\tselectivity\tconstraint\tcand_discard\tcand_selected\tcand_direct"
                  "\tratio_selected\tratio_direct\ttables_equal\n")
        for r in rows:
            out.write(
                f"constrained\t{r['target_selectivity']}\t{r['selectivity']:.4f}\t{r['constraint']}\t"
                f"{r['candidates_discard']}\t{r['candidates_selected']}\t{r['candidates_direct']}\t"
                f"{r['candidate_ratio_selected']:.2f}\t{r['candidate_ratio_direct']:.2f}\t{r['tables_equal']}\n"
            )
    out.write("#bench\t" + json.dumps(summary, sort_keys=True) + "\n")
    return EXIT_OK


# -- argument parsing ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="horm", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, input_default="-"):
        p.add_argument("--taxonomy", help="taxonomy file (<path>TAB<label> per line)")
        p.add_argument("--input", default=input_default, help="input file, '-' for stdin")
        p.add_argument("--stats", action="store_true", help="append a #stats JSON line")
        p.add_argument("--lenient", action="store_true", help="drop unknown items instead of failing")

    g = sub.add_parser("generate", help="write a synthetic taxonomy and transaction stream")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--fanout", "-M", type=int, default=4)
    g.add_argument("--depth", type=int, default=3)
    g.add_argument("--items", type=int, default=None)
    g.add_argument("--transactions", type=int, default=2000)
    g.add_argument("--avg-items", type=float, default=4.0)
    g.add_argument("--skew", type=float, default=1.0)
    g.add_argument("--plant", action="append", default=[], metavar="SRC:DST:P")
    g.add_argument("--timestamps", action="store_true")
    g.add_argument("--taxonomy-out")
    g.add_argument("--output", default="-")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("mine-stream", help="single-pass mining over a transaction stream")
    common(s)
    s.add_argument("--sic", action="append", default=[], help="classes of interest, comma separated")
    s.add_argument("--minsup", default="0.1")
    s.add_argument("--minconf", default="0.5")
    s.add_argument("--algo", choices=sorted(PROCESSORS), default="mhorm")
    s.add_argument("--snapshot-out")
    s.add_argument("--resume")
    s.add_argument("--prune", action="store_true", help="keep only non-redundant rules")
    s.set_defaults(func=cmd_mine_stream)

    r = sub.add_parser("rules", help="emit rules from a snapshot")
    r.add_argument("--taxonomy")
    r.add_argument("--resume", help="snapshot file")
    r.add_argument("--minsup", default="0.1")
    r.add_argument("--minconf", default="0.5")
    r.add_argument("--prune", action="store_true")
    r.add_argument("--stats", action="store_true")
    r.set_defaults(func=cmd_rules)

    c = sub.add_parser("mine-constrained", help="three-phase mining with a boolean item constraint")
    common(c)
    c.add_argument("--constraint")
    c.add_argument("--strategy", choices=STRATEGIES, default="selected")
    c.add_argument("--minsup", default="0.1")
    c.add_argument("--minconf", default="0.5")
    c.add_argument("--prune", action="store_true")
    c.set_defaults(func=cmd_mine_constrained)

    t = sub.add_parser("temporal", help="temporal association rules between two class subtrees")
    common(t)
    t.add_argument("--class1", required=True)
    t.add_argument("--class2", required=True)
    t.add_argument("--patterns", default=",".join(PATTERNS))
    t.add_argument("--min-support", type=int, default=1)
    t.add_argument("--min-confidence", default="0")
    t.set_defaults(func=cmd_temporal)

    m = sub.add_parser("metrics", help="DIT/NOC report for a taxonomy")
    m.add_argument("--taxonomy")
    m.add_argument("--warn-dit", type=int, default=5)
    m.set_defaults(func=cmd_metrics)

    b = sub.add_parser("bench", help="compare HORM/MHORM and constrained strategies")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--transactions", type=int, default=5000)
    b.add_argument("--mode", choices=("stream", "constrained", "all"), default="all")
    b.add_argument("--sic", action="append", default=[])
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ConstraintSyntaxError, UnknownItemError) as exc:
        print(f"horm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"horm: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except HormError as exc:
        print(f"horm: error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())

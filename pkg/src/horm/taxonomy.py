"""Item classification trees, index-path item codes and DIT/NOC metrics.

Items and classes are addressed by index paths: ``(2, 0, 3)`` is the fourth
child of the first child of top-level class 2, written ``"2.0.3"``. Labels
are display metadata only; every structural query works on the path.
"""

from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from .errors import TaxonomyError, UnknownItemError

ItemCode = Tuple[int, ...]

DEFAULT_FANOUT_BOUND = 16
DEFAULT_DIT_WARN = 5

_PATH_RE = re.compile(r"^\d+(\.\d+)*$")
_FANOUT_DIRECTIVE = re.compile(r"^#\s*fanout_bound\s*[:=]\s*(\d+)\s*$")


def parse_code(text: str) -> ItemCode:
    text = text.strip()
    if not _PATH_RE.match(text):
        raise ValueError(f"not an index path: {text!r}")
    return tuple(int(part) for part in text.split("."))


def format_code(code: ItemCode) -> str:
    return ".".join(str(i) for i in code)


def _norm_label(label: str) -> str:
    return "".join(label.split())


class ClassificationTree:
    """Immutable rooted taxonomy keyed by index path.

    The virtual root is the empty path ``()`` and is never a member.
    """

    def __init__(self, labels: Dict[ItemCode, str], fanout_bound: int = DEFAULT_FANOUT_BOUND):
        if fanout_bound < 1:
            raise TaxonomyError("fanout_bound must be positive")
        self.fanout_bound = fanout_bound
        self._labels: Dict[ItemCode, str] = {}
        children: Dict[ItemCode, List[ItemCode]] = {(): []}
        for code in sorted(labels, key=lambda c: (len(c), c)):
            label = labels[code]
            _check_new_node(code, label, self._labels, children, fanout_bound)
            self._labels[code] = label
            children[code] = []
            children[code[:-1]].append(code)
        self._children = {k: tuple(sorted(v)) for k, v in children.items()}
        self._by_label: Dict[str, List[ItemCode]] = {}
        for code in sorted(self._labels):
            self._by_label.setdefault(_norm_label(self._labels[code]), []).append(code)

    # -- basic queries -------------------------------------------------

    def __contains__(self, code) -> bool:
        return code in self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[ItemCode]:
        return iter(sorted(self._labels))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ClassificationTree):
            return NotImplemented
        return self._labels == other._labels and self.fanout_bound == other.fanout_bound

    def __hash__(self):
        return hash((self.fanout_bound, tuple(sorted(self._labels.items()))))

    def __repr__(self) -> str:
        return f"ClassificationTree({len(self)} nodes, depth={self.depth})"

    @property
    def depth(self) -> int:
        return max((len(c) for c in self._labels), default=0)

    @property
    def top_level(self) -> Tuple[ItemCode, ...]:
        return self._children[()]

    def check(self, code: ItemCode) -> ItemCode:
        if code not in self._labels:
            raise UnknownItemError(f"unknown item code {format_code(code) if isinstance(code, tuple) else code!r}")
        return code

    def label(self, code: ItemCode) -> str:
        return self._labels[self.check(code)]

    def children(self, code: ItemCode) -> Tuple[ItemCode, ...]:
        if code != ():
            self.check(code)
        return self._children[code]

    def is_leaf(self, code: ItemCode) -> bool:
        return not self.children(code)

    def leaves(self) -> List[ItemCode]:
        return [c for c in sorted(self._labels) if not self._children[c]]

    def subtree(self, code: ItemCode) -> List[ItemCode]:
        """Breadth-first listing of ``code`` and all of its descendants."""
        self.check(code)
        out = []
        queue = deque([code])
        while queue:
            node = queue.popleft()
            out.append(node)
            queue.extend(self._children[node])
        return out

    def descendants(self, code: ItemCode) -> List[ItemCode]:
        return self.subtree(code)[1:]

    def resolve(self, token: str) -> ItemCode:
        """Map a dot path or a unique label to an item code.

        A token that looks like a path and names an existing node wins over
        a label lookup. Whitespace inside labels is ignored when matching.
        """
        token = token.strip()
        if _PATH_RE.match(token):
            code = parse_code(token)
            if code in self._labels:
                return code
        hits = self._by_label.get(_norm_label(token), [])
        if len(hits) == 1:
            return hits[0]
        if len(hits) > 1:
            raise UnknownItemError(f"ambiguous label {token!r}")
        raise UnknownItemError(f"unknown item {token!r}")

    def items(self):
        return sorted(self._labels.items())


def _check_new_node(code, label, labels, children, fanout_bound, lineno=None):
    if not code:
        raise TaxonomyError("empty path", lineno)
    if code in labels:
        raise TaxonomyError(f"duplicate path {format_code(code)}", lineno)
    parent = code[:-1]
    if parent and parent not in labels:
        raise TaxonomyError(f"missing parent {format_code(parent)} for {format_code(code)}", lineno)
    if code[-1] >= fanout_bound:
        raise TaxonomyError(
            f"index exceeds fanout: {format_code(code)} (fanout_bound {fanout_bound})", lineno
        )
    siblings = children.get(parent, [])
    if any(labels[s] == label for s in siblings):
        raise TaxonomyError(f"duplicate sibling label {label!r}", lineno)


def parse_taxonomy(text: str, fanout_bound: Optional[int] = None) -> ClassificationTree:
    """Parse ``<path>\\t<label>`` lines into a tree.

    Parents must appear before their children. A ``# fanout_bound: N``
    comment sets the bound unless ``fanout_bound`` is passed explicitly.
    """
    bound = fanout_bound
    labels: Dict[ItemCode, str] = {}
    children: Dict[ItemCode, List[ItemCode]] = {(): []}
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("#"):
            m = _FANOUT_DIRECTIVE.match(line.strip())
            if m and fanout_bound is None and not entries:
                bound = int(m.group(1))
            continue
        if "\t" not in line:
            raise TaxonomyError("malformed line, expected <path>TAB<label>", lineno)
        path_text, label = line.split("\t", 1)
        label = label.strip()
        try:
            code = parse_code(path_text)
        except ValueError:
            raise TaxonomyError(f"malformed path {path_text.strip()!r}", lineno) from None
        if not label:
            raise TaxonomyError("empty label", lineno)
        entries.append((lineno, code, label))
    if bound is None:
        bound = DEFAULT_FANOUT_BOUND
    for lineno, code, label in entries:
        _check_new_node(code, label, labels, children, bound, lineno)
        labels[code] = label
        children[code] = []
        children[code[:-1]].append(code)
    return ClassificationTree(labels, bound)


def serialize_taxonomy(tree: ClassificationTree) -> str:
    lines = [f"# fanout_bound: {tree.fanout_bound}"]
    for code in sorted(tree, key=lambda c: (len(c), c)):
        lines.append(f"{format_code(code)}\t{tree.label(code)}")
    return "\n".join(lines) + "\n"


def ancestors(tree: ClassificationTree, code: ItemCode) -> List[ItemCode]:
    """Strict ancestors, nearest first; the virtual root is excluded."""
    tree.check(code)
    return [code[:i] for i in range(len(code) - 1, 0, -1)]


def is_descendant(tree: ClassificationTree, a: ItemCode, b: ItemCode) -> bool:
    """True iff ``a`` lies strictly below ``b``."""
    tree.check(a)
    tree.check(b)
    return len(a) > len(b) and a[: len(b)] == b


def dit(tree: ClassificationTree, code: ItemCode) -> int:
    return len(tree.check(code)) - 1


def noc(tree: ClassificationTree, code: ItemCode) -> int:
    return len(tree.children(tree.check(code)))


@dataclass(frozen=True)
class TreeMetricsReport:
    dit: Dict[ItemCode, int]
    noc: Dict[ItemCode, int]
    max_dit: int
    max_noc: int
    mean_dit: Fraction
    dit_warn_threshold: int
    flagged: Tuple[ItemCode, ...] = field(default=())

    def rows(self):
        for code in sorted(self.dit):
            yield code, self.dit[code], self.noc[code], code in self.flagged


def metrics_report(tree: ClassificationTree, dit_warn_threshold: int = DEFAULT_DIT_WARN) -> TreeMetricsReport:
    dits = {code: dit(tree, code) for code in tree}
    nocs = {code: noc(tree, code) for code in tree}
    flagged = tuple(c for c in sorted(dits) if dits[c] >= dit_warn_threshold)
    mean = Fraction(sum(dits.values()), len(dits)) if dits else Fraction(0)
    return TreeMetricsReport(
        dit=dits,
        noc=nocs,
        max_dit=max(dits.values(), default=0),
        max_noc=max(nocs.values(), default=0),
        mean_dit=mean,
        dit_warn_threshold=dit_warn_threshold,
        flagged=flagged,
    )


def balanced_tree(fanout: int, depth: int, label_prefix: str = "n") -> ClassificationTree:
    """Complete ``fanout``-ary tree with ``depth`` levels below the virtual root."""
    labels = {}
    level: List[ItemCode] = [()]
    for _ in range(depth):
        level = [p + (i,) for p in level for i in range(fanout)]
        for code in level:
            labels[code] = label_prefix + "_".join(map(str, code))
    return ClassificationTree(labels, max(fanout, DEFAULT_FANOUT_BOUND))


def codes_of(tree: ClassificationTree, tokens: Iterable[str]) -> List[ItemCode]:
    return [tree.resolve(t) for t in tokens]


def sort_codes(codes: Iterable[ItemCode]) -> Tuple[ItemCode, ...]:
    return tuple(sorted(codes))


__all__ = [
    "ItemCode",
    "ClassificationTree",
    "TreeMetricsReport",
    "parse_code",
    "format_code",
    "parse_taxonomy",
    "serialize_taxonomy",
    "ancestors",
    "is_descendant",
    "dit",
    "noc",
    "metrics_report",
    "balanced_tree",
    "codes_of",
    "sort_codes",
]

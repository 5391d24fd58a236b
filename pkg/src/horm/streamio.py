"""Line-oriented transaction files: ``[ts=<int>;]item,item,...``.

Blank lines are empty transactions; lines starting with ``#`` are skipped.
Items are dot paths or unique labels and must name leaves of the taxonomy.
"""

import logging
import re
from typing import Iterable, Iterator, Optional, TextIO

from .errors import DataError, UnknownItemError
from .stream import Transaction
from .taxonomy import ClassificationTree, format_code

log = logging.getLogger(__name__)

_TS = re.compile(r"^\s*ts\s*=\s*(-?\d+)\s*;")


def parse_transaction(line: str, tree: ClassificationTree, seq: int, strict: bool = True, lineno: Optional[int] = None) -> Transaction:
    ts = None
    m = _TS.match(line)
    if m:
        ts = int(m.group(1))
        line = line[m.end():]
    elif line.lstrip().startswith("ts"):
        raise DataError("malformed timestamp prefix", lineno)
    items = set()
    for token in line.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            code = tree.resolve(token)
            if not tree.is_leaf(code):
                raise UnknownItemError(f"{token!r} is a class, not a leaf item")
        except UnknownItemError as exc:
            if strict:
                raise DataError(str(exc), lineno) from None
            log.warning("line %s: dropping %s", lineno, exc)
            continue
        items.add(code)
    return Transaction(seq, frozenset(items), ts)


def read_transactions(
    lines: Iterable[str],
    tree: ClassificationTree,
    strict: bool = True,
    skip: int = 0,
) -> Iterator[Transaction]:
    """Yield transactions lazily; the first ``skip`` records are consumed unparsed."""
    seq = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.rstrip("\r\n")
        if line.lstrip().startswith("#"):
            continue
        if seq < skip:
            seq += 1
            continue
        yield parse_transaction(line, tree, seq, strict, lineno)
        seq += 1


def format_transaction(t: Transaction) -> str:
    body = ",".join(format_code(i) for i in sorted(t.items))
    return body if t.ts is None else f"ts={t.ts};{body}"


def write_transactions(transactions: Iterable[Transaction], fh: TextIO) -> None:
    for t in transactions:
        fh.write(format_transaction(t) + "\n")

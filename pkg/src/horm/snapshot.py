"""Binary snapshots of a :class:`~horm.stream.StreamState`.

Layout (little endian)::

    b"HORM" | u16 version | u64 body length | body | u32 CRC32

The body carries a SHA-256 digest of the serialized taxonomy, the bitmask
bound, ``n``, the touch counters, ``K`` and then every count array as
``path, m, 2**m`` u64 cells. The CRC covers every byte before it.
"""

import hashlib
import io
import struct
import zlib

import numpy as np

from .errors import SnapshotChecksumError, SnapshotError, SnapshotTruncatedError, SnapshotVersionError
from .stream import StreamState, new_state
from .taxonomy import ClassificationTree, serialize_taxonomy

MAGIC = b"HORM"
VERSION = 1
_HEAD = struct.Struct("<4sHQ")


def tree_digest(tree: ClassificationTree) -> bytes:
    return hashlib.sha256(serialize_taxonomy(tree).encode("utf-8")).digest()


def snapshot(state: StreamState) -> bytes:
    body = io.BytesIO()
    body.write(tree_digest(state.tree))
    body.write(struct.pack("<BQ", state.bitmask_bound, state.n))
    touches = sorted(state.touches.items())
    body.write(struct.pack("<H", len(touches)))
    for name, value in touches:
        raw = name.encode("ascii")
        body.write(struct.pack("<B", len(raw)) + raw + struct.pack("<Q", value))
    body.write(struct.pack("<I", len(state.sic)))
    for ic in state.sic:
        body.write(struct.pack("<B", len(ic.code)))
        body.write(struct.pack(f"<{len(ic.code)}H", *ic.code))
        body.write(struct.pack("<B", ic.m))
        body.write(state.arrays[ic.code].astype("<u8").tobytes())
    payload = body.getvalue()
    head = _HEAD.pack(MAGIC, VERSION, len(payload))
    crc = zlib.crc32(head + payload)
    return head + payload + struct.pack("<I", crc)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise SnapshotTruncatedError("snapshot body ends early")
        out = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return out

    def raw(self, size: int) -> bytes:
        if self.pos + size > len(self.data):
            raise SnapshotTruncatedError("snapshot body ends early")
        out = self.data[self.pos : self.pos + size]
        self.pos += size
        return out


def restore(data: bytes, tree: ClassificationTree) -> StreamState:
    """Rebuild a state from :func:`snapshot` output against ``tree``."""
    if len(data) < _HEAD.size + 4:
        raise SnapshotTruncatedError("snapshot shorter than its header")
    magic, version, body_len = _HEAD.unpack_from(data, 0)
    if magic != MAGIC:
        raise SnapshotError("not a snapshot (bad magic)")
    if version != VERSION:
        raise SnapshotVersionError(f"snapshot version {version}, expected {VERSION}")
    if len(data) != _HEAD.size + body_len + 4:
        raise SnapshotTruncatedError(
            f"snapshot is {len(data)} bytes, header declares {_HEAD.size + body_len + 4}"
        )
    (crc,) = struct.unpack_from("<I", data, len(data) - 4)
    if zlib.crc32(data[:-4]) != crc:
        raise SnapshotChecksumError("snapshot checksum mismatch")

    r = _Reader(data[_HEAD.size : -4])
    if r.raw(32) != tree_digest(tree):
        raise SnapshotError("snapshot was taken against a different taxonomy")
    bitmask_bound, n = r.take("<BQ")
    (n_touch,) = r.take("<H")
    touches = {}
    for _ in range(n_touch):
        (size,) = r.take("<B")
        name = r.raw(size).decode("ascii")
        touches[name] = r.take("<Q")[0]
    (k,) = r.take("<I")
    codes, cells = [], []
    for _ in range(k):
        (depth,) = r.take("<B")
        code = r.take(f"<{depth}H")
        (m,) = r.take("<B")
        arr = np.frombuffer(r.raw(8 << m), dtype="<u8").astype(np.int64)
        codes.append(tuple(code))
        cells.append(arr)
    if r.pos != len(r.data):
        raise SnapshotError("trailing bytes in snapshot body")

    state = new_state(tree, codes, bitmask_bound)
    for code, arr in zip(codes, cells):
        if arr.size != state.arrays[code].size:
            raise SnapshotError("count array size disagrees with taxonomy")
        state.arrays[code][:] = arr
    state.n = n
    state.touches.update(touches)
    return state


def write_snapshot(state: StreamState, path) -> None:
    with open(path, "wb") as fh:
        fh.write(snapshot(state))


def read_snapshot(path, tree: ClassificationTree) -> StreamState:
    with open(path, "rb") as fh:
        return restore(fh.read(), tree)

"""Binary index files.

Layout, all little-endian::

    b"BDIX"  u32 version=1  u64 n  u64 root
    u64[n] parent   u64[n] dfs_start   u64[n] dfs_size   u64[n] label_offset
    f64[n] f
    f64[sum(dfs_size)] label values (owners in DFS order)
    n x (u32 byte length, UTF-8 label)
    u32 CRC32C of everything above
"""

from __future__ import annotations

import os
import struct

import crc32c
import numpy as np

from .errors import (
    BadMagicError,
    ChecksumError,
    IndexFormatError,
    TruncatedIndexError,
)
from .hierarchy import HierarchyTree
from .index import BDIndex, dfs_offsets, require_valid_labels

MAGIC = b"BDIX"
VERSION = 1
_HEAD = struct.Struct("<4sIQQ")
_U32 = struct.Struct("<I")


def to_bytes(idx: BDIndex) -> bytes:
    t = idx.tree
    parts = [_HEAD.pack(MAGIC, VERSION, idx.n, idx.root)]
    for arr in (t.parent, t.dfs_start, t.dfs_size, idx.offsets):
        parts.append(np.ascontiguousarray(arr, dtype="<u8").tobytes())
    parts.append(np.ascontiguousarray(idx.f, dtype="<f8").tobytes())
    parts.append(np.ascontiguousarray(idx.values, dtype="<f8").tobytes())
    for lab in idx.labels:
        raw = lab.encode("utf-8")
        parts.append(_U32.pack(len(raw)))
        parts.append(raw)
    body = b"".join(parts)
    return body + _U32.pack(crc32c.crc32c(body))


def serialize(idx: BDIndex, sink) -> int:
    """Write ``idx`` to a path or binary stream; returns the number of bytes written."""
    data = to_bytes(idx)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    return len(data)


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def take(self, nbytes: int, what: str) -> memoryview:
        left = len(self.buf) - self.pos
        if nbytes > left:
            raise TruncatedIndexError(what, nbytes, left)
        view = memoryview(self.buf)[self.pos:self.pos + nbytes]
        self.pos += nbytes
        return view

    def array(self, count: int, dtype: str, what: str) -> np.ndarray:
        raw = self.take(count * 8, what)
        return np.frombuffer(raw, dtype=dtype).copy()


def from_bytes(buf: bytes) -> BDIndex:
    rd = _Reader(buf)
    if len(buf) < 4 or bytes(buf[:4]) != MAGIC:
        raise BadMagicError(f"bad magic {bytes(buf[:4])!r}, expected {MAGIC!r}")
    magic, version, n, root = _HEAD.unpack(rd.take(_HEAD.size, "header"))
    if version != VERSION:
        raise IndexFormatError(f"unsupported index version {version} (expected {VERSION})")
    if n == 0 or root >= n:
        raise IndexFormatError(f"bad header: n={n}, root={root}")
    if n * 8 * 5 > len(buf):
        raise TruncatedIndexError("per-vertex arrays", n * 8 * 5, len(buf) - rd.pos)
    parent = rd.array(n, "<u8", "parent array").astype(np.int64)
    start = rd.array(n, "<u8", "dfs_start array").astype(np.int64)
    size = rd.array(n, "<u8", "dfs_size array").astype(np.int64)
    offsets = rd.array(n, "<u8", "label offsets").astype(np.int64)
    f = rd.array(n, "<f8", "pivot array")
    total = int(size.sum())
    values = rd.array(total, "<f8", "label value array")
    labels = []
    for i in range(n):
        (k,) = _U32.unpack(rd.take(4, f"id map entry {i} length"))
        labels.append(bytes(rd.take(k, f"id map entry {i}")).decode("utf-8"))
    body_end = rd.pos
    (crc,) = _U32.unpack(rd.take(4, "checksum"))
    if rd.pos != len(buf):
        raise IndexFormatError(f"{len(buf) - rd.pos} trailing bytes after checksum")
    actual = crc32c.crc32c(memoryview(buf)[:body_end])
    if actual != crc:
        raise ChecksumError(f"checksum mismatch: stored {crc:#010x}, computed {actual:#010x}")

    try:
        tree = HierarchyTree.from_parent(parent)
    except ValueError as exc:
        raise IndexFormatError(f"stored hierarchy is invalid: {exc}") from None
    if tree.root != root:
        raise IndexFormatError(f"header root {root} disagrees with parent array root {tree.root}")
    if not (np.array_equal(tree.dfs_start, start) and np.array_equal(tree.dfs_size, size)):
        raise IndexFormatError("stored DFS layout disagrees with the parent array")
    if not np.array_equal(offsets, dfs_offsets(tree)):
        raise IndexFormatError("label offsets are not the DFS-order prefix sums of subtree sizes")
    for arr in (values, f, offsets):
        arr.setflags(write=False)
    idx = BDIndex(tree, values, offsets, f, tuple(labels))
    if len(set(idx.labels)) != n:
        raise IndexFormatError("id map contains duplicate labels")
    require_valid_labels(idx)
    return idx


def deserialize(source) -> BDIndex:
    """Read an index from a path, bytes, or binary stream, verifying every invariant."""
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            buf = fh.read()
    elif isinstance(source, (bytes, bytearray, memoryview)):
        buf = bytes(source)
    else:
        buf = source.read()
    return from_bytes(buf)

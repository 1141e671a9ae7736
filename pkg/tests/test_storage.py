import io
import struct

import numpy as np
import pytest

from bdindex.errors import BadMagicError, ChecksumError, IndexFormatError, TruncatedIndexError
from bdindex.hierarchy import build_hierarchy
from bdindex.index import build_index
from bdindex.storage import deserialize, from_bytes, serialize, to_bytes

import crc32c

from conftest import random_er


@pytest.fixture
def idx(rng):
    g = random_er(40, rng)
    return build_index(g, build_hierarchy(g, "separator"))


def _reseal(body: bytes) -> bytes:
    return body + struct.pack("<I", crc32c.crc32c(body))


def test_crc_reference_value():
    assert crc32c.crc32c(b"123456789") == 0xE3069283


def test_roundtrip_is_bit_exact(idx, tmp_path):
    p = tmp_path / "g.bdx"
    nbytes = serialize(idx, p)
    assert nbytes == p.stat().st_size
    back = deserialize(p)
    assert back.same_as(idx)
    assert to_bytes(back) == p.read_bytes()


def test_stream_roundtrip(idx):
    buf = io.BytesIO()
    serialize(idx, buf)
    buf.seek(0)
    assert deserialize(buf).same_as(idx)


def test_header_layout(idx):
    data = to_bytes(idx)
    magic, version, n, root = struct.unpack_from("<4sIQQ", data)
    assert (magic, version, n, root) == (b"BDIX", 1, idx.n, idx.root)


def test_bad_magic(idx):
    data = bytearray(to_bytes(idx))
    data[0:4] = b"XXXX"
    with pytest.raises(BadMagicError):
        from_bytes(bytes(data))


def test_bad_version(idx):
    data = bytearray(to_bytes(idx))
    data[4:8] = struct.pack("<I", 9)
    with pytest.raises(IndexFormatError, match="version"):
        from_bytes(bytes(data))


@pytest.mark.parametrize("cut", [3, 20, 100, -5, -1])
def test_truncation_reports_sizes(idx, cut):
    data = to_bytes(idx)
    with pytest.raises((TruncatedIndexError, BadMagicError)) as exc:
        from_bytes(data[:cut])
    if isinstance(exc.value, TruncatedIndexError):
        assert exc.value.expected > exc.value.actual


def test_flipped_payload_byte_fails_checksum(idx):
    data = bytearray(to_bytes(idx))
    data[len(data) // 2] ^= 0x40
    with pytest.raises(ChecksumError):
        from_bytes(bytes(data))


def test_trailing_garbage(idx):
    with pytest.raises(IndexFormatError, match="trailing"):
        from_bytes(to_bytes(idx) + b"\0")


def test_resealed_bad_pivot_is_rejected(idx):
    # a correct checksum does not let a broken invariant through
    body = bytearray(to_bytes(idx)[:-4])
    n = idx.n
    v = next(u for u in range(n) if u != idx.root)
    pos = 24 + 4 * 8 * n + 8 * v
    body[pos:pos + 8] = struct.pack("<d", -1.0)
    with pytest.raises(IndexFormatError, match="pivot"):
        from_bytes(_reseal(bytes(body)))


def test_resealed_bad_offsets_are_rejected(idx):
    body = bytearray(to_bytes(idx)[:-4])
    n = idx.n
    pos = 24 + 3 * 8 * n
    body[pos:pos + 8] = struct.pack("<Q", 7)
    with pytest.raises(IndexFormatError):
        from_bytes(_reseal(bytes(body)))


def test_resealed_bad_parent_is_rejected(idx):
    body = bytearray(to_bytes(idx)[:-4])
    v = next(u for u in range(idx.n) if u != idx.root)
    body[24 + 8 * v:24 + 8 * v + 8] = struct.pack("<Q", v)
    with pytest.raises(IndexFormatError):
        from_bytes(_reseal(bytes(body)))


def test_serialization_is_deterministic(rng):
    g = random_er(50, rng)
    a = to_bytes(build_index(g, build_hierarchy(g, "min-degree")))
    b = to_bytes(build_index(g, build_hierarchy(g, "min-degree")))
    assert a == b


def test_values_are_read_only_after_load(idx):
    back = from_bytes(to_bytes(idx))
    with pytest.raises(ValueError):
        back.values[0] = 2.0
    assert np.array_equal(back.values, idx.values)

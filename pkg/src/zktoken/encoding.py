"""Byte-level primitives for the canonical wire format.

All integers are little-endian and fixed-width. Variable-length byte
fields carry a 32-bit length prefix. Decoding is strict: every read is
bounds-checked and a decoder must consume its input exactly, so any
valid encoding is the unique encoding of its value.
"""

from __future__ import annotations

import struct

from .errors import MalformedEncoding

U32_MAX = 0xFFFFFFFF
U64_MAX = 0xFFFFFFFFFFFFFFFF


def u8(value: int) -> bytes:
    if not 0 <= value <= 0xFF:
        raise MalformedEncoding(f"u8 out of range: {value}")
    return bytes([value])


def u32(value: int) -> bytes:
    if not 0 <= value <= U32_MAX:
        raise MalformedEncoding(f"u32 out of range: {value}")
    return struct.pack("<I", value)


def u64(value: int) -> bytes:
    if not 0 <= value <= U64_MAX:
        raise MalformedEncoding(f"u64 out of range: {value}")
    return struct.pack("<Q", value)


def lp(data: bytes) -> bytes:
    """Length-prefixed byte field."""
    return u32(len(data)) + data


class ByteReader:
    """Cursor over an immutable byte string with checked reads."""

    def __init__(self, data: bytes):
        if not isinstance(data, (bytes, bytearray, memoryview)):
            raise MalformedEncoding("encoding must be bytes")
        self._data = bytes(data)
        self._pos = 0

    def remaining(self) -> int:
        return len(self._data) - self._pos

    def take(self, n: int) -> bytes:
        if n < 0 or self.remaining() < n:
            raise MalformedEncoding(
                f"truncated: need {n} bytes, have {self.remaining()}"
            )
        chunk = self._data[self._pos : self._pos + n]
        self._pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def lp(self, max_len: int = U32_MAX) -> bytes:
        n = self.u32()
        if n > max_len:
            raise MalformedEncoding(f"field of {n} bytes exceeds limit {max_len}")
        return self.take(n)

    def expect_end(self) -> None:
        if self.remaining() != 0:
            raise MalformedEncoding(f"{self.remaining()} trailing bytes")

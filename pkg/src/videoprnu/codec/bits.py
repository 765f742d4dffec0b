"""Bit-level I/O and exponential-Golomb codes for the reference bitstream.

Both classes work MSB-first and keep at most seven buffered bits in Python
ints, so writing or reading a multi-bit symbol costs O(symbol bits / 8).
"""

from __future__ import annotations

from ..errors import TruncationError


class BitWriter:
    """Accumulates bits MSB-first into a byte string."""

    def __init__(self) -> None:
        self._bytes = bytearray()
        self._acc = 0  # pending bits, MSB-first
        self._n = 0  # number of pending bits

    @property
    def bit_position(self) -> int:
        return 8 * len(self._bytes) + self._n

    def write_bits(self, value: int, width: int) -> None:
        if width == 0:
            return
        acc = (self._acc << width) | (value & ((1 << width) - 1))
        n = self._n + width
        while n >= 8:
            n -= 8
            self._bytes.append((acc >> n) & 0xFF)
        self._acc = acc & ((1 << n) - 1)
        self._n = n

    def write_ue(self, value: int) -> None:
        """Unsigned exp-Golomb: value+1 in binary, preceded by len-1 zeros."""
        if value < 0:
            raise ValueError(f"ue value must be >= 0, got {value}")
        code = value + 1
        width = code.bit_length()
        self.write_bits(code, 2 * width - 1)

    def write_se(self, value: int) -> None:
        """Signed exp-Golomb: positive v -> 2v-1, non-positive v -> -2v."""
        self.write_ue(2 * value - 1 if value > 0 else -2 * value)

    def getvalue(self) -> bytes:
        """Flush to bytes, padding the final partial byte with zeros."""
        out = bytearray(self._bytes)
        if self._n:
            out.append((self._acc << (8 - self._n)) & 0xFF)
        return bytes(out)


class BitReader:
    """Reads bits MSB-first from a byte string."""

    def __init__(self, data: bytes):
        self._data = data
        self._byte_pos = 0
        self._acc = 0
        self._n = 0

    @property
    def bit_position(self) -> int:
        return 8 * self._byte_pos - self._n

    def read_bits(self, width: int) -> int:
        while self._n < width:
            if self._byte_pos >= len(self._data):
                raise TruncationError("bitstream payload exhausted")
            self._acc = (self._acc << 8) | self._data[self._byte_pos]
            self._byte_pos += 1
            self._n += 8
        self._n -= width
        value = self._acc >> self._n
        self._acc &= (1 << self._n) - 1
        return value

    def read_bit(self) -> int:
        return self.read_bits(1)

    def read_ue(self) -> int:
        zeros = 0
        while self.read_bit() == 0:
            zeros += 1
            if zeros > 64:
                raise TruncationError("malformed exp-Golomb code")
        return (1 << zeros) - 1 + (self.read_bits(zeros) if zeros else 0)

    def read_se(self) -> int:
        code = self.read_ue()
        magnitude = (code + 1) // 2
        return magnitude if code % 2 else -magnitude

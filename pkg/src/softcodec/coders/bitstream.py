"""MSB-first bit writer and reader.

Bits fill each byte from the most significant position down; the final
partial byte is zero-padded when the stream is flushed.
"""

from ..errors import DecodeError


class BitWriter:
    """Accumulates bits into a byte buffer."""

    __slots__ = ("_buf", "_acc", "_nacc", "_bits")

    def __init__(self) -> None:
        self._buf = bytearray()
        self._acc = 0
        self._nacc = 0
        self._bits = 0

    @property
    def bit_length(self) -> int:
        """Return the number of bits written so far."""
        return self._bits

    def write_bit(self, bit: int) -> None:
        """Append one bit."""
        self._acc = (self._acc << 1) | (bit & 1)
        self._nacc += 1
        self._bits += 1
        if self._nacc == 8:
            self._buf.append(self._acc)
            self._acc = 0
            self._nacc = 0

    def write_bits(self, value: int, count: int) -> None:
        """Append the low `count` bits of value, most significant first."""
        if count < 0:
            raise ValueError(f"bit count must be >= 0, got {count}")
        if count == 0:
            return
        if value < 0 or value >> count:
            raise ValueError(f"{value} does not fit in {count} bits")
        self._bits += count
        acc = (self._acc << count) | value
        nacc = self._nacc + count
        while nacc >= 8:
            nacc -= 8
            self._buf.append((acc >> nacc) & 0xFF)
        self._acc = acc & ((1 << nacc) - 1)
        self._nacc = nacc

    def write_unary(self, quotient: int) -> None:
        """Append `quotient` ones followed by a zero."""
        if quotient < 0:
            raise ValueError(f"unary value must be >= 0, got {quotient}")
        while quotient >= 32:
            self.write_bits(0xFFFFFFFF, 32)
            quotient -= 32
        self.write_bits(((1 << quotient) - 1) << 1, quotient + 1)

    def write_bitstring(self, bits: str) -> None:
        """Append a string of '0'/'1' characters."""
        if bits:
            self.write_bits(int(bits, 2), len(bits))

    def getvalue(self) -> bytes:
        """Return the written bits, zero-padded to a whole byte."""
        if self._nacc:
            return bytes(self._buf) + bytes([(self._acc << (8 - self._nacc)) & 0xFF])
        return bytes(self._buf)

    def to_bitstring(self) -> str:
        """Return the written bits as a '0'/'1' string without padding."""
        if not self._bits:
            return ""
        data = self.getvalue()
        return format(int.from_bytes(data, "big"), f"0{len(data) * 8}b")[: self._bits]


class BitReader:
    """Reads bits MSB-first from a byte buffer.

    Args:
        data: Source bytes.
        bit_limit: Number of meaningful bits; defaults to all of `data`.
            Reading past the limit raises DecodeError, so padding is never
            mistaken for payload.
        start_bit: Initial bit position.
    """

    __slots__ = ("_data", "_pos", "_limit")

    def __init__(self, data: bytes, bit_limit: int | None = None, start_bit: int = 0) -> None:
        self._data = bytes(data)
        total = len(self._data) * 8
        limit = total if bit_limit is None else bit_limit
        if limit > total or limit < 0:
            raise DecodeError(f"bit limit {limit} exceeds the {total} available bits")
        self._limit = limit
        self._pos = start_bit

    @classmethod
    def from_bitstring(cls, bits: str) -> "BitReader":
        """Build a reader over a '0'/'1' string."""
        writer = BitWriter()
        writer.write_bitstring(bits)
        return cls(writer.getvalue(), len(bits))

    @property
    def position(self) -> int:
        """Return the index of the next bit."""
        return self._pos

    @property
    def bits_remaining(self) -> int:
        """Return how many bits are left before the limit."""
        return self._limit - self._pos

    def read_bit(self) -> int:
        """Read one bit."""
        pos = self._pos
        if pos >= self._limit:
            raise DecodeError("bitstream exhausted")
        self._pos = pos + 1
        return (self._data[pos >> 3] >> (7 - (pos & 7))) & 1

    def read_bits(self, count: int) -> int:
        """Read `count` bits as an unsigned integer."""
        if count == 0:
            return 0
        if self._pos + count > self._limit:
            raise DecodeError(f"bitstream exhausted reading {count} bits")
        value = 0
        for _ in range(count):
            value = (value << 1) | self.read_bit()
        return value

    def read_unary(self) -> int:
        """Read ones up to and including the terminating zero; return their count."""
        count = 0
        while self.read_bit():
            count += 1
        return count

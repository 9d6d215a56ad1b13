"""Canonical Huffman coding over arbitrary sortable symbols.

Codewords are assigned in (length, symbol) order, so a code is fully
described by its length table. That is what codebooks serialize.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Hashable, Iterable, Mapping

from ..errors import BuildError, DecodeError, EncodeError, FormatError
from .bitstream import BitReader, BitWriter

LOG = logging.getLogger(__name__)

Symbol = Hashable


def code_lengths(freqs: Mapping[Any, float]) -> dict[Any, int]:
    """Return Huffman codeword lengths for a frequency map.

    Ties between equal weights are broken by symbol order, so identical
    input always yields identical lengths. A lone symbol gets length 1.

    Raises:
        BuildError: If no symbol has a positive count or a count is negative.
    """
    if any(count < 0 for count in freqs.values()):
        raise BuildError("Huffman frequencies must be non-negative")
    symbols = sorted(s for s, count in freqs.items() if count > 0)
    if not symbols:
        raise BuildError("Cannot build a Huffman code for an empty alphabet")
    if len(symbols) == 1:
        return {symbols[0]: 1}

    # parent[i] for leaves 0..n-1 and internal nodes n..2n-2
    parent: list[int] = [-1] * (2 * len(symbols) - 1)
    heap = [(freqs[s], i) for i, s in enumerate(symbols)]
    heapq.heapify(heap)
    next_id = len(symbols)
    while len(heap) > 1:
        w1, a = heapq.heappop(heap)
        w2, b = heapq.heappop(heap)
        parent[a] = parent[b] = next_id
        heapq.heappush(heap, (w1 + w2, next_id))
        next_id += 1

    depth = [0] * len(parent)
    for node in range(len(parent) - 2, -1, -1):
        depth[node] = depth[parent[node]] + 1
    return {s: depth[i] for i, s in enumerate(symbols)}


@dataclass(frozen=True)
class HuffmanCode:
    """A canonical prefix code.

    Attributes:
        symbols: Symbols in canonical (length, symbol) order.
        lengths: Codeword length of each symbol, aligned with `symbols`.
    """

    symbols: tuple[Any, ...]
    lengths: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.symbols) != len(self.lengths):
            raise FormatError("Symbol/length count mismatch")
        if not self.symbols:
            raise FormatError("A Huffman code needs at least one symbol")
        if len(set(self.symbols)) != len(self.symbols):
            raise FormatError("Huffman symbols are not unique")
        if any(length < 1 for length in self.lengths):
            raise FormatError("Codeword lengths must be >= 1")
        if self.kraft_sum > 1:
            raise FormatError(f"Kraft sum {self.kraft_sum} exceeds 1")

    @classmethod
    def from_lengths(cls, lengths: Mapping[Any, int]) -> HuffmanCode:
        """Rebuild the canonical code from a symbol -> length map."""
        ordered = sorted(lengths.items(), key=lambda item: (item[1], item[0]))
        return cls(tuple(s for s, _ in ordered), tuple(n for _, n in ordered))

    @classmethod
    def from_counts(cls, freqs: Mapping[Any, float]) -> HuffmanCode:
        """Build a canonical code from a symbol -> count map."""
        return cls.from_lengths(code_lengths(freqs))

    @property
    def kraft_sum(self) -> float:
        """Return sum of 2^-length over all codewords."""
        return math.fsum(2.0 ** -n for n in self.lengths)

    @property
    def max_length(self) -> int:
        return max(self.lengths)

    @cached_property
    def _encode_table(self) -> dict[Any, tuple[int, int]]:
        table: dict[Any, tuple[int, int]] = {}
        code = 0
        prev = self.lengths[0]
        for symbol, length in zip(self.symbols, self.lengths):
            code <<= length - prev
            table[symbol] = (code, length)
            code += 1
            prev = length
        return table

    @cached_property
    def _decode_tables(self) -> tuple[list[int], list[int], list[int]]:
        """Per length: first canonical code, codeword count, index of first symbol."""
        size = self.max_length + 1
        first = [0] * size
        count = [0] * size
        offset = [0] * size
        for length in self.lengths:
            count[length] += 1
        code = 0
        index = 0
        for length in range(1, size):
            code <<= 1
            first[length] = code
            offset[length] = index
            code += count[length]
            index += count[length]
        return first, count, offset

    @property
    def codewords(self) -> dict[Any, str]:
        """Return each symbol's codeword as a '0'/'1' string."""
        return {
            s: format(code, f"0{length}b") for s, (code, length) in self._encode_table.items()
        }

    def code_length(self, symbol: Any) -> int:
        """Return the codeword length of a symbol.

        Raises:
            EncodeError: If the symbol is not in the alphabet.
        """
        try:
            return self._encode_table[symbol][1]
        except KeyError as e:
            raise EncodeError(f"Symbol {symbol!r} is not in the code's alphabet") from e

    def length_map(self) -> dict[Any, int]:
        """Return the symbol -> length table."""
        return dict(zip(self.symbols, self.lengths))

    def average_length(self, freqs: Mapping[Any, float]) -> float:
        """Return the expected codeword length under a frequency map."""
        total = math.fsum(freqs.values())
        if total <= 0:
            return 0.0
        return math.fsum(count * self.code_length(s) for s, count in freqs.items() if count) / total

    def write_symbol(self, writer: BitWriter, symbol: Any) -> None:
        """Append a symbol's codeword to a bit stream."""
        try:
            code, length = self._encode_table[symbol]
        except KeyError as e:
            raise EncodeError(f"Symbol {symbol!r} is not in the code's alphabet") from e
        writer.write_bits(code, length)

    def read_symbol(self, reader: BitReader) -> Any:
        """Consume one codeword from a bit stream.

        Raises:
            DecodeError: On exhausted input or a bit pattern no codeword matches.
        """
        first, count, offset = self._decode_tables
        code = 0
        for length in range(1, len(first)):
            code = (code << 1) | reader.read_bit()
            delta = code - first[length]
            if delta < count[length]:
                return self.symbols[offset[length] + delta]
        raise DecodeError("Invalid Huffman codeword")


def huffman_build(freqs: Mapping[Any, float]) -> HuffmanCode:
    """Build a canonical Huffman code from symbol counts."""
    code = HuffmanCode.from_counts(freqs)
    LOG.debug("Built Huffman code: %d symbols, max length %d", len(code.symbols), code.max_length)
    return code


def huffman_encode(code: HuffmanCode, symbols: Iterable[Any]) -> str:
    """Encode symbols into a '0'/'1' string."""
    writer = BitWriter()
    for symbol in symbols:
        code.write_symbol(writer, symbol)
    return writer.to_bitstring()


def huffman_decode(code: HuffmanCode, bits: str | BitReader, count: int) -> list[Any]:
    """Decode exactly `count` symbols from a bitstring or reader."""
    reader = BitReader.from_bitstring(bits) if isinstance(bits, str) else bits
    return [code.read_symbol(reader) for _ in range(count)]

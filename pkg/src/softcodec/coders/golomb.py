"""Golomb coding with truncated remainders.

A value delta is written as the unary code of delta // m (q ones and a
zero) followed by the truncated remainder r = delta % m: with
k = ceil(log2 m) and c = 2^k - m, r takes k - 1 bits when r < c and
otherwise r + c takes k bits.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..errors import UsageError
from .bitstream import BitReader, BitWriter

LOG = logging.getLogger(__name__)

MAX_M = 1 << 16


@dataclass(frozen=True)
class GolombParameter:
    """Golomb divisor m with its derived k and c."""

    m: int
    k: int = field(init=False)
    c: int = field(init=False)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise UsageError(f"Golomb m must be >= 1, got {self.m}")
        k = (self.m - 1).bit_length()  # ceil(log2 m)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "c", (1 << k) - self.m)

    def code_length(self, delta: int) -> int:
        """Return the codeword length of delta in bits."""
        q, r = divmod(delta, self.m)
        return q + 1 + (self.k - 1 if r < self.c else self.k)

    def total_bits(self, deltas: Sequence[int] | np.ndarray) -> int:
        """Return the summed codeword lengths of many values."""
        arr = np.asarray(deltas, dtype=np.int64)
        if arr.size == 0:
            return 0
        q, r = np.divmod(arr, self.m)
        rem = np.where(r < self.c, self.k - 1, self.k)
        return int(q.sum() + arr.size + rem.sum())

    def write(self, writer: BitWriter, delta: int) -> None:
        """Append the codeword of delta to a bit stream."""
        if delta < 0:
            raise UsageError(f"Golomb input must be >= 0, got {delta}")
        q, r = divmod(delta, self.m)
        writer.write_unary(q)
        if r < self.c:
            writer.write_bits(r, self.k - 1)
        else:
            writer.write_bits(r + self.c, self.k)

    def read(self, reader: BitReader) -> int:
        """Consume one codeword from a bit stream."""
        q = reader.read_unary()
        if self.k == 0:
            return q * self.m
        x = reader.read_bits(self.k - 1)
        if x >= self.c:
            x = (x << 1) | reader.read_bit()
            x -= self.c
        return q * self.m + x


def golomb_encode(param: GolombParameter, delta: int) -> str:
    """Return the codeword of delta as a '0'/'1' string."""
    writer = BitWriter()
    param.write(writer, delta)
    return writer.to_bitstring()


def golomb_decode(param: GolombParameter, source: BitReader | str) -> int:
    """Decode one value from a reader positioned at a codeword start."""
    reader = BitReader.from_bitstring(source) if isinstance(source, str) else source
    return param.read(reader)


def geometric_optimal_m(mean: float) -> int:
    """Return ceil(-1 / log2(mu / (mu + 1))) clamped to [1, MAX_M]."""
    if mean <= 0:
        return 1
    value = math.ceil(-1.0 / math.log2(mean / (mean + 1.0)))
    return min(max(1, value), MAX_M)


def golomb_select_m(deltas: Sequence[int] | np.ndarray) -> GolombParameter:
    """Pick the m that minimizes the total encoded size of deltas.

    Candidates are the powers of two up to 2^16 plus the geometric-optimal
    value for the sample mean; ties go to the smaller m.

    Raises:
        UsageError: If deltas is empty.
    """
    arr = np.asarray(deltas, dtype=np.int64)
    if arr.size == 0:
        raise UsageError("Cannot select a Golomb parameter for an empty sample")
    candidates = {1 << i for i in range(17)}
    candidates.add(geometric_optimal_m(float(arr.mean())))

    best_bits, best_m = min((GolombParameter(m).total_bits(arr), m) for m in candidates)
    best = GolombParameter(best_m)
    LOG.debug("Selected Golomb m=%d (%d bits for %d values)", best.m, best_bits, arr.size)
    return best

"""Shapes, shape mining and codebooks.

A shape is a small block of residual values in a tight bounding box
where every row is at least half non-zero and every column is at least
half non-zero; zero cells are not part of the shape. Shapes are mined by
sliding every window up to n_max x n_max over the shape layers of a
training corpus, and the most useful ones become a canonical Huffman
codebook together with a code for the detail layer.

Codebook file layout (big-endian):

    "SCBK" | version u8 | flags u8 | D u32 | l u8 | n_max u8 | golomb_m u32
    | shape count u32 | per shape: rows u8, cols u8, cells u16 * rows*cols, length u8
    | detail alphabet size u32 | length u8 per detail symbol

flags bit 0 marks a binary codebook, bit 1 the count x size weighting.
"""

from __future__ import annotations

import logging
import struct
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .coders.huffman import HuffmanCode, code_lengths
from .errors import FormatError, UsageError
from .transform import image_layers, max_interface
from .types import Corpus, Image, WeightMode
from .worker import WorkerPool

LOG = logging.getLogger(__name__)

CODEBOOK_MAGIC = b"SCBK"
CODEBOOK_VERSION = 1
# Shape cells are stored as u16.
SHAPE_VALUE_LIMIT = 0xFFFF

_FLAG_BINARY = 0x01
_FLAG_COUNT_SIZE = 0x02

# raw window key: (rows, cols, cells)
ShapeKey = tuple[int, int, tuple[int, ...]]


def is_valid_shape(candidate: Sequence[Sequence[int]] | np.ndarray) -> bool:
    """Check the row/column density criteria of a candidate block.

    Every row needs at least ceil(cols / 2) non-zero cells and every column
    at least ceil(rows / 2). Since both bounds are >= 1, a valid block has
    no empty border row or column, i.e. its bounding box is tight.
    """
    arr = np.asarray(candidate)
    if arr.ndim != 2 or arr.size == 0:
        return False
    mask = arr != 0
    rows, cols = mask.shape
    return bool((2 * mask.sum(axis=1) >= cols).all() and (2 * mask.sum(axis=0) >= rows).all())


@dataclass(frozen=True, order=True)
class Shape:
    """A block of non-zero residual values; 0 cells are outside the shape.

    Shapes order by (rows, cols, cells), which fixes shape ids in a codebook.
    """

    rows: int
    cols: int
    cells: tuple[int, ...]

    def __post_init__(self) -> None:
        cells = tuple(int(v) for v in self.cells)
        if not (1 <= self.rows and 1 <= self.cols) or len(cells) != self.rows * self.cols:
            raise UsageError(f"{self.rows}x{self.cols} shape cannot hold {len(cells)} cells")
        if any(v < 0 for v in cells):
            raise UsageError("Shape cells must be non-negative")
        object.__setattr__(self, "cells", cells)
        if not is_valid_shape(self.matrix):
            raise UsageError(f"Cells {cells} do not form a valid {self.rows}x{self.cols} shape")

    @classmethod
    def from_matrix(cls, matrix: Sequence[Sequence[int]] | np.ndarray) -> Shape:
        arr = np.asarray(matrix, dtype=np.int64)
        return cls(arr.shape[0], arr.shape[1], tuple(arr.ravel().tolist()))

    @classmethod
    def single(cls, value: int) -> Shape:
        """Return the 1x1 shape of one value."""
        return cls(1, 1, (value,))

    @property
    def matrix(self) -> np.ndarray:
        return np.array(self.cells, dtype=np.int64).reshape(self.rows, self.cols)

    @property
    def size(self) -> int:
        """Return the number of non-zero cells."""
        return sum(1 for v in self.cells if v)

    @property
    def is_single_pixel(self) -> bool:
        return self.rows == 1 and self.cols == 1

    @property
    def anchor_offset(self) -> int:
        """Return the column of the first non-zero cell of the top row."""
        return next(i for i, v in enumerate(self.cells[: self.cols]) if v)

    @property
    def anchor_value(self) -> int:
        return self.cells[self.anchor_offset]

    @property
    def placements(self) -> tuple[tuple[int, int, int], ...]:
        """Return (dr, dc, value) of every non-zero cell relative to the anchor."""
        offset = self.anchor_offset
        return tuple(
            (i // self.cols, i % self.cols - offset, v) for i, v in enumerate(self.cells) if v
        )


@dataclass
class ShapeFrequencyTable:
    """Occurrence counts of mined shapes plus the detail-layer histogram."""

    counts: dict[Shape, int] = field(default_factory=dict)
    images_scanned: int = 0
    detail_counts: dict[int, int] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.counts)

    def add(self, counts: Mapping[Shape, int], detail: Mapping[int, int], images: int = 1) -> None:
        """Add the counts of more scanned images."""
        for shape, n in counts.items():
            self.counts[shape] = self.counts.get(shape, 0) + n
        for symbol, n in detail.items():
            self.detail_counts[symbol] = self.detail_counts.get(symbol, 0) + n
        self.images_scanned += images

    def prune(self, prune_below: int, keep_top: int) -> int:
        """Drop rare multi-pixel shapes once the table outgrows keep_top.

        Returns:
            Number of deleted entries.
        """
        if len(self.counts) <= keep_top:
            return 0
        doomed = [
            s for s, n in self.counts.items() if n < prune_below and not s.is_single_pixel
        ]
        for shape in doomed:
            del self.counts[shape]
        return len(doomed)

    def counts_by_size(self) -> dict[int, dict[Shape, int]]:
        """Group counts by shape size."""
        grouped: dict[int, dict[Shape, int]] = {}
        for shape, n in self.counts.items():
            grouped.setdefault(shape.size, {})[shape] = n
        return grouped


def count_windows(layer: np.ndarray, max_shape_dim: int) -> Counter[ShapeKey]:
    """Count every valid shape window of a shape layer."""
    found: Counter[ShapeKey] = Counter()
    height, width = layer.shape
    if not layer.any():
        return found
    for rows in range(1, min(max_shape_dim, height) + 1):
        for cols in range(1, min(max_shape_dim, width) + 1):
            windows = sliding_window_view(layer, (rows, cols))
            mask = windows != 0
            valid = (2 * mask.sum(axis=3) >= cols).all(axis=2)
            valid &= (2 * mask.sum(axis=2) >= rows).all(axis=2)
            if not valid.any():
                continue
            blocks = windows[valid].reshape(-1, rows * cols)
            unique, hits = np.unique(blocks, axis=0, return_counts=True)
            for cells, n in zip(unique.tolist(), hits.tolist()):
                found[(rows, cols, tuple(cells))] += n
    return found


@dataclass(frozen=True)
class _ImageCounts:
    shapes: Counter[ShapeKey]
    detail: np.ndarray


def mine_shapes(
    corpus: Corpus | Iterable[Image],
    interface: int,
    max_shape_dim: int = 4,
    prune_below: int = 2,
    keep_top: int = 4096,
    *,
    binary: bool = False,
    epoch_size: int = 1,
    pool: WorkerPool | None = None,
) -> ShapeFrequencyTable:
    """Count shapes over the shape layers of a corpus.

    Per-image window counts are computed on worker threads; they are folded
    into the table in corpus order, pruning after every `epoch_size` images,
    so the result does not depend on the number of workers.
    """
    images = list(corpus)
    if epoch_size < 1:
        raise UsageError(f"epoch_size must be >= 1, got {epoch_size}")
    pool = pool or WorkerPool()
    detail_size = 1 << interface

    def scan(img: Image) -> _ImageCounts:
        shape_layer, detail_layer = image_layers(img, interface, binary)
        detail = np.bincount(detail_layer.ravel(), minlength=detail_size)
        return _ImageCounts(count_windows(shape_layer, max_shape_dim), detail)

    table = ShapeFrequencyTable()
    shapes_by_key: dict[ShapeKey, Shape] = {}
    batch = max(epoch_size, 64)
    batch -= batch % epoch_size
    for start in range(0, len(images), batch):
        scanned = pool.map(scan, images[start:start + batch])
        for epoch_start in range(0, len(scanned), epoch_size):
            epoch = scanned[epoch_start:epoch_start + epoch_size]
            merged: Counter[ShapeKey] = Counter()
            detail = np.zeros(detail_size, dtype=np.int64)
            for counts in epoch:
                merged.update(counts.shapes)
                detail += counts.detail
            resolved = {}
            for key, n in merged.items():
                shape = shapes_by_key.get(key)
                if shape is None:
                    shape = shapes_by_key[key] = Shape(*key)
                resolved[shape] = n
            table.add(
                resolved,
                {i: int(n) for i, n in enumerate(detail.tolist()) if n},
                images=len(epoch),
            )
            pruned = table.prune(prune_below, keep_top)
            if pruned:
                LOG.debug("Pruned %d shapes after %d images", pruned, table.images_scanned)
    LOG.info("Mined %d shapes from %d images (l=%d)", len(table), table.images_scanned, interface)
    return table


def max_shape_value(depth_levels: int, interface: int, binary: bool = False) -> int:
    """Return the largest value a shape layer can hold."""
    return 1 if binary else (2 * depth_levels - 2) >> interface


@dataclass(frozen=True)
class Codebook:
    """Trained shape code plus detail-layer code and coder defaults."""

    depth_levels: int
    interface: int
    max_shape_dim: int
    shapes: tuple[Shape, ...]
    shape_lengths: tuple[int, ...]
    detail_lengths: tuple[int, ...]
    golomb_m: int = 1
    binary: bool = False
    weight_mode: WeightMode = WeightMode.COUNT_SIZE
    version: int = CODEBOOK_VERSION

    def __post_init__(self) -> None:
        if self.depth_levels < 2:
            raise UsageError(f"depth_levels must be >= 2, got {self.depth_levels}")
        if not 0 <= self.interface <= max_interface(self.depth_levels):
            raise UsageError(f"Interface {self.interface} is invalid for D={self.depth_levels}")
        if self.binary and (self.depth_levels != 2 or self.interface != 0):
            raise UsageError("Binary codebooks need D = 2 and l = 0")
        if len(self.shapes) != len(self.shape_lengths):
            raise FormatError("Shape/length count mismatch")
        if len(self.detail_lengths) != 1 << self.interface:
            raise FormatError(
                f"Detail alphabet has {len(self.detail_lengths)} lengths, expected {1 << self.interface}"
            )
        if self.golomb_m < 1:
            raise UsageError(f"golomb_m must be >= 1, got {self.golomb_m}")
        if self.max_shape_value > SHAPE_VALUE_LIMIT:
            raise UsageError(f"Shape values up to {self.max_shape_value} do not fit 16 bits")
        if list(self.shapes) != sorted(set(self.shapes)):
            raise FormatError("Codebook shapes must be unique and sorted")
        top = self.max_shape_value
        for shape in self.shapes:
            if shape.rows > self.max_shape_dim or shape.cols > self.max_shape_dim:
                raise FormatError(f"Shape {shape.rows}x{shape.cols} exceeds n_max")
            if max(shape.cells) > top:
                raise FormatError(f"Shape value {max(shape.cells)} exceeds {top}")
        # Building the codes validates Kraft sums.
        _ = self.shape_code, self.detail_code

    @property
    def max_shape_value(self) -> int:
        return max_shape_value(self.depth_levels, self.interface, self.binary)

    @cached_property
    def shape_code(self) -> HuffmanCode:
        if not self.shapes:
            raise FormatError("A codebook needs at least one shape")
        return HuffmanCode.from_lengths(dict(enumerate(self.shape_lengths)))

    @cached_property
    def detail_code(self) -> HuffmanCode:
        return HuffmanCode.from_lengths(dict(enumerate(self.detail_lengths)))

    @cached_property
    def shape_ids(self) -> dict[Shape, int]:
        return {shape: i for i, shape in enumerate(self.shapes)}

    @cached_property
    def candidates_by_value(self) -> dict[int, tuple[int, ...]]:
        """Shape ids per anchor value, best first: larger, then shorter codeword, then lower id."""
        grouped: dict[int, list[int]] = {}
        for i, shape in enumerate(self.shapes):
            grouped.setdefault(shape.anchor_value, []).append(i)
        return {
            value: tuple(
                sorted(ids, key=lambda i: (-self.shapes[i].size, self.shape_lengths[i], i))
            )
            for value, ids in grouped.items()
        }

    def is_complete(self) -> bool:
        """Check that every reachable value has its 1x1 shape."""
        ids = self.shape_ids
        return all(Shape.single(v) in ids for v in range(1, self.max_shape_value + 1))

    def restricted_to_single_pixels(self) -> Codebook:
        """Return a codebook keeping only 1x1 shapes.

        Codeword lengths are rebuilt from the implied probabilities 2^-length.
        """
        kept = [(s, n) for s, n in zip(self.shapes, self.shape_lengths) if s.is_single_pixel]
        lengths = code_lengths({i: 2.0 ** -n for i, (_, n) in enumerate(kept)})
        return Codebook(
            depth_levels=self.depth_levels,
            interface=self.interface,
            max_shape_dim=self.max_shape_dim,
            shapes=tuple(s for s, _ in kept),
            shape_lengths=tuple(lengths[i] for i in range(len(kept))),
            detail_lengths=self.detail_lengths,
            golomb_m=self.golomb_m,
            binary=self.binary,
            weight_mode=self.weight_mode,
        )


def build_codebook(
    table: ShapeFrequencyTable,
    detail_freqs: Mapping[int, int],
    interface: int,
    depth_levels: int,
    max_shape_dim: int,
    *,
    weight_mode: WeightMode = WeightMode.COUNT_SIZE,
    binary: bool = False,
    golomb_m: int = 1,
) -> Codebook:
    """Turn mined shape counts into a complete codebook.

    Every 1x1 shape of [1, max shape value] is added with count >= 1, and
    every detail symbol gets add-one smoothing.
    """
    top = max_shape_value(depth_levels, interface, binary)
    counts: dict[Shape, int] = {}
    for shape, n in table.counts.items():
        if shape.rows > max_shape_dim or shape.cols > max_shape_dim or max(shape.cells) > top:
            continue
        counts[shape] = n
    for value in range(1, top + 1):
        single = Shape.single(value)
        counts[single] = max(counts.get(single, 0), 1)

    shapes = tuple(sorted(counts))
    if weight_mode is WeightMode.COUNT_SIZE:
        weights = {i: counts[s] * s.size for i, s in enumerate(shapes)}
    else:
        weights = {i: counts[s] for i, s in enumerate(shapes)}
    shape_lengths = code_lengths(weights)

    detail_size = 1 << interface
    detail_lengths = code_lengths({s: detail_freqs.get(s, 0) + 1 for s in range(detail_size)})

    codebook = Codebook(
        depth_levels=depth_levels,
        interface=interface,
        max_shape_dim=max_shape_dim,
        shapes=shapes,
        shape_lengths=tuple(shape_lengths[i] for i in range(len(shapes))),
        detail_lengths=tuple(detail_lengths[s] for s in range(detail_size)),
        golomb_m=golomb_m,
        binary=binary,
        weight_mode=weight_mode,
    )
    LOG.info(
        "Built codebook: %d shapes, %d detail symbols, D=%d, l=%d",
        len(shapes), detail_size, depth_levels, interface,
    )
    return codebook


def serialize_codebook(cb: Codebook) -> bytes:
    """Encode a codebook in the SCBK format."""
    flags = (_FLAG_BINARY if cb.binary else 0) | (
        _FLAG_COUNT_SIZE if cb.weight_mode is WeightMode.COUNT_SIZE else 0
    )
    out = bytearray(CODEBOOK_MAGIC)
    out += struct.pack(
        ">BBIBBII",
        cb.version, flags, cb.depth_levels, cb.interface, cb.max_shape_dim,
        cb.golomb_m, len(cb.shapes),
    )
    for shape, length in zip(cb.shapes, cb.shape_lengths):
        out += struct.pack(f">BB{len(shape.cells)}HB", shape.rows, shape.cols, *shape.cells, length)
    out += struct.pack(">I", len(cb.detail_lengths))
    out += bytes(cb.detail_lengths)
    return bytes(out)


class _Cursor:
    """Sequential struct reader that reports truncation as FormatError."""

    def __init__(self, data: bytes) -> None:
        self.data = data
        self.pos = 0

    def take(self, fmt: str) -> tuple[int, ...]:
        try:
            values = struct.unpack_from(fmt, self.data, self.pos)
        except struct.error as e:
            raise FormatError(f"Truncated codebook at byte {self.pos}") from e
        self.pos += struct.calcsize(fmt)
        return values


def deserialize_codebook(data: bytes) -> Codebook:
    """Decode an SCBK codebook.

    Raises:
        FormatError: On bad magic, unknown version, truncation, trailing
            bytes, invalid shapes or a Kraft violation.
    """
    if data[:4] != CODEBOOK_MAGIC:
        raise FormatError(f"Not a codebook (magic {data[:4]!r})")
    cur = _Cursor(data)
    cur.pos = 4
    version, flags, depth, interface, n_max, golomb_m, count = cur.take(">BBIBBII")
    if version != CODEBOOK_VERSION:
        raise FormatError(f"Unsupported codebook version {version}")

    shapes: list[Shape] = []
    lengths: list[int] = []
    for _ in range(count):
        rows, cols = cur.take(">BB")
        cells = cur.take(f">{rows * cols}H")
        (length,) = cur.take(">B")
        try:
            shapes.append(Shape(rows, cols, cells))
        except UsageError as e:
            raise FormatError(f"Invalid shape in codebook: {e}") from e
        lengths.append(length)
    (detail_size,) = cur.take(">I")
    detail_lengths = cur.take(f">{detail_size}B")
    if cur.pos != len(data):
        raise FormatError(f"{len(data) - cur.pos} trailing bytes after codebook")

    try:
        return Codebook(
            depth_levels=depth,
            interface=interface,
            max_shape_dim=n_max,
            shapes=tuple(shapes),
            shape_lengths=tuple(lengths),
            detail_lengths=tuple(detail_lengths),
            golomb_m=golomb_m,
            binary=bool(flags & _FLAG_BINARY),
            weight_mode=WeightMode.COUNT_SIZE if flags & _FLAG_COUNT_SIZE else WeightMode.COUNT,
            version=version,
        )
    except UsageError as e:
        raise FormatError(f"Invalid codebook: {e}") from e

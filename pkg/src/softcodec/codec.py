"""Soft compression encoder and decoder.

An image is predicted, folded and split into a shape layer and a detail
layer. The shape layer is covered greedily with codebook shapes; each
placement is written as a Golomb-coded location followed by the shape's
Huffman codeword. The detail layer is Huffman-coded pixel by pixel.

The location written for a placement is its anchor, the first non-zero
cell of the shape's top row, linearized as row * width + col. Anchors of
a cover strictly increase, so the first one is coded as is and every
later one as (difference - 1).

Frame layout (big-endian, 43-byte header):

    "SCMP" | version u8 | flags u8 | height u32 | width u32 | D u32 | l u8
    | golomb_m u32 | triplet count u32 | shape bits u64 | detail bits u64
    | shape payload | detail payload

flags bit 0 marks an inverted binary image, bit 1 a binary-mode frame.
Both payloads are MSB-first and zero-padded to a byte boundary.
"""

from __future__ import annotations

import logging
import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .coders.bitstream import BitReader, BitWriter
from .coders.golomb import GolombParameter, golomb_select_m
from .errors import CorruptionError, EncodeError, FormatError, UsageError
from .info_theory import mean_location_cost
from .shapes import Codebook
from .transform import LayerPair, merge_layers, predict, reverse_binary, split_layers, unpredict
from .types import Image, MultiComponentImage, ResidualPlane

LOG = logging.getLogger(__name__)

FRAME_MAGIC = b"SCMP"
FRAME_VERSION = 1
CONTAINER_MAGIC = b"SCMC"

_HEADER = struct.Struct(">4sBBIIIBIIQQ")
FRAME_HEADER_BITS = _HEADER.size * 8

_FLAG_INVERTED = 0x01
_FLAG_BINARY = 0x02


@dataclass(frozen=True, order=True)
class Triplet:
    """One shape placement: bounding-box top-left and codebook shape id."""

    row: int
    col: int
    shape_id: int


@dataclass(frozen=True)
class EncodeStats:
    """Bit accounting of one encoded image."""

    triplets: int
    location_bits: int
    shape_bits: int
    detail_bits: int
    deltas: tuple[int, ...] = ()
    placements_by_size: dict[int, int] = field(default_factory=dict)  # cells -> placements

    @property
    def location_cost(self) -> float:
        """Return the mean bits per coded location."""
        return mean_location_cost(self.location_bits, self.triplets)


@dataclass(frozen=True)
class CompressedFrame:
    """A self-describing compressed image."""

    height: int
    width: int
    depth_levels: int
    interface: int
    golomb_m: int
    triplet_count: int
    shape_bits: int
    detail_bits: int
    shape_payload: bytes
    detail_payload: bytes
    inverted: bool = False
    binary: bool = False
    version: int = FRAME_VERSION

    def to_bytes(self) -> bytes:
        flags = (_FLAG_INVERTED if self.inverted else 0) | (_FLAG_BINARY if self.binary else 0)
        header = _HEADER.pack(
            FRAME_MAGIC, self.version, flags, self.height, self.width, self.depth_levels,
            self.interface, self.golomb_m, self.triplet_count, self.shape_bits, self.detail_bits,
        )
        return header + self.shape_payload + self.detail_payload

    @property
    def bit_size(self) -> int:
        """Return the total frame size in bits, header included."""
        return FRAME_HEADER_BITS + 8 * (len(self.shape_payload) + len(self.detail_payload))

    @classmethod
    def from_bytes(cls, data: bytes) -> CompressedFrame:
        """Parse a frame.

        Raises:
            FormatError: On bad magic or an unknown version.
            CorruptionError: On truncation or trailing bytes.
        """
        if len(data) >= 4 and data[:4] != FRAME_MAGIC:
            raise FormatError(f"Not a compressed frame (magic {data[:4]!r})")
        if len(data) < _HEADER.size:
            raise CorruptionError(f"Frame header truncated at {len(data)} bytes")
        (_, version, flags, height, width, depth, interface, golomb_m, count,
         shape_bits, detail_bits) = _HEADER.unpack_from(data)
        if version != FRAME_VERSION:
            raise FormatError(f"Unsupported frame version {version}")
        shape_len = (shape_bits + 7) // 8
        detail_len = (detail_bits + 7) // 8
        expected = _HEADER.size + shape_len + detail_len
        if len(data) != expected:
            raise CorruptionError(f"Frame holds {len(data)} bytes, header implies {expected}")
        if height < 1 or width < 1 or depth < 2 or golomb_m < 1:
            raise CorruptionError(f"Implausible frame header {height}x{width}, D={depth}, m={golomb_m}")
        shape_end = _HEADER.size + shape_len
        return cls(
            height=height,
            width=width,
            depth_levels=depth,
            interface=interface,
            golomb_m=golomb_m,
            triplet_count=count,
            shape_bits=shape_bits,
            detail_bits=detail_bits,
            shape_payload=bytes(data[_HEADER.size:shape_end]),
            detail_payload=bytes(data[shape_end:]),
            inverted=bool(flags & _FLAG_INVERTED),
            binary=bool(flags & _FLAG_BINARY),
            version=version,
        )


def _layer_values(layer: ResidualPlane | np.ndarray) -> np.ndarray:
    return layer.values if isinstance(layer, ResidualPlane) else np.asarray(layer, dtype=np.int64)


def cover_shape_layer(layer: ResidualPlane | np.ndarray, cb: Codebook) -> list[Triplet]:
    """Greedily cover the non-zero cells of a shape layer with codebook shapes.

    Uncovered non-zero cells are visited in raster order; the shape placed
    there is the largest one whose cells all match the layer and are still
    uncovered, ties going to the shorter codeword and then the lower id.

    Raises:
        EncodeError: If a value has no 1x1 shape in the codebook.
    """
    values = _layer_values(layer)
    height, width = values.shape
    grid = values.tolist()
    covered = [[False] * width for _ in range(height)]
    candidates = cb.candidates_by_value
    placements = [shape.placements for shape in cb.shapes]

    triplets: list[Triplet] = []
    rows, cols = np.nonzero(values)
    for r, c in zip(rows.tolist(), cols.tolist()):
        if covered[r][c]:
            continue
        value = grid[r][c]
        for shape_id in candidates.get(value, ()):
            cells = placements[shape_id]
            if all(
                0 <= r + dr < height
                and 0 <= c + dc < width
                and grid[r + dr][c + dc] == v
                and not covered[r + dr][c + dc]
                for dr, dc, v in cells
            ):
                break
        else:
            raise EncodeError(f"No codebook shape covers value {value} at ({r}, {c})")
        for dr, dc, _ in cells:
            covered[r + dr][c + dc] = True
        triplets.append(Triplet(r, c - cb.shapes[shape_id].anchor_offset, shape_id))
    return triplets


def reconstruct_shape_layer(
    triplets: Sequence[Triplet], cb: Codebook, height: int, width: int
) -> ResidualPlane:
    """Fill every placed shape into an all-zero canvas.

    Raises:
        CorruptionError: On an unknown shape id, a placement outside the
            canvas or two placements overlapping.
    """
    canvas = np.zeros((height, width), dtype=np.int64)
    for t in triplets:
        if not 0 <= t.shape_id < len(cb.shapes):
            raise CorruptionError(f"Unknown shape id {t.shape_id}")
        shape = cb.shapes[t.shape_id]
        if t.row < 0 or t.col < 0 or t.row + shape.rows > height or t.col + shape.cols > width:
            raise CorruptionError(
                f"{shape.rows}x{shape.cols} shape at ({t.row}, {t.col}) leaves the {height}x{width} canvas"
            )
        block = canvas[t.row:t.row + shape.rows, t.col:t.col + shape.cols]
        cells = shape.matrix
        mask = cells != 0
        if block[mask].any():
            raise CorruptionError(f"Shape at ({t.row}, {t.col}) overlaps an earlier placement")
        block[mask] = cells[mask]
    return ResidualPlane(height, width, cb.depth_levels, canvas)


def anchor_indices(triplets: Sequence[Triplet], cb: Codebook, width: int) -> list[int]:
    """Return the linearized anchor of every triplet."""
    return [t.row * width + t.col + cb.shapes[t.shape_id].anchor_offset for t in triplets]


def location_deltas(anchors: Sequence[int]) -> list[int]:
    """Turn increasing anchors into Golomb inputs: first absolute, then gap - 1."""
    deltas = []
    prev = -1
    for anchor in anchors:
        if anchor <= prev:
            raise EncodeError(f"Anchors must strictly increase, got {anchor} after {prev}")
        deltas.append(anchor - prev - 1)
        prev = anchor
    return deltas


def _encode_layers(
    shape_layer: np.ndarray,
    detail_layer: np.ndarray,
    cb: Codebook,
    *,
    inverted: bool = False,
) -> tuple[CompressedFrame, EncodeStats]:
    height, width = shape_layer.shape
    triplets = sorted(
        cover_shape_layer(shape_layer, cb),
        key=lambda t: (t.row, t.col + cb.shapes[t.shape_id].anchor_offset),
    )
    deltas = location_deltas(anchor_indices(triplets, cb, width))
    param = golomb_select_m(deltas) if deltas else GolombParameter(cb.golomb_m)

    writer = BitWriter()
    shape_code = cb.shape_code
    location_bits = 0
    for t, delta in zip(triplets, deltas):
        start = writer.bit_length
        param.write(writer, delta)
        location_bits += writer.bit_length - start
        shape_code.write_symbol(writer, t.shape_id)
    shape_bits = writer.bit_length

    detail_writer = BitWriter()
    if cb.interface > 0:
        detail_code = cb.detail_code
        for symbol in detail_layer.ravel().tolist():
            detail_code.write_symbol(detail_writer, symbol)

    frame = CompressedFrame(
        height=height,
        width=width,
        depth_levels=cb.depth_levels,
        interface=cb.interface,
        golomb_m=param.m,
        triplet_count=len(triplets),
        shape_bits=shape_bits,
        detail_bits=detail_writer.bit_length,
        shape_payload=writer.getvalue(),
        detail_payload=detail_writer.getvalue(),
        inverted=inverted,
        binary=cb.binary,
    )
    stats = EncodeStats(
        triplets=len(triplets),
        location_bits=location_bits,
        shape_bits=shape_bits - location_bits,
        detail_bits=detail_writer.bit_length,
        deltas=tuple(deltas),
        placements_by_size=dict(sorted(Counter(cb.shapes[t.shape_id].size for t in triplets).items())),
    )
    return frame, stats


def _check_frame(frame: CompressedFrame, cb: Codebook, binary: bool) -> None:
    if frame.binary != binary:
        kind = "binary" if frame.binary else "gray"
        raise UsageError(f"Frame was written by the {kind} codec")
    if frame.depth_levels != cb.depth_levels:
        raise UsageError(f"Frame D={frame.depth_levels} does not match codebook D={cb.depth_levels}")
    if frame.interface != cb.interface:
        raise UsageError(f"Frame l={frame.interface} does not match codebook l={cb.interface}")
    if frame.binary != cb.binary:
        raise UsageError("Frame and codebook disagree on binary mode")
    if frame.triplet_count > frame.height * frame.width:
        raise CorruptionError(f"{frame.triplet_count} triplets cannot fit {frame.height}x{frame.width}")


def _decode_shape_layer(frame: CompressedFrame, cb: Codebook) -> ResidualPlane:
    reader = BitReader(frame.shape_payload, bit_limit=frame.shape_bits)
    param = GolombParameter(frame.golomb_m)
    shape_code = cb.shape_code
    pixels = frame.height * frame.width
    triplets = []
    anchor = -1
    for _ in range(frame.triplet_count):
        anchor += param.read(reader) + 1
        if anchor >= pixels:
            raise CorruptionError(f"Location {anchor} is outside the image")
        shape_id = shape_code.read_symbol(reader)
        row, col = divmod(anchor, frame.width)
        triplets.append(Triplet(row, col - cb.shapes[shape_id].anchor_offset, shape_id))
    if reader.bits_remaining:
        raise CorruptionError(f"{reader.bits_remaining} unread bits after the last placement")
    return reconstruct_shape_layer(triplets, cb, frame.height, frame.width)


def _decode_detail_layer(frame: CompressedFrame, cb: Codebook) -> np.ndarray:
    if cb.interface == 0:
        if frame.detail_bits:
            raise CorruptionError("Detail payload present although l = 0")
        return np.zeros((frame.height, frame.width), dtype=np.int64)
    reader = BitReader(frame.detail_payload, bit_limit=frame.detail_bits)
    detail_code = cb.detail_code
    symbols = [detail_code.read_symbol(reader) for _ in range(frame.height * frame.width)]
    if reader.bits_remaining:
        raise CorruptionError(f"{reader.bits_remaining} unread bits after the detail layer")
    return np.array(symbols, dtype=np.int64).reshape(frame.height, frame.width)


def encode_gray_with_stats(img: Image, cb: Codebook) -> tuple[CompressedFrame, EncodeStats]:
    """Encode a gray image and report where the bits went."""
    if cb.binary:
        raise UsageError("Binary codebooks only encode binary images")
    if img.depth_levels != cb.depth_levels:
        raise UsageError(f"Image D={img.depth_levels} does not match codebook D={cb.depth_levels}")
    pair = split_layers(predict(img), cb.interface)
    return _encode_layers(pair.shape_layer.values, pair.detail_layer.values, cb)


def encode_gray(img: Image, cb: Codebook) -> CompressedFrame:
    """Encode a gray image."""
    frame, _ = encode_gray_with_stats(img, cb)
    return frame


def decode_gray(frame: CompressedFrame | bytes, cb: Codebook) -> Image:
    """Decode a gray frame back to the exact original image.

    Raises:
        UsageError: If frame and codebook disagree on D, l or mode.
        CorruptionError: If the payload cannot describe a valid image.
    """
    if isinstance(frame, bytes):
        frame = CompressedFrame.from_bytes(frame)
    _check_frame(frame, cb, binary=False)
    shape_layer = _decode_shape_layer(frame, cb)
    detail = ResidualPlane(
        frame.height, frame.width, frame.depth_levels, _decode_detail_layer(frame, cb)
    )
    plane = merge_layers(LayerPair(shape_layer, detail, frame.interface))
    return unpredict(plane, frame.depth_levels)


def encode_binary_with_stats(img: Image, cb: Codebook) -> tuple[CompressedFrame, EncodeStats]:
    """Encode a binary image without prediction, inverting it when ones dominate."""
    if not cb.binary:
        raise UsageError("Binary images need a binary codebook")
    plane, inverted = reverse_binary(img)
    return _encode_layers(plane, np.zeros_like(plane), cb, inverted=inverted)


def encode_binary(img: Image, cb: Codebook) -> CompressedFrame:
    """Encode a binary image.

    Args:
        img: Image with D = 2.
        cb: Codebook trained in binary mode.

    Raises:
        UsageError: If the codebook is not a binary one.
    """
    frame, _ = encode_binary_with_stats(img, cb)
    return frame


def decode_binary(frame: CompressedFrame | bytes, cb: Codebook) -> Image:
    """Decode a binary frame, undoing the inversion when flagged.

    Args:
        frame: Frame object or its serialized bytes.
        cb: The binary codebook the frame was encoded with.

    Raises:
        UsageError: If frame and codebook disagree on mode.
        CorruptionError: If the payload cannot describe a valid image.
    """
    if isinstance(frame, bytes):
        frame = CompressedFrame.from_bytes(frame)
    _check_frame(frame, cb, binary=True)
    plane = _decode_shape_layer(frame, cb).values
    _decode_detail_layer(frame, cb)
    return Image(frame.height, frame.width, 2, 1 - plane if frame.inverted else plane)


def encode_image(img: Image, cb: Codebook) -> CompressedFrame:
    """Encode with the binary or gray codec, whichever the codebook was trained for."""
    return encode_binary(img, cb) if cb.binary else encode_gray(img, cb)


def decode_image(frame: CompressedFrame | bytes, cb: Codebook) -> Image:
    """Decode with the binary or gray codec, whichever the codebook was trained for."""
    return decode_binary(frame, cb) if cb.binary else decode_gray(frame, cb)


def _codebooks_for(count: int, cbs: Codebook | Sequence[Codebook]) -> list[Codebook]:
    if isinstance(cbs, Codebook):
        return [cbs] * count
    cbs = list(cbs)
    if len(cbs) != count:
        raise UsageError(f"{count} components need {count} codebooks, got {len(cbs)}")
    return cbs


def encode_multi(
    img: MultiComponentImage, cbs: Codebook | Sequence[Codebook]
) -> list[CompressedFrame]:
    """Encode every component independently.

    A single codebook is reused for every component; a sequence must hold
    exactly one codebook per component.
    """
    return [encode_image(comp, cb) for comp, cb in zip(img, _codebooks_for(len(img), cbs))]


def pack_frames(frames: Sequence[CompressedFrame]) -> bytes:
    """Concatenate frames into an SCMC container."""
    if not 1 <= len(frames) <= 0xFF:
        raise UsageError(f"A container holds 1 to 255 frames, got {len(frames)}")
    out = bytearray(CONTAINER_MAGIC)
    out.append(len(frames))
    for frame in frames:
        data = frame.to_bytes()
        out += struct.pack(">I", len(data)) + data
    return bytes(out)


def unpack_frames(data: bytes) -> list[bytes]:
    """Split an SCMC container into raw frame bytes.

    Raises:
        FormatError: On bad magic.
        CorruptionError: On truncation or trailing bytes.
    """
    if data[:4] != CONTAINER_MAGIC:
        raise FormatError(f"Not a multi-component container (magic {data[:4]!r})")
    if len(data) < 5:
        raise CorruptionError("Container header truncated")
    count = data[4]
    pos = 5
    frames = []
    for i in range(count):
        if pos + 4 > len(data):
            raise CorruptionError(f"Length of frame {i} truncated")
        (length,) = struct.unpack_from(">I", data, pos)
        pos += 4
        if pos + length > len(data):
            raise CorruptionError(f"Frame {i} truncated")
        frames.append(bytes(data[pos:pos + length]))
        pos += length
    if pos != len(data):
        raise CorruptionError(f"{len(data) - pos} trailing bytes after the last frame")
    return frames


def decode_multi(
    frames: Sequence[CompressedFrame] | bytes,
    cbs: Codebook | Sequence[Codebook],
    labels: Sequence[str] = (),
) -> MultiComponentImage:
    """Decode every component of a container or frame list."""
    if isinstance(frames, bytes):
        parsed = [CompressedFrame.from_bytes(f) for f in unpack_frames(frames)]
    else:
        parsed = list(frames)
    books = _codebooks_for(len(parsed), cbs)
    return MultiComponentImage(
        tuple(decode_image(f, cb) for f, cb in zip(parsed, books)), tuple(labels)
    )


def decode_component(data: bytes, index: int, cb: Codebook) -> Image:
    """Decode one component of a container without touching the others."""
    frames = unpack_frames(data)
    if not 0 <= index < len(frames):
        raise UsageError(f"Component {index} out of range for {len(frames)} components")
    return decode_image(CompressedFrame.from_bytes(frames[index]), cb)


def measure_ratio(
    img: Image | MultiComponentImage, frame: CompressedFrame | Sequence[CompressedFrame] | bytes
) -> float:
    """Return b / b': natural binary bits over compressed bits, header included."""
    if isinstance(img, MultiComponentImage):
        original = sum(c.pixel_count * c.bits_per_pixel for c in img)
    else:
        original = img.pixel_count * img.bits_per_pixel
    if isinstance(frame, bytes):
        compressed = 8 * len(frame)
    elif isinstance(frame, CompressedFrame):
        compressed = frame.bit_size
    else:
        compressed = sum(f.bit_size for f in frame)
    return original / compressed

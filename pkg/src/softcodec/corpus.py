"""Corpus ingestion: IDX tensors, binary netpbm files, and preprocessing.

IDX layout (big-endian):

    [offset] [type]          [description]
    0000     4 bytes         magic 00 00 08 03 (unsigned byte, 3 dimensions)
    0004     32 bit integer  number of images
    0008     32 bit integer  number of rows
    0012     32 bit integer  number of columns
    0016     unsigned byte   pixels, row-major per image

Label files use magic 00 00 08 01 and a single count dimension.
"""

import gzip
import logging
import struct
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FormatError, IngestIOError, UsageError
from .types import Corpus, Image, MultiComponentImage

LOG = logging.getLogger(__name__)

IDX_IMAGES_MAGIC = b"\x00\x00\x08\x03"
IDX_LABELS_MAGIC = b"\x00\x00\x08\x01"

_PNM_COMPONENTS = {b"P5": 1, b"P6": 3}
_PPM_LABELS = ("R", "G", "B")


def _read_bytes(path: Path | str) -> bytes:
    """Read a whole file, transparently un-gzipping *.gz files."""
    path = Path(path)
    try:
        if path.suffix == ".gz":
            with gzip.open(path, "rb") as f:
                return f.read()
        return path.read_bytes()
    except (OSError, EOFError) as e:
        raise IngestIOError(f"Cannot read {path}: {e}") from e


def load_idx(path: Path | str) -> Corpus:
    """Load an MNIST-style IDX image tensor.

    Args:
        path: IDX file (optionally gzip-compressed).

    Returns:
        One 256-level image per record.

    Raises:
        FormatError: If the magic is not the unsigned-byte 3-D variant.
        IngestIOError: If the dimensions or payload are truncated.
    """
    data = _read_bytes(path)
    magic = data[:4]
    if magic != IDX_IMAGES_MAGIC:
        raise FormatError(f"{path}: not an unsigned-byte 3-D IDX file (magic {magic.hex()})")
    if len(data) < 16:
        raise IngestIOError(f"{path}: truncated IDX header")
    count, rows, cols = struct.unpack(">III", data[4:16])
    expected = count * rows * cols
    payload = data[16:16 + expected]
    if len(payload) < expected:
        raise IngestIOError(
            f"{path}: truncated IDX payload ({len(payload)} of {expected} bytes)"
        )

    if count == 0:
        LOG.info("Loaded empty IDX corpus from %s", path)
        return Corpus(())
    tensor = np.frombuffer(payload, dtype=np.uint8).reshape(count, rows, cols)
    images = tuple(Image(rows, cols, 256, tensor[i]) for i in range(count))
    LOG.info("Loaded %d images (%dx%d) from %s", count, rows, cols, path)
    return Corpus(images)


def load_idx_labels(path: Path | str) -> list[int]:
    """Load an IDX unsigned-byte label vector.

    Raises:
        FormatError: If the magic is not the unsigned-byte 1-D variant.
        IngestIOError: If the payload is truncated.
    """
    data = _read_bytes(path)
    magic = data[:4]
    if magic != IDX_LABELS_MAGIC:
        raise FormatError(f"{path}: not an unsigned-byte IDX label file (magic {magic.hex()})")
    if len(data) < 8:
        raise IngestIOError(f"{path}: truncated IDX header")
    (count,) = struct.unpack(">I", data[4:8])
    payload = data[8:8 + count]
    if len(payload) < count:
        raise IngestIOError(f"{path}: truncated IDX labels ({len(payload)} of {count})")
    return list(payload)


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next whitespace-delimited header token, skipping comments."""
    size = len(data)
    while pos < size:
        ch = data[pos:pos + 1]
        if ch == b"#":
            end = data.find(b"\n", pos)
            pos = size if end < 0 else end + 1
        elif ch.isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < size and not data[pos:pos + 1].isspace() and data[pos:pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise FormatError("Truncated netpbm header")
    return data[start:pos], pos


def load_pnm(path: Path | str) -> MultiComponentImage:
    """Load a binary PGM (P5) or PPM (P6) file.

    Components of a PPM keep their file order R, G, B.

    Raises:
        FormatError: For any other netpbm subtype or a malformed header.
        IngestIOError: If the sample payload is truncated.
    """
    data = _read_bytes(path)
    magic = data[:2]
    if magic not in _PNM_COMPONENTS:
        raise FormatError(f"{path}: unsupported netpbm type {magic!r}")
    channels = _PNM_COMPONENTS[magic]

    pos = 2
    fields = []
    for _ in range(3):
        token, pos = _next_token(data, pos)
        try:
            fields.append(int(token))
        except ValueError as e:
            raise FormatError(f"{path}: bad header field {token!r}") from e
    width, height, maxval = fields
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise FormatError(f"{path}: bad dimensions or maxval ({width}x{height}, {maxval})")
    pos += 1  # single whitespace before the payload

    sample_bytes = 2 if maxval > 255 else 1
    expected = width * height * channels * sample_bytes
    payload = data[pos:pos + expected]
    if len(payload) < expected:
        raise IngestIOError(f"{path}: truncated payload ({len(payload)} of {expected} bytes)")

    dtype = ">u2" if sample_bytes == 2 else np.uint8
    samples = np.frombuffer(payload, dtype=dtype).astype(np.int64)
    samples = samples.reshape(height, width, channels)
    if samples.max(initial=0) > maxval:
        raise FormatError(f"{path}: sample exceeds maxval {maxval}")

    depth = maxval + 1
    components = tuple(Image(height, width, depth, samples[:, :, c]) for c in range(channels))
    labels = _PPM_LABELS if channels == 3 else ("Y",)
    LOG.debug("Loaded %s: %dx%d, %d component(s), D=%d", path, width, height, channels, depth)
    return MultiComponentImage(components, labels)


def save_pnm(img: Image | MultiComponentImage, path: Path | str) -> None:
    """Write an image as P5 (one component) or P6 (three components).

    Raises:
        UsageError: If the component count or depth cannot be expressed.
    """
    mc = MultiComponentImage((img,)) if isinstance(img, Image) else img
    if len(mc) not in (1, 3):
        raise UsageError(f"netpbm holds 1 or 3 components, got {len(mc)}")
    depth = mc.depth_levels
    if any(c.depth_levels != depth for c in mc):
        raise UsageError("All components must share depth_levels to be saved as netpbm")
    maxval = depth - 1
    if maxval > 65535:
        raise UsageError(f"netpbm cannot store depth {depth}")

    magic = "P5" if len(mc) == 1 else "P6"
    stacked = np.stack([c.pixels for c in mc], axis=-1)
    dtype = ">u2" if maxval > 255 else np.uint8
    header = f"{magic}\n{mc.width} {mc.height}\n{maxval}\n".encode("ascii")
    Path(path).write_bytes(header + stacked.astype(dtype).tobytes())
    LOG.debug("Wrote %s (%dx%d, D=%d)", path, mc.width, mc.height, depth)


def binarize(img: Image, threshold: int) -> Image:
    """Map pixels >= threshold to 1 and the rest to 0.

    Raises:
        UsageError: If threshold lies outside [0, D - 1].
    """
    if not 0 <= threshold <= img.depth_levels - 1:
        raise UsageError(f"threshold must lie in [0, {img.depth_levels - 1}], got {threshold}")
    return Image(img.height, img.width, 2, (img.pixels >= threshold).astype(np.int64))


def binarize_corpus(corpus: Corpus, threshold: int) -> Corpus:
    """Binarize every image of a corpus."""
    return Corpus(tuple(binarize(img, threshold) for img in corpus), corpus.class_label)


def split_by_class(corpus: Corpus, labels: Sequence[int]) -> dict[int, Corpus]:
    """Group a corpus by its label vector, keeping record order.

    Raises:
        UsageError: If the label count differs from the image count.
    """
    if len(labels) != len(corpus):
        raise UsageError(f"{len(labels)} labels for {len(corpus)} images")
    grouped: dict[int, list[Image]] = {}
    for img, label in zip(corpus, labels):
        grouped.setdefault(int(label), []).append(img)
    return {
        label: Corpus(tuple(images), str(label))
        for label, images in sorted(grouped.items())
    }


def sample_corpus(corpus: Corpus, limit: int, seed: int) -> Corpus:
    """Pick at most `limit` images with a seeded generator, keeping their order."""
    if limit >= len(corpus):
        return corpus
    rng = np.random.default_rng(seed)
    picks = np.sort(rng.choice(len(corpus), size=limit, replace=False))
    return Corpus(tuple(corpus[int(i)] for i in picks), corpus.class_label)


def load_corpus(path: Path | str) -> Corpus:
    """Load a corpus from an IDX file, one netpbm file, or a directory of PGMs.

    Multi-component files contribute each component as its own image.
    """
    path = Path(path)
    if path.is_dir():
        images: list[Image] = []
        for item in sorted(path.iterdir()):
            if item.suffix.lower() in (".pgm", ".ppm", ".pnm"):
                images.extend(load_pnm(item).components)
        LOG.info("Loaded %d images from directory %s", len(images), path)
        return Corpus(tuple(images), path.name)
    if not path.exists():
        raise IngestIOError(f"Corpus not found: {path}")
    with open(path, "rb") as f:
        head = f.read(2)
    if head in _PNM_COMPONENTS:
        return Corpus(load_pnm(path).components, path.stem)
    return load_idx(path)

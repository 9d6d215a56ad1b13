"""Reference coders the soft compression ratios are compared against.

Both report bit counts including the same fixed header as a soft
compression frame.
"""

from __future__ import annotations

import logging
from typing import Iterable

import numpy as np

from .codec import FRAME_HEADER_BITS
from .coders.golomb import golomb_select_m
from .coders.huffman import HuffmanCode
from .errors import UsageError
from .transform import predict_array
from .types import Image

LOG = logging.getLogger(__name__)


def train_pixel_code(images: Iterable[Image], depth_levels: int) -> HuffmanCode:
    """Build a Huffman code over raw intensities with add-one smoothing."""
    counts = np.ones(depth_levels, dtype=np.int64)
    for img in images:
        if img.depth_levels != depth_levels:
            raise UsageError(f"Image D={img.depth_levels} does not match D={depth_levels}")
        counts += np.bincount(img.pixels.ravel(), minlength=depth_levels)
    return HuffmanCode.from_counts(dict(enumerate(counts.tolist())))


def huffman_baseline(img: Image, code: HuffmanCode) -> int:
    """Return the bits of Huffman-coding every pixel, header included."""
    lengths = np.zeros(img.depth_levels, dtype=np.int64)
    for symbol, length in code.length_map().items():
        if 0 <= symbol < img.depth_levels:
            lengths[symbol] = length
    used = lengths[img.pixels.ravel()]
    if (used == 0).any():
        raise UsageError("Pixel code does not cover every intensity of the image")
    return FRAME_HEADER_BITS + int(used.sum())


def predictive_golomb_baseline(img: Image) -> int:
    """Return the bits of Golomb-coding the folded MED residuals, header included."""
    residuals = predict_array(img.pixels, img.depth_levels).ravel()
    param = golomb_select_m(residuals)
    return FRAME_HEADER_BITS + param.total_bits(residuals)

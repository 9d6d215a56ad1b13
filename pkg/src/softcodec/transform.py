"""Reversible preprocessing: MED prediction, sign folding and layer separation.

Neighbours outside the image read as 0, so pixel (0, 0) is predicted as 0.
The gradient branch of the predictor is clamped into [0, D - 1]; the
decoder applies the same clamp.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import CorruptionError, UsageError
from .types import Image, ResidualPlane

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayerPair:
    """Shape layer (quotient) and detail layer (remainder) of a residual plane."""
    shape_layer: ResidualPlane
    detail_layer: ResidualPlane
    interface: int


def max_interface(depth_levels: int) -> int:
    """Return floor(log2 D), the largest valid layer interface."""
    return depth_levels.bit_length() - 1


def med_predict(left: int, up: int, upleft: int, depth_levels: int) -> int:
    """Predict one pixel from its left, upper and upper-left neighbours."""
    if upleft >= max(left, up):
        return min(left, up)
    if upleft <= min(left, up):
        return max(left, up)
    return min(max(left + up - upleft, 0), depth_levels - 1)


def fold_error(error: int) -> int:
    """Map a signed error onto [0, 2D - 2]: 2e for e >= 0, -2e - 1 otherwise."""
    return 2 * error if error >= 0 else -2 * error - 1


def unfold_error(value: int) -> int:
    """Invert fold_error: even values are non-negative, odd ones negative."""
    return value >> 1 if not value & 1 else -((value + 1) >> 1)


def prediction_plane(pixels: np.ndarray, depth_levels: int) -> np.ndarray:
    """Return the MED prediction of every pixel of a 2-D array."""
    padded = np.pad(np.asarray(pixels, dtype=np.int64), ((1, 0), (1, 0)))
    left = padded[1:, :-1]
    up = padded[:-1, 1:]
    upleft = padded[:-1, :-1]
    hi = np.maximum(left, up)
    lo = np.minimum(left, up)
    gradient = np.clip(left + up - upleft, 0, depth_levels - 1)
    return np.where(upleft >= hi, lo, np.where(upleft <= lo, hi, gradient))


def predict_array(pixels: np.ndarray, depth_levels: int) -> np.ndarray:
    """Return the folded prediction errors of a 2-D array."""
    error = np.asarray(pixels, dtype=np.int64) - prediction_plane(pixels, depth_levels)
    return np.where(error >= 0, 2 * error, -2 * error - 1)


def predict(img: Image) -> ResidualPlane:
    """Run MED prediction and sign folding over an image."""
    folded = predict_array(img.pixels, img.depth_levels)
    return ResidualPlane(img.height, img.width, img.depth_levels, folded)


def unpredict(plane: ResidualPlane, depth_levels: int) -> Image:
    """Rebuild an image from its folded prediction errors.

    Raises:
        CorruptionError: If a reconstructed pixel leaves [0, D - 1].
    """
    if plane.depth_levels != depth_levels:
        raise UsageError(
            f"Plane depth {plane.depth_levels} does not match requested depth {depth_levels}"
        )
    values = plane.tolist()
    out = [[0] * plane.width for _ in range(plane.height)]
    top = depth_levels - 1
    prev = [0] * plane.width
    for y, row in enumerate(values):
        cur = out[y]
        left = 0
        upleft = 0
        for x, value in enumerate(row):
            up = prev[x]
            if upleft >= (left if left > up else up):
                pred = left if left < up else up
            elif upleft <= (left if left < up else up):
                pred = left if left > up else up
            else:
                pred = min(max(left + up - upleft, 0), top)
            pixel = pred + unfold_error(value)
            if pixel < 0 or pixel > top:
                raise CorruptionError(
                    f"Reconstructed pixel {pixel} at ({y}, {x}) is outside [0, {top}]"
                )
            cur[x] = pixel
            left = pixel
            upleft = up
        prev = cur
    return Image(plane.height, plane.width, depth_levels, np.array(out, dtype=np.int64))


def split_layers(plane: ResidualPlane, interface: int) -> LayerPair:
    """Split a plane into value // 2^l and value % 2^l.

    Raises:
        UsageError: If the interface is outside [0, floor(log2 D)].
    """
    if not 0 <= interface <= max_interface(plane.depth_levels):
        raise UsageError(
            f"Layer interface must lie in [0, {max_interface(plane.depth_levels)}], got {interface}"
        )
    values = plane.values
    shape = values >> interface
    detail = values & ((1 << interface) - 1)
    return LayerPair(
        shape_layer=ResidualPlane(plane.height, plane.width, plane.depth_levels, shape),
        detail_layer=ResidualPlane(plane.height, plane.width, plane.depth_levels, detail),
        interface=interface,
    )


def merge_layers(pair: LayerPair) -> ResidualPlane:
    """Recombine shape * 2^l + detail.

    Raises:
        CorruptionError: If a merged value exceeds 2D - 2.
    """
    shape = pair.shape_layer
    merged = (shape.values << pair.interface) + pair.detail_layer.values
    if merged.size and merged.max() > shape.max_value:
        raise CorruptionError(f"Merged residual {merged.max()} exceeds {shape.max_value}")
    return ResidualPlane(shape.height, shape.width, shape.depth_levels, merged)


def residual_p0(img: Image) -> float:
    """Return the share of zero residuals after prediction."""
    return float(np.mean(predict_array(img.pixels, img.depth_levels) == 0))


def reverse_binary(img: Image) -> tuple[np.ndarray, bool]:
    """Invert a binary image when zeros are the minority, so p(0) >= 0.5.

    Returns:
        The (possibly inverted) pixel array and whether it was inverted.
    """
    if img.depth_levels != 2:
        raise UsageError(f"Binary coding needs depth_levels = 2, got {img.depth_levels}")
    ones = int(img.pixels.sum())
    inverted = 2 * ones > img.pixel_count
    return (1 - img.pixels if inverted else img.pixels), inverted


def image_layers(img: Image, interface: int, binary: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Return the raw shape and detail layer arrays the codec works on.

    Binary images bypass prediction: the shape layer is the (reversed)
    pixel plane and the detail layer is all zero.
    """
    if binary:
        plane, _ = reverse_binary(img)
        return plane, np.zeros_like(plane)
    pair = split_layers(predict(img), interface)
    return pair.shape_layer.values, pair.detail_layer.values

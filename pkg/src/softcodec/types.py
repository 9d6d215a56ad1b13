"""Core types for softcodec."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence

import numpy as np

from .errors import UsageError


class WeightMode(Enum):
    """How shape frequencies turn into Huffman weights."""
    COUNT = "count"
    COUNT_SIZE = "count-size"


class BenchMode(Enum):
    """Codebook sharing used by the benchmark."""
    PER_CLASS = "per-class"
    SHARED = "shared"


def _frozen_plane(data: np.ndarray | Sequence, height: int, width: int) -> np.ndarray:
    """Return a read-only int64 copy of data shaped (height, width)."""
    arr = np.array(data, dtype=np.int64)
    if arr.size != height * width:
        raise UsageError(
            f"Expected {height * width} values for a {height}x{width} plane, got {arr.size}"
        )
    arr = arr.reshape(height, width)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Image:
    """A rectangular grid of intensities in [0, depth_levels - 1]."""
    height: int
    width: int
    depth_levels: int
    pixels: np.ndarray

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise UsageError(f"Image dimensions must be positive, got {self.height}x{self.width}")
        if self.depth_levels < 2:
            raise UsageError(f"depth_levels must be >= 2, got {self.depth_levels}")
        pixels = _frozen_plane(self.pixels, self.height, self.width)
        if pixels.size and (pixels.min() < 0 or pixels.max() > self.depth_levels - 1):
            raise UsageError(
                f"Pixel values must lie in [0, {self.depth_levels - 1}], "
                f"got [{pixels.min()}, {pixels.max()}]"
            )
        object.__setattr__(self, "pixels", pixels)

    @classmethod
    def from_array(cls, array: np.ndarray | Sequence, depth_levels: int) -> Image:
        """Build an image from a 2-D array-like."""
        arr = np.asarray(array, dtype=np.int64)
        if arr.ndim != 2:
            raise UsageError(f"Expected a 2-D array, got {arr.ndim} dimensions")
        return cls(arr.shape[0], arr.shape[1], depth_levels, arr)

    @property
    def pixel_count(self) -> int:
        """Return M * N."""
        return self.height * self.width

    @property
    def bits_per_pixel(self) -> int:
        """Return ceil(log2 D), the natural binary code width."""
        return math.ceil(math.log2(self.depth_levels))

    def tolist(self) -> list[list[int]]:
        """Return the pixels as nested lists."""
        return self.pixels.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Image):
            return NotImplemented
        return (
            self.depth_levels == other.depth_levels
            and self.pixels.shape == other.pixels.shape
            and bool(np.array_equal(self.pixels, other.pixels))
        )

    def __hash__(self) -> int:
        return hash((self.height, self.width, self.depth_levels, self.pixels.tobytes()))


@dataclass(frozen=True, eq=False)
class ResidualPlane:
    """A plane of mapped prediction errors in [0, 2D - 2].

    Shape and detail layers are residual planes too; their tighter ranges
    are a subset of the same bound.
    """
    height: int
    width: int
    depth_levels: int
    values: np.ndarray

    def __post_init__(self) -> None:
        values = _frozen_plane(self.values, self.height, self.width)
        if values.size and (values.min() < 0 or values.max() > self.max_value):
            raise UsageError(
                f"Residual values must lie in [0, {self.max_value}], "
                f"got [{values.min()}, {values.max()}]"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def from_array(cls, array: np.ndarray | Sequence, depth_levels: int) -> ResidualPlane:
        """Build a plane from a 2-D array-like."""
        arr = np.asarray(array, dtype=np.int64)
        if arr.ndim != 2:
            raise UsageError(f"Expected a 2-D array, got {arr.ndim} dimensions")
        return cls(arr.shape[0], arr.shape[1], depth_levels, arr)

    @property
    def max_value(self) -> int:
        """Return 2D - 2."""
        return 2 * self.depth_levels - 2

    def tolist(self) -> list[list[int]]:
        """Return the values as nested lists."""
        return self.values.tolist()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ResidualPlane):
            return NotImplemented
        return (
            self.depth_levels == other.depth_levels
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    def __hash__(self) -> int:
        return hash((self.height, self.width, self.depth_levels, self.values.tobytes()))


@dataclass(frozen=True)
class MultiComponentImage:
    """Several same-sized components, e.g. the R, G, B planes of a PPM."""
    components: tuple[Image, ...]
    component_labels: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        components = tuple(self.components)
        if not components:
            raise UsageError("A multi-component image needs at least one component")
        first = components[0]
        for comp in components[1:]:
            if (comp.height, comp.width) != (first.height, first.width):
                raise UsageError("All components must share dimensions")
        labels = tuple(self.component_labels)
        if not labels:
            labels = ("Y",) if len(components) == 1 else tuple(
                f"C{i}" for i in range(len(components))
            )
        if len(labels) != len(components):
            raise UsageError("One label is required per component")
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "component_labels", labels)

    @property
    def height(self) -> int:
        return self.components[0].height

    @property
    def width(self) -> int:
        return self.components[0].width

    @property
    def depth_levels(self) -> int:
        return self.components[0].depth_levels

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Image]:
        return iter(self.components)


@dataclass(frozen=True)
class Corpus:
    """A training or test set of images sharing one depth."""
    images: tuple[Image, ...] = field(default_factory=tuple)
    class_label: str | None = None

    def __post_init__(self) -> None:
        images = tuple(self.images)
        depths = {img.depth_levels for img in images}
        if len(depths) > 1:
            raise UsageError(f"Corpus images must share depth_levels, got {sorted(depths)}")
        object.__setattr__(self, "images", images)

    @property
    def depth_levels(self) -> int | None:
        """Return the shared depth, or None for an empty corpus."""
        return self.images[0].depth_levels if self.images else None

    def __len__(self) -> int:
        return len(self.images)

    def __iter__(self) -> Iterator[Image]:
        return iter(self.images)

    def __getitem__(self, index: int) -> Image:
        return self.images[index]

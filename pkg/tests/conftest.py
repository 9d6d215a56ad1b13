"""pytest configuration and fixtures."""

import numpy as np
import pytest

from softcodec.config import TrainingConfig
from softcodec.shapes import Codebook, ShapeFrequencyTable, build_codebook
from softcodec.training import train_codebook
from softcodec.types import Corpus, Image


def blob_image(rng: np.random.Generator, size: int = 16, depth: int = 256) -> Image:
    """Return a sparse image: dark background with a few bright rectangles."""
    pixels = np.zeros((size, size), dtype=np.int64)
    for _ in range(3):
        r, c = rng.integers(0, size - 4, size=2)
        h, w = rng.integers(2, 5, size=2)
        pixels[r:r + h, c:c + w] = rng.integers(depth // 2, depth)
    return Image.from_array(pixels, depth)


@pytest.fixture
def rng() -> np.random.Generator:
    """Return a seeded generator."""
    return np.random.default_rng(1234)


@pytest.fixture
def gray_corpus() -> Corpus:
    """Return twelve sparse 16x16 gray images."""
    rng = np.random.default_rng(7)
    return Corpus(tuple(blob_image(rng) for _ in range(12)), "blobs")


@pytest.fixture
def binary_corpus() -> Corpus:
    """Return twelve 16x16 binary images with blocky foreground."""
    rng = np.random.default_rng(11)
    images = []
    for _ in range(12):
        img = blob_image(rng, depth=256)
        images.append(Image.from_array((img.pixels > 0).astype(np.int64), 2))
    return Corpus(tuple(images), "binary")


@pytest.fixture
def small_config() -> TrainingConfig:
    """Return a quick training configuration with a fixed interface."""
    return TrainingConfig(interface=2, max_shape_dim=3, search_sample=4)


@pytest.fixture
def gray_codebook(gray_corpus: Corpus, small_config: TrainingConfig) -> Codebook:
    """Return a codebook trained on the gray corpus."""
    return train_codebook(gray_corpus, small_config).codebook


@pytest.fixture
def binary_codebook(binary_corpus: Corpus) -> Codebook:
    """Return a binary codebook trained on the binary corpus."""
    return train_codebook(binary_corpus, TrainingConfig(binary=True, max_shape_dim=3)).codebook


@pytest.fixture
def floor_codebook() -> Codebook:
    """Return a D=8, l=0 codebook holding only the 1x1 shapes."""
    return build_codebook(ShapeFrequencyTable(), {}, interface=0, depth_levels=8, max_shape_dim=2)

"""Codebook training: interface search, shape mining and code generation."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Iterable

from .coders.golomb import golomb_select_m
from .codec import anchor_indices, cover_shape_layer, encode_binary, encode_gray, location_deltas
from .config import TrainingConfig
from .errors import UsageError
from .shapes import (
    SHAPE_VALUE_LIMIT,
    Codebook,
    ShapeFrequencyTable,
    build_codebook,
    max_shape_value,
    mine_shapes,
)
from .transform import image_layers, max_interface
from .types import Corpus, Image
from .worker import WorkerPool

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingReport:
    """Outcome of a training run."""

    codebook: Codebook
    interface: int
    shape_count: int
    detail_alphabet: int
    images: int
    seconds: float
    search_totals: dict[int, int] = field(default_factory=dict)  # l -> sample frame bits


def _build(table: ShapeFrequencyTable, interface: int, depth: int, config: TrainingConfig,
           golomb_m: int = 1) -> Codebook:
    return build_codebook(
        table,
        table.detail_counts,
        interface,
        depth,
        config.max_shape_dim,
        weight_mode=config.weight_mode,
        binary=config.binary,
        golomb_m=golomb_m,
    )


def _trial_golomb_m(images: Iterable[Image], cb: Codebook) -> int:
    """Pick the default Golomb m from the location deltas of a trial cover."""
    deltas: list[int] = []
    for img in images:
        shape_layer, _ = image_layers(img, cb.interface, cb.binary)
        triplets = cover_shape_layer(shape_layer, cb)
        deltas.extend(location_deltas(anchor_indices(triplets, cb, img.width)))
    return golomb_select_m(deltas).m if deltas else 1


def _sample_bits(images: list[Image], cb: Codebook, pool: WorkerPool) -> int:
    encode = encode_binary if cb.binary else encode_gray
    return sum(pool.map(lambda img: encode(img, cb).bit_size, images))


def feasible_interfaces(depth: int) -> list[int]:
    """Return the interfaces whose shape values fit a codebook cell."""
    return [
        interface
        for interface in range(max_interface(depth) + 1)
        if max_shape_value(depth, interface) <= SHAPE_VALUE_LIMIT
    ]


def search_interface(
    sample: list[Image], depth: int, config: TrainingConfig, pool: WorkerPool
) -> tuple[int, dict[int, int]]:
    """Score every layer interface on a sample and return the cheapest.

    Ties go to the smaller interface. Interfaces whose shape values overflow
    a codebook cell are skipped.

    Raises:
        UsageError: If no interface is feasible for the depth.
    """
    candidates = feasible_interfaces(depth)
    if not candidates:
        raise UsageError(f"No layer interface fits D={depth}")
    skipped = max_interface(depth) + 1 - len(candidates)
    if skipped:
        LOG.debug("Skipping %d interfaces below l=%d for D=%d", skipped, candidates[0], depth)
    totals: dict[int, int] = {}
    for interface in candidates:
        table = mine_shapes(
            sample, interface, config.max_shape_dim, config.prune_below, config.keep_top,
            epoch_size=config.epoch_size, pool=pool,
        )
        totals[interface] = _sample_bits(sample, _build(table, interface, depth, config), pool)
        LOG.debug("Interface l=%d: %d bits on %d images", interface, totals[interface], len(sample))
    best = min(totals, key=lambda i: (totals[i], i))
    LOG.info("Selected interface l=%d", best)
    return best, totals


def train_codebook(
    corpus: Corpus, config: TrainingConfig = TrainingConfig(), pool: WorkerPool | None = None
) -> TrainingReport:
    """Train a codebook on a corpus.

    Raises:
        UsageError: On an empty corpus or a binary run over non-binary images.
    """
    if not len(corpus):
        raise UsageError("Cannot train on an empty corpus")
    depth = corpus.depth_levels
    assert depth is not None
    if config.binary and depth != 2:
        raise UsageError(f"Binary training needs D = 2, got D = {depth}")
    pool = pool or WorkerPool()
    start = time.perf_counter()

    images = list(corpus)
    sample = images[: config.search_sample]
    totals: dict[int, int] = {}
    if config.binary:
        interface = 0
    elif config.interface is None:
        interface, totals = search_interface(sample, depth, config, pool)
    else:
        interface = config.interface
        if interface > max_interface(depth):
            raise UsageError(f"Interface {interface} exceeds {max_interface(depth)} for D={depth}")
        if interface not in feasible_interfaces(depth):
            raise UsageError(f"Interface {interface} leaves shape values above 16 bits for D={depth}")

    table = mine_shapes(
        images, interface, config.max_shape_dim, config.prune_below, config.keep_top,
        binary=config.binary, epoch_size=config.epoch_size, pool=pool,
    )
    draft = _build(table, interface, depth, config)
    codebook = _build(table, interface, depth, config, golomb_m=_trial_golomb_m(sample, draft))

    seconds = time.perf_counter() - start
    LOG.info(
        "Trained codebook on %d images in %.2fs: %d shapes, l=%d",
        len(images), seconds, len(codebook.shapes), interface,
    )
    return TrainingReport(
        codebook=codebook,
        interface=interface,
        shape_count=len(codebook.shapes),
        detail_alphabet=1 << interface,
        images=len(images),
        seconds=seconds,
        search_totals=totals,
    )

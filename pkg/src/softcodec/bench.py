"""Benchmark harness: trains codebooks, encodes test sets and tabulates ratios.

Every runner returns a BenchmarkSummary whose rows are codebook classes or
methods and whose columns are test classes. Per-image work runs on a
WorkerPool; results are gathered in input order so reports are stable.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from .baselines import huffman_baseline, predictive_golomb_baseline, train_pixel_code
from .codec import encode_image
from .config import BenchConfig
from .corpus import binarize_corpus
from .errors import UsageError
from .info_theory import IntensityDistribution, civ, spearman, write_csv
from .shapes import Codebook, serialize_codebook
from .training import train_codebook
from .transform import predict_array, reverse_binary
from .types import BenchMode, Corpus, Image
from .worker import WorkerPool

LOG = logging.getLogger(__name__)

SOFT = "soft"
HUFFMAN = "huffman"
PREDICTIVE_GOLOMB = "predictive-golomb"


@dataclass
class BenchmarkResult:
    """One cell of a report: a method or codebook on one test class."""

    method: str
    codebook_class: str
    test_class: str
    mean_ratio: float
    images: int
    seconds: float
    total_bits: int = 0


@dataclass
class BenchmarkSummary:
    """A table of results plus per-class CIVs and the codebooks used.

    Ratios exclude the codebook, which both sides hold in advance;
    `codebook_bytes` reports its serialized size separately.
    """

    title: str
    results: list[BenchmarkResult] = field(default_factory=list)
    civ_by_class: dict[str, float] = field(default_factory=dict)
    correlation: float | None = None
    codebooks: dict[str, Codebook] = field(default_factory=dict)

    @property
    def codebook_bytes(self) -> dict[str, int]:
        return {label: len(serialize_codebook(cb)) for label, cb in self.codebooks.items()}

    @property
    def rows(self) -> list[str]:
        return list(dict.fromkeys(self._row_key(r) for r in self.results))

    @property
    def columns(self) -> list[str]:
        return list(dict.fromkeys(r.test_class for r in self.results))

    @staticmethod
    def _row_key(result: BenchmarkResult) -> str:
        return result.codebook_class if result.method == SOFT else result.method

    def cell(self, row: str, column: str) -> BenchmarkResult | None:
        for result in self.results:
            if self._row_key(result) == row and result.test_class == column:
                return result
        return None

    def column_mean(self, column: str) -> float:
        values = [r.mean_ratio for r in self.results if r.test_class == column]
        return float(np.mean(values)) if values else 0.0

    def diagonal_wins(self) -> int:
        """Count columns whose same-class codebook beats the column mean."""
        wins = 0
        for column in self.columns:
            own = self.cell(column, column)
            if own is not None and own.mean_ratio >= self.column_mean(column):
                wins += 1
        return wins


def _timed_ratios(
    images: list[Image], measure: Callable[[Image], tuple[float, int]], pool: WorkerPool
) -> tuple[float, int, float]:
    start = time.perf_counter()
    outcomes = pool.map(measure, images)
    seconds = time.perf_counter() - start
    ratios = [ratio for ratio, _ in outcomes]
    return float(np.mean(ratios)), sum(bits for _, bits in outcomes), seconds


def _soft_measure(cb: Codebook) -> Callable[[Image], tuple[float, int]]:
    def measure(img: Image) -> tuple[float, int]:
        bits = encode_image(img, cb).bit_size
        return img.pixel_count * img.bits_per_pixel / bits, bits
    return measure


def _bits_measure(count_bits: Callable[[Image], int]) -> Callable[[Image], tuple[float, int]]:
    def measure(img: Image) -> tuple[float, int]:
        bits = count_bits(img)
        return img.pixel_count * img.bits_per_pixel / bits, bits
    return measure


def image_civ(img: Image, binary: bool = False) -> float:
    """Return the CIV of an image: of its pixels when binary, of its residuals otherwise."""
    if binary:
        plane, _ = reverse_binary(img)
        dist = IntensityDistribution.from_counts(np.bincount(plane.ravel(), minlength=2))
    else:
        residuals = predict_array(img.pixels, img.depth_levels)
        dist = IntensityDistribution.from_counts(
            np.bincount(residuals.ravel(), minlength=2 * img.depth_levels - 1)
        )
    return 0.0 if dist.p0 >= 1.0 else civ(dist.p0)


def _prepare(corpora: Mapping[str, Corpus], config: BenchConfig) -> dict[str, Corpus]:
    if not corpora:
        raise UsageError("The benchmark needs at least one class")
    for label, corpus in corpora.items():
        if not len(corpus):
            raise UsageError(f"Class {label} has no images")
    if config.binary:
        return {label: binarize_corpus(c, config.threshold) for label, c in corpora.items()}
    return dict(corpora)


def _train(corpus: Corpus, config: BenchConfig, pool: WorkerPool) -> Codebook:
    training = replace(config.training, binary=True, interface=None) if config.binary else config.training
    return train_codebook(corpus, training, pool).codebook


def _merge(corpora: Mapping[str, Corpus]) -> Corpus:
    return Corpus(tuple(img for corpus in corpora.values() for img in corpus), "all")


def run_per_class(
    train_by_class: Mapping[str, Corpus],
    test_by_class: Mapping[str, Corpus],
    config: BenchConfig = BenchConfig(),
    pool: WorkerPool | None = None,
) -> BenchmarkSummary:
    """Cross every class codebook with every test class."""
    pool = pool or WorkerPool()
    train = _prepare(train_by_class, config)
    test = _prepare(test_by_class, config)
    codebooks = {label: _train(corpus, config, pool) for label, corpus in train.items()}

    summary = BenchmarkSummary("Per-class codebooks")
    for cb_label, cb in codebooks.items():
        summary.codebooks[cb_label] = cb
        for test_label, corpus in test.items():
            mean, bits, seconds = _timed_ratios(list(corpus), _soft_measure(cb), pool)
            summary.results.append(
                BenchmarkResult(SOFT, cb_label, test_label, mean, len(corpus), seconds, bits)
            )
            LOG.debug("Codebook %s on class %s: %.3f", cb_label, test_label, mean)
    summary.civ_by_class = {
        label: float(np.mean([image_civ(img, config.binary) for img in corpus]))
        for label, corpus in test.items()
    }
    return summary


def run_shared(
    train_by_class: Mapping[str, Corpus],
    test_by_class: Mapping[str, Corpus],
    config: BenchConfig = BenchConfig(),
    pool: WorkerPool | None = None,
) -> BenchmarkSummary:
    """Compare soft compression with one shared codebook against both baselines."""
    pool = pool or WorkerPool()
    train = _prepare(train_by_class, config)
    test = _prepare(test_by_class, config)
    merged = _merge(train)
    depth = merged.depth_levels
    assert depth is not None
    cb = _train(merged, config, pool)
    shared_code = train_pixel_code(merged, depth)

    summary = BenchmarkSummary("Shared codebook")
    summary.codebooks[SOFT] = cb
    for label, corpus in test.items():
        images = list(corpus)
        mean, bits, seconds = _timed_ratios(images, _soft_measure(cb), pool)
        summary.results.append(BenchmarkResult(SOFT, SOFT, label, mean, len(images), seconds, bits))

        code = shared_code
        if config.per_class_huffman and label in train:
            code = train_pixel_code(train[label], depth)
        mean, bits, seconds = _timed_ratios(
            images, _bits_measure(partial(huffman_baseline, code=code)), pool
        )
        summary.results.append(BenchmarkResult(HUFFMAN, "", label, mean, len(images), seconds, bits))

        mean, bits, seconds = _timed_ratios(images, _bits_measure(predictive_golomb_baseline), pool)
        summary.results.append(
            BenchmarkResult(PREDICTIVE_GOLOMB, "", label, mean, len(images), seconds, bits)
        )
    summary.civ_by_class = {
        label: float(np.mean([image_civ(img, config.binary) for img in corpus]))
        for label, corpus in test.items()
    }
    return summary


def run_binary(
    train_by_class: Mapping[str, Corpus],
    test_by_class: Mapping[str, Corpus],
    config: BenchConfig = BenchConfig(binary=True),
    pool: WorkerPool | None = None,
) -> BenchmarkSummary:
    """Binarize each class, encode it with its own codebook and correlate ratio with CIV."""
    pool = pool or WorkerPool()
    config = replace(config, binary=True)
    train = _prepare(train_by_class, config)
    test = _prepare(test_by_class, config)

    summary = BenchmarkSummary("Binary images, per-class codebooks")
    for label, corpus in test.items():
        source = train.get(label)
        if source is None:
            raise UsageError(f"No training images for class {label}")
        cb = _train(source, config, pool)
        summary.codebooks[label] = cb
        mean, bits, seconds = _timed_ratios(list(corpus), _soft_measure(cb), pool)
        summary.results.append(BenchmarkResult(SOFT, label, label, mean, len(corpus), seconds, bits))
        summary.civ_by_class[label] = float(np.mean([image_civ(img, True) for img in corpus]))

    if len(summary.results) >= 2:
        summary.correlation = spearman(
            [summary.civ_by_class[r.test_class] for r in summary.results],
            [r.mean_ratio for r in summary.results],
        )
    return summary


def run_single_pixel_comparison(
    train_by_class: Mapping[str, Corpus],
    test_by_class: Mapping[str, Corpus],
    config: BenchConfig = BenchConfig(),
    pool: WorkerPool | None = None,
    codebooks: Mapping[str, Codebook] | None = None,
) -> BenchmarkSummary:
    """Total bits per class with the full codebook and with its 1x1 shapes only.

    Args:
        codebooks: Codebooks an earlier run already trained, keyed like
            `BenchmarkSummary.codebooks` ("soft" for a shared run, class
            labels otherwise). Missing ones are trained here.
    """
    pool = pool or WorkerPool()
    trained = dict(codebooks or {})
    train = _prepare(train_by_class, config)
    test = _prepare(test_by_class, config)
    shared = config.mode is BenchMode.SHARED and not config.binary
    if shared and SOFT not in trained:
        trained[SOFT] = _train(_merge(train), config, pool)

    summary = BenchmarkSummary("Full codebook vs single-pixel shapes")
    for label, corpus in test.items():
        key = SOFT if shared else label
        if key not in trained:
            if label not in train:
                raise UsageError(f"No training images for class {label}")
            trained[key] = _train(train[label], config, pool)
        full = trained[key]
        for method, cb in (("full", full), ("single-pixel", full.restricted_to_single_pixels())):
            mean, bits, seconds = _timed_ratios(list(corpus), _soft_measure(cb), pool)
            summary.results.append(BenchmarkResult(method, "", label, mean, len(corpus), seconds, bits))
    summary.codebooks = trained
    return summary


def run(
    train_by_class: Mapping[str, Corpus],
    test_by_class: Mapping[str, Corpus],
    config: BenchConfig,
    pool: WorkerPool | None = None,
) -> BenchmarkSummary:
    """Dispatch on the configured mode."""
    if config.binary:
        return run_binary(train_by_class, test_by_class, config, pool)
    if config.mode is BenchMode.SHARED:
        return run_shared(train_by_class, test_by_class, config, pool)
    return run_per_class(train_by_class, test_by_class, config, pool)


def format_table(summary: BenchmarkSummary, value: str = "ratio") -> str:
    """Render a summary as a fixed-width text table.

    Args:
        value: "ratio" for mean compression ratios, "bits" for total bits.
    """
    columns = summary.columns
    width = max([10] + [len(c) + 2 for c in columns])
    label_width = max([12] + [len(r) + 2 for r in summary.rows])
    lines = [summary.title, "=" * len(summary.title)]
    lines.append("".ljust(label_width) + "".join(c.rjust(width) for c in columns))
    for row in summary.rows:
        cells = []
        for column in columns:
            result = summary.cell(row, column)
            if result is None:
                cells.append("-".rjust(width))
            elif value == "bits":
                cells.append(str(result.total_bits).rjust(width))
            else:
                cells.append(f"{result.mean_ratio:.2f}".rjust(width))
        lines.append(row.ljust(label_width) + "".join(cells))
    if summary.civ_by_class:
        lines.append(
            "CIV".ljust(label_width)
            + "".join(f"{summary.civ_by_class.get(c, 0.0):.2f}".rjust(width) for c in columns)
        )
    if summary.correlation is not None:
        lines.append(f"Spearman(CIV, ratio) = {summary.correlation:.3f}")
    if summary.codebook_bytes:
        sizes = ", ".join(f"{k}={v}" for k, v in summary.codebook_bytes.items())
        lines.append(f"Codebook bytes: {sizes}")
    return "\n".join(lines)


def write_summary_csv(summary: BenchmarkSummary, path: Path | str) -> None:
    """Export every result of a summary as one CSV row."""
    write_csv(
        path,
        ["method", "codebook_class", "test_class", "mean_ratio", "images", "total_bits", "seconds", "civ"],
        [
            (
                r.method, r.codebook_class, r.test_class, f"{r.mean_ratio:.6f}", r.images,
                r.total_bits, f"{r.seconds:.3f}", f"{summary.civ_by_class.get(r.test_class, 0.0):.6f}",
            )
            for r in summary.results
        ],
    )

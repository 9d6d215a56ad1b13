"""Tests for the benchmark harness."""

from unittest.mock import patch

import numpy as np
import pytest

from softcodec.bench import (
    HUFFMAN,
    PREDICTIVE_GOLOMB,
    SOFT,
    BenchmarkResult,
    BenchmarkSummary,
    format_table,
    image_civ,
    run,
    run_binary,
    run_per_class,
    run_shared,
    run_single_pixel_comparison,
    write_summary_csv,
)
from softcodec.codec import encode_gray_with_stats
from softcodec.config import BenchConfig, TrainingConfig
from softcodec.errors import UsageError
from softcodec.types import BenchMode, Corpus, Image
from softcodec.worker import WorkerPool

QUICK = TrainingConfig(interface=2, max_shape_dim=2, search_sample=2)


@pytest.fixture
def classes(gray_corpus):
    """Return two six-image classes."""
    images = gray_corpus.images
    return {"a": Corpus(images[:6], "a"), "b": Corpus(images[6:], "b")}


@pytest.fixture
def pool():
    return WorkerPool(2)


class TestRunners:
    """Tests for the benchmark runners."""

    def test_per_class(self, classes, pool):
        """Test the codebook-by-class matrix."""
        summary = run_per_class(classes, classes, BenchConfig(training=QUICK), pool)
        assert summary.rows == ["a", "b"]
        assert summary.columns == ["a", "b"]
        assert len(summary.results) == 4
        assert all(r.method == SOFT and r.mean_ratio > 0 for r in summary.results)
        assert set(summary.civ_by_class) == {"a", "b"}
        assert set(summary.codebook_bytes) == {"a", "b"}
        assert all(size > 20 for size in summary.codebook_bytes.values())
        assert 0 <= summary.diagonal_wins() <= 2

    def test_shared(self, classes, pool):
        """Test one codebook against both baselines."""
        config = BenchConfig(mode=BenchMode.SHARED, per_class_huffman=True, training=QUICK)
        summary = run_shared(classes, classes, config, pool)
        assert summary.rows == [SOFT, HUFFMAN, PREDICTIVE_GOLOMB]
        assert len(summary.results) == 6
        cell = summary.cell(HUFFMAN, "a")
        assert cell is not None and cell.images == 6
        assert list(summary.codebook_bytes) == [SOFT]
        assert format_table(summary).splitlines()[-1].startswith("Codebook bytes: soft=")

    def test_binary(self, classes, pool):
        """Test binarized classes with the CIV correlation."""
        config = BenchConfig(binary=True, training=TrainingConfig(max_shape_dim=2))
        summary = run_binary(classes, classes, config, pool)
        assert len(summary.results) == 2
        assert summary.correlation is not None
        assert -1.0 <= summary.correlation <= 1.0

    def test_binary_needs_training_class(self, classes, pool):
        """Test a test class without training images."""
        config = BenchConfig(binary=True, training=TrainingConfig(max_shape_dim=2))
        with pytest.raises(UsageError):
            run_binary({"a": classes["a"]}, classes, config, pool)

    def test_single_pixel_comparison(self, classes, pool):
        """Test the full versus single-pixel comparison."""
        summary = run_single_pixel_comparison(classes, classes, BenchConfig(training=QUICK), pool)
        assert summary.rows == ["full", "single-pixel"]
        for column in summary.columns:
            full = summary.cell("full", column)
            single = summary.cell("single-pixel", column)
            assert full is not None and single is not None
            assert full.total_bits > 0 and single.total_bits > 0

    def test_single_pixel_comparison_reuses_codebooks(self, classes, pool):
        """Test that codebooks from an earlier run are not trained again."""
        config = BenchConfig(mode=BenchMode.SHARED, training=QUICK)
        shared = run_shared(classes, classes, config, pool)
        per_class = run_per_class(classes, classes, BenchConfig(training=QUICK), pool)
        with patch("softcodec.bench.train_codebook") as train:
            reused = run_single_pixel_comparison(classes, classes, config, pool, codebooks=shared.codebooks)
            by_class = run_single_pixel_comparison(
                classes, classes, BenchConfig(training=QUICK), pool, codebooks=per_class.codebooks
            )
        train.assert_not_called()
        assert reused.codebooks[SOFT] is shared.codebooks[SOFT]
        assert all(by_class.codebooks[k] is per_class.codebooks[k] for k in ("a", "b"))

    def test_soft_beats_huffman_when_civ_exceeds_location_cost(self, pool):
        """Test a class of horizontal ramps, whose residuals are zero below the first row."""
        rng = np.random.default_rng(3)
        cols = np.arange(32)
        images = tuple(
            Image.from_array(np.tile(int(rng.integers(128, 256)) - int(rng.integers(1, 4)) * cols, (32, 1)), 256)
            for _ in range(4)
        )
        ramps = {"ramp": Corpus(images, "ramp")}
        config = BenchConfig(mode=BenchMode.SHARED, training=TrainingConfig(interface=0, max_shape_dim=3))
        summary = run_shared(ramps, ramps, config, pool)

        cb = summary.codebooks[SOFT]
        location_cost = float(np.mean([encode_gray_with_stats(img, cb)[1].location_cost for img in images]))
        assert summary.civ_by_class["ramp"] > location_cost
        soft = summary.cell(SOFT, "ramp")
        huffman = summary.cell(HUFFMAN, "ramp")
        assert soft is not None and huffman is not None
        assert soft.mean_ratio >= huffman.mean_ratio

    def test_dispatch(self, classes, pool):
        """Test that run picks the configured runner."""
        shared = run(classes, classes, BenchConfig(mode=BenchMode.SHARED, training=QUICK), pool)
        assert shared.title == "Shared codebook"
        per_class = run(classes, classes, BenchConfig(training=QUICK), pool)
        assert per_class.title == "Per-class codebooks"

    def test_empty_class(self, classes, pool):
        """Test that every class needs images."""
        with pytest.raises(UsageError):
            run_per_class({"a": Corpus()}, classes, BenchConfig(training=QUICK), pool)
        with pytest.raises(UsageError):
            run_per_class({}, classes, BenchConfig(training=QUICK), pool)


class TestImageCiv:
    """Tests for image_civ."""

    def test_constant_image(self):
        """Test that p0 = 1 reports zero."""
        img = Image.from_array(np.zeros((4, 4)), 256)
        assert image_civ(img) == 0.0

    def test_half_zero_binary(self):
        """Test C(1/2) = 2 on a balanced binary image."""
        img = Image.from_array([[0, 1], [1, 0]], 2)
        assert image_civ(img, binary=True) == pytest.approx(2.0)


class TestReports:
    """Tests for table and CSV output."""

    @pytest.fixture
    def summary(self):
        return BenchmarkSummary(
            "Demo",
            [
                BenchmarkResult(SOFT, "a", "a", 2.5, 3, 0.1, 900),
                BenchmarkResult(SOFT, "a", "b", 1.5, 3, 0.1, 1500),
                BenchmarkResult(SOFT, "b", "a", 2.0, 3, 0.1, 1100),
            ],
            civ_by_class={"a": 3.0, "b": 1.0},
        )

    def test_format_ratios(self, summary):
        """Test the ratio table layout."""
        lines = format_table(summary).splitlines()
        assert lines[0] == "Demo"
        assert lines[3].startswith("a") and "2.50" in lines[3] and "1.50" in lines[3]
        assert lines[4].startswith("b") and "-" in lines[4]
        assert lines[5].startswith("CIV")

    def test_format_bits(self, summary):
        """Test the total-bits table."""
        assert "1500" in format_table(summary, value="bits")

    def test_diagonal_wins(self, summary):
        """Test same-class wins against the column mean."""
        assert summary.column_mean("a") == pytest.approx(2.25)
        assert summary.diagonal_wins() == 1

    def test_csv(self, summary, tmp_path):
        """Test one CSV row per result."""
        write_summary_csv(summary, tmp_path / "out.csv")
        lines = (tmp_path / "out.csv").read_text().splitlines()
        assert lines[0].startswith("method,codebook_class,test_class")
        assert len(lines) == 4
        assert lines[1].split(",")[:4] == ["soft", "a", "a", "2.500000"]

"""Tests for configuration helpers."""

import logging
import os
from pathlib import Path
from unittest.mock import patch

import pytest

from softcodec.config import (
    LOG_LEVEL_ENV,
    MNIST_DIR_ENV,
    THREADS_ENV,
    BenchConfig,
    TrainingConfig,
    get_dataset_dir,
    get_log_level,
    get_worker_count,
    get_xdg_data_home,
)
from softcodec.errors import UsageError
from softcodec.types import BenchMode, WeightMode


class TestTrainingConfig:
    """Tests for TrainingConfig validation."""

    def test_defaults(self):
        """Test the default parameters."""
        config = TrainingConfig()
        assert config.interface is None
        assert config.max_shape_dim == 4
        assert config.weight_mode is WeightMode.COUNT_SIZE

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"interface": -1},
            {"max_shape_dim": 0},
            {"max_shape_dim": 256},
            {"prune_below": -1},
            {"keep_top": -1},
            {"epoch_size": 0},
            {"search_sample": 0},
            {"binary": True, "interface": 2},
        ],
    )
    def test_invalid(self, kwargs):
        """Test rejected parameter combinations."""
        with pytest.raises(UsageError):
            TrainingConfig(**kwargs)

    def test_bench_defaults(self):
        """Test the desk-scale benchmark defaults."""
        config = BenchConfig()
        assert (config.train_per_class, config.test_per_class) == (1000, 200)
        assert config.mode is BenchMode.PER_CLASS
        assert config.threshold == 128


class TestWorkerCount:
    """Tests for get_worker_count."""

    def test_from_environment(self):
        """Test a valid override."""
        with patch.dict(os.environ, {THREADS_ENV: "2"}):
            assert get_worker_count() == 2

    @pytest.mark.parametrize("raw", ["zero", "0", "-4"])
    def test_invalid_values_fall_back(self, raw):
        """Test that bad values use the default."""
        with patch.dict(os.environ, {THREADS_ENV: raw}):
            assert get_worker_count(default=5) == 5

    def test_unset(self):
        """Test the fallback without the variable."""
        with patch.dict(os.environ, {}, clear=True):
            assert get_worker_count(default=7) == 7
            assert get_worker_count() >= 1


class TestLogLevel:
    """Tests for get_log_level."""

    def test_default_levels(self):
        """Test verbose and quiet defaults."""
        with patch.dict(os.environ, {}, clear=True):
            assert get_log_level() == logging.WARNING
            assert get_log_level(verbose=True) == logging.DEBUG

    def test_environment_override(self):
        """Test a named level from the environment."""
        with patch.dict(os.environ, {LOG_LEVEL_ENV: "info"}):
            assert get_log_level(verbose=True) == logging.INFO

    def test_unknown_level_ignored(self):
        """Test that unknown names are ignored."""
        with patch.dict(os.environ, {LOG_LEVEL_ENV: "chatty"}):
            assert get_log_level() == logging.WARNING


class TestPaths:
    """Tests for directory helpers."""

    def test_xdg_data_home(self, tmp_path):
        """Test the XDG_DATA_HOME override."""
        with patch.dict(os.environ, {"XDG_DATA_HOME": str(tmp_path)}):
            assert get_xdg_data_home() == tmp_path

    def test_xdg_default(self):
        """Test the ~/.local/share default."""
        with patch.dict(os.environ, {}, clear=True):
            assert get_xdg_data_home() == Path.home() / ".local" / "share"

    def test_dataset_dir(self, tmp_path):
        """Test existing and missing dataset directories."""
        with patch.dict(os.environ, {MNIST_DIR_ENV: str(tmp_path)}):
            assert get_dataset_dir(MNIST_DIR_ENV) == tmp_path
        with patch.dict(os.environ, {MNIST_DIR_ENV: str(tmp_path / "missing")}):
            assert get_dataset_dir(MNIST_DIR_ENV) is None
        with patch.dict(os.environ, {}, clear=True):
            assert get_dataset_dir(MNIST_DIR_ENV) is None

"""Configuration for training, benchmarking and the runtime environment."""

import logging
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import UsageError
from .types import BenchMode, WeightMode

LOG = logging.getLogger(__name__)

THREADS_ENV = "SOFTCODEC_THREADS"
LOG_LEVEL_ENV = "SOFTCODEC_LOG_LEVEL"
MNIST_DIR_ENV = "SOFTCODEC_MNIST_DIR"
FASHION_DIR_ENV = "SOFTCODEC_FASHION_DIR"

DEFAULT_THRESHOLD = 128
DEFAULT_SEED = 20210101


@dataclass(frozen=True)
class TrainingConfig:
    """Parameters of the codebook training stage."""

    interface: int | None = None  # None searches every l
    max_shape_dim: int = 4
    prune_below: int = 2
    keep_top: int = 4096
    weight_mode: WeightMode = WeightMode.COUNT_SIZE
    epoch_size: int = 1  # images per pruning epoch
    search_sample: int = 64  # images used to score each candidate l
    binary: bool = False

    def __post_init__(self) -> None:
        if self.interface is not None and self.interface < 0:
            raise UsageError(f"interface must be >= 0, got {self.interface}")
        if not 1 <= self.max_shape_dim <= 255:
            raise UsageError(f"max_shape_dim must be in [1, 255], got {self.max_shape_dim}")
        if self.prune_below < 0:
            raise UsageError(f"prune_below must be >= 0, got {self.prune_below}")
        if self.keep_top < 0:
            raise UsageError(f"keep_top must be >= 0, got {self.keep_top}")
        if self.epoch_size < 1:
            raise UsageError(f"epoch_size must be >= 1, got {self.epoch_size}")
        if self.search_sample < 1:
            raise UsageError(f"search_sample must be >= 1, got {self.search_sample}")
        if self.binary and self.interface not in (None, 0):
            raise UsageError("Binary codebooks always use interface 0")


@dataclass(frozen=True)
class BenchConfig:
    """Desk-scale benchmark parameters."""

    train_per_class: int = 1000
    test_per_class: int = 200
    seed: int = DEFAULT_SEED
    mode: BenchMode = BenchMode.PER_CLASS
    binary: bool = False
    threshold: int = DEFAULT_THRESHOLD
    per_class_huffman: bool = False
    training: TrainingConfig = TrainingConfig()


def get_worker_count(default: int | None = None) -> int:
    """Return the worker thread bound from SOFTCODEC_THREADS.

    Args:
        default: Fallback when the variable is unset; os.cpu_count() if None.

    Returns:
        A positive worker count.
    """
    fallback = default if default is not None else (os.cpu_count() or 1)
    raw = os.environ.get(THREADS_ENV)
    if not raw:
        return max(1, fallback)
    try:
        value = int(raw)
    except ValueError:
        LOG.warning("Ignoring non-integer %s=%r", THREADS_ENV, raw)
        return max(1, fallback)
    if value < 1:
        LOG.warning("Ignoring non-positive %s=%r", THREADS_ENV, raw)
        return max(1, fallback)
    return value


def get_log_level(verbose: bool = False) -> int:
    """Return the CLI log level, honoring SOFTCODEC_LOG_LEVEL."""
    raw = os.environ.get(LOG_LEVEL_ENV)
    if raw:
        level = logging.getLevelName(raw.upper())
        if isinstance(level, int):
            return level
        LOG.warning("Ignoring unknown %s=%r", LOG_LEVEL_ENV, raw)
    return logging.DEBUG if verbose else logging.WARNING


def get_xdg_data_home() -> Path:
    """Get XDG_DATA_HOME directory."""
    xdg = os.environ.get("XDG_DATA_HOME")
    if xdg:
        return Path(xdg)
    return Path.home() / ".local" / "share"


def get_dataset_dir(env_name: str) -> Path | None:
    """Return a dataset directory from the environment if it exists."""
    raw = os.environ.get(env_name)
    if not raw:
        return None
    path = Path(raw)
    return path if path.is_dir() else None

#!/usr/bin/env python3
"""Desk-scale benchmark over MNIST and Fashion-mnist.

Reproduces the three comparisons:
- binary MNIST with per-class codebooks (CIV vs ratio correlation)
- gray Fashion-mnist with per-class codebooks (cross matrix)
- gray Fashion-mnist with one shared codebook against both baselines

Usage:
    python scripts/benchmark.py --mnist ~/data/mnist --fashion ~/data/fashion
    python scripts/benchmark.py --fashion ~/data/fashion --only shared --test-per-class 50
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from softcodec.bench import (
    format_table,
    run_binary,
    run_per_class,
    run_shared,
    run_single_pixel_comparison,
)
from softcodec.config import (
    DEFAULT_SEED,
    FASHION_DIR_ENV,
    MNIST_DIR_ENV,
    BenchConfig,
    get_dataset_dir,
)
from softcodec.corpus import load_idx, load_idx_labels, sample_corpus, split_by_class
from softcodec.types import BenchMode, Corpus
from softcodec.worker import WorkerPool

LOG = logging.getLogger(__name__)


def find_idx(directory: Path, stem: str) -> Path:
    """Find an IDX file, gzipped or not."""
    for name in (stem, f"{stem}.gz"):
        path = directory / name
        if path.exists():
            return path
    raise FileNotFoundError(f"{stem} not found in {directory}")


def load_split(directory: Path, prefix: str, limit: int, seed: int) -> dict[str, Corpus]:
    """Load one split of a dataset and sample each class."""
    images = load_idx(find_idx(directory, f"{prefix}-images-idx3-ubyte"))
    labels = load_idx_labels(find_idx(directory, f"{prefix}-labels-idx1-ubyte"))
    return {
        str(label): sample_corpus(corpus, limit, seed)
        for label, corpus in split_by_class(images, labels).items()
    }


def main() -> int:
    """Main entry point."""
    parser = argparse.ArgumentParser(description="Desk-scale soft compression benchmark")
    parser.add_argument("--mnist", type=Path, default=get_dataset_dir(MNIST_DIR_ENV),
                        help=f"MNIST directory (default: ${MNIST_DIR_ENV})")
    parser.add_argument("--fashion", type=Path, default=get_dataset_dir(FASHION_DIR_ENV),
                        help=f"Fashion-mnist directory (default: ${FASHION_DIR_ENV})")
    parser.add_argument("--only", choices=["binary", "per-class", "shared"],
                        help="Run a single comparison")
    parser.add_argument("--train-per-class", type=int, default=1000)
    parser.add_argument("--test-per-class", type=int, default=200)
    parser.add_argument("--binary-per-class", type=int, default=500,
                        help="Images per class for the binary comparison")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("-v", "--verbose", action="store_true", help="Verbose output")
    args = parser.parse_args()

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )

    config = BenchConfig(
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        seed=args.seed,
    )
    pool = WorkerPool()
    ran = False

    if args.mnist and args.only in (None, "binary"):
        limit = args.binary_per_class
        train = load_split(args.mnist, "train", limit, args.seed)
        test = load_split(args.mnist, "t10k", limit, args.seed)
        print(format_table(run_binary(train, test, replace(config, binary=True), pool)))
        print()
        ran = True

    if args.fashion and args.only in (None, "per-class", "shared"):
        train = load_split(args.fashion, "train", config.train_per_class, args.seed)
        test = load_split(args.fashion, "t10k", config.test_per_class, args.seed)
        if args.only in (None, "per-class"):
            summary = run_per_class(train, test, config, pool)
            print(format_table(summary))
            print(f"Diagonal >= column mean in {summary.diagonal_wins()} of {len(summary.columns)} columns")
            print()
        if args.only in (None, "shared"):
            shared = replace(config, mode=BenchMode.SHARED)
            shared_summary = run_shared(train, test, shared, pool)
            print(format_table(shared_summary))
            print()
            totals = run_single_pixel_comparison(
                train, test, shared, pool, codebooks=shared_summary.codebooks
            )
            print(format_table(totals, value="bits"))
        ran = True

    if not ran:
        print("No dataset directory given; pass --mnist and/or --fashion")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

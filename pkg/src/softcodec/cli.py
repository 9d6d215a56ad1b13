"""Command-line front end.

Exit codes: 0 on success, 2 for usage errors, 3 for malformed, corrupted
or unreadable inputs.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bench import format_table, run, run_single_pixel_comparison, write_summary_csv
from .codebook_store import CodebookStore
from .codec import (
    CONTAINER_MAGIC,
    CompressedFrame,
    decode_image,
    decode_multi,
    encode_binary_with_stats,
    encode_gray_with_stats,
    measure_ratio,
    pack_frames,
)
from .config import BenchConfig, TrainingConfig, get_log_level
from .corpus import (
    binarize,
    binarize_corpus,
    load_corpus,
    load_idx_labels,
    load_pnm,
    sample_corpus,
    save_pnm,
    split_by_class,
)
from .errors import FormatError, IngestIOError, SoftCodecError, UsageError
from .info_theory import (
    IntensityDistribution,
    analyze_image,
    cif_curve_rows,
    civ_histogram_rows,
    delta_histogram_rows,
    first_order_soft_bits,
    huffman_min_bits,
    shape_order_soft_bits,
    write_csv,
)
from .shapes import Codebook, serialize_codebook
from .training import train_codebook
from .transform import predict, reverse_binary
from .types import BenchMode, Corpus, Image, MultiComponentImage, ResidualPlane, WeightMode
from .worker import WorkerPool

LOG = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FORMAT = 3


def _interface(value: str) -> int | None:
    if value == "auto":
        return None
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or an integer, got {value!r}") from None


def _add_training_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("training")
    group.add_argument("--interface", type=_interface, default=None,
                       help="Layer interface l, or 'auto' to search (default: auto)")
    group.add_argument("--nmax", type=int, default=4, help="Largest shape side (default: 4)")
    group.add_argument("--prune", type=int, default=2,
                       help="Drop shapes seen fewer times than this while mining (default: 2)")
    group.add_argument("--capacity", type=int, default=4096,
                       help="Shape table size that triggers pruning (default: 4096)")
    group.add_argument("--weight", choices=[m.value for m in WeightMode],
                       default=WeightMode.COUNT_SIZE.value, help="Huffman weight of a shape")
    group.add_argument("--epoch", type=int, default=1, help="Images per pruning epoch")
    group.add_argument("--search-sample", type=int, default=64,
                       help="Images used to score each interface")


def _training_config(args: argparse.Namespace, binary: bool = False) -> TrainingConfig:
    return TrainingConfig(
        interface=0 if binary else args.interface,
        max_shape_dim=args.nmax,
        prune_below=args.prune,
        keep_top=args.capacity,
        weight_mode=WeightMode(args.weight),
        epoch_size=args.epoch,
        search_sample=args.search_sample,
        binary=binary,
    )


def _load_codebooks(refs: Sequence[str], store: CodebookStore) -> list[Codebook]:
    if not refs:
        raise UsageError("At least one --codebook is required")
    return [store.resolve(ref) for ref in refs]


def _codebooks_for(count: int, codebooks: list[Codebook]) -> list[Codebook]:
    if len(codebooks) == 1:
        return codebooks * count
    if len(codebooks) != count:
        raise UsageError(f"{count} components need 1 or {count} codebooks, got {len(codebooks)}")
    return codebooks


def cmd_train(args: argparse.Namespace) -> int:
    corpus = load_corpus(args.corpus)
    if args.labels is not None:
        classes = split_by_class(corpus, load_idx_labels(args.labels))
        if args.class_label not in classes:
            raise UsageError(f"Class {args.class_label} is not in the label file")
        corpus = classes[args.class_label]
    if args.limit:
        corpus = sample_corpus(corpus, args.limit, args.seed)
    if args.binary:
        corpus = binarize_corpus(corpus, args.threshold)
    if args.depth is not None and corpus.depth_levels != args.depth:
        raise UsageError(f"Corpus has D={corpus.depth_levels}, expected {args.depth}")

    report = train_codebook(corpus, _training_config(args, args.binary))
    data = serialize_codebook(report.codebook)
    if args.output:
        Path(args.output).write_bytes(data)
        LOG.info("Wrote codebook %s", args.output)
    if args.save:
        CodebookStore().save(args.save, report.codebook)
    print(f"images:          {report.images}")
    print(f"shapes:          {report.shape_count}")
    print(f"detail alphabet: {report.detail_alphabet}")
    print(f"interface:       {report.interface}")
    print(f"golomb m:        {report.codebook.golomb_m}")
    print(f"codebook bytes:  {len(data)}")
    print(f"seconds:         {report.seconds:.2f}")
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    image = load_pnm(args.image)
    codebooks = _codebooks_for(len(image), _load_codebooks(args.codebook, CodebookStore()))
    components = tuple(binarize(c, args.threshold) for c in image) if args.binary else image.components
    frames = []
    for comp, cb in zip(components, codebooks):
        if args.binary and not cb.binary:
            raise UsageError("--binary needs a binary codebook")
        encode = encode_binary_with_stats if cb.binary else encode_gray_with_stats
        frame, stats = encode(comp, cb)
        frames.append(frame)
        LOG.debug("Component: %d triplets, %d location bits, %d shape bits, %d detail bits",
                  stats.triplets, stats.location_bits, stats.shape_bits, stats.detail_bits)
    data = frames[0].to_bytes() if len(frames) == 1 else pack_frames(frames)
    output = Path(args.output or Path(args.image).with_suffix(".scmp"))
    output.write_bytes(data)
    ratio = measure_ratio(MultiComponentImage(components), data)
    print(f"{output}: {len(data)} bytes, ratio {ratio:.4f}")
    return EXIT_OK


def cmd_decode(args: argparse.Namespace) -> int:
    try:
        data = Path(args.frame).read_bytes()
    except OSError as e:
        raise IngestIOError(f"Cannot read {args.frame}: {e}") from e
    codebooks = _load_codebooks(args.codebook, CodebookStore())
    if data[:4] == CONTAINER_MAGIC:
        image = decode_multi(data, codebooks[0] if len(codebooks) == 1 else codebooks)
    else:
        image = MultiComponentImage((decode_image(CompressedFrame.from_bytes(data), codebooks[0]),))
    output = Path(args.output or Path(args.frame).with_suffix(".pgm" if len(image) == 1 else ".ppm"))
    save_pnm(image, output)
    print(f"{output}: {image.width}x{image.height}, {len(image)} component(s), D={image.depth_levels}")
    return EXIT_OK


def _load_analysis_corpus(args: argparse.Namespace) -> dict[str, Corpus]:
    if args.limit and args.labels is not None:
        raise UsageError("--limit cannot be combined with --labels")
    corpus = load_corpus(args.input)
    if args.limit:
        corpus = sample_corpus(corpus, args.limit, args.seed)
    if args.binary:
        corpus = binarize_corpus(corpus, args.threshold)
    if args.labels is not None:
        return {str(k): v for k, v in split_by_class(corpus, load_idx_labels(args.labels)).items()}
    return {corpus.class_label or "all": corpus}


def cmd_analyze(args: argparse.Namespace) -> int:
    classes = _load_analysis_corpus(args)
    cb = CodebookStore().resolve(args.codebook) if args.codebook else None
    rows = []
    civs: dict[str, list[float]] = {}
    deltas: list[int] = []
    for label, corpus in classes.items():
        for index, img in enumerate(corpus):
            if args.binary:
                plane, _ = reverse_binary(img)
                target: Image | ResidualPlane = Image(img.height, img.width, 2, plane)
            else:
                target = predict(img)
            location_cost = None
            placements: dict[int, int] = {}
            if cb is not None:
                encode = encode_binary_with_stats if cb.binary else encode_gray_with_stats
                _, stats = encode(img, cb)
                location_cost = stats.location_cost
                placements = stats.placements_by_size
                deltas.extend(stats.deltas)
            report = analyze_image(target, location_cost)
            estimates = ["", ""]
            if location_cost is not None:
                first = first_order_soft_bits(
                    IntensityDistribution.from_image(target), img.pixel_count, location_cost
                )
                shaped = shape_order_soft_bits(placements, report.entropy_y or 0.0, location_cost)
                estimates = [f"{first:.1f}", f"{shaped:.1f}"]
            huffman_bits = huffman_min_bits(IntensityDistribution.from_image(img), img.pixel_count)
            civs.setdefault(label, []).append(report.civ)
            rows.append((
                label, index, f"{report.p0:.6f}", f"{report.entropy_x:.6f}",
                f"{report.entropy_p:.6f}", f"{report.civ:.6f}",
                "" if report.entropy_y is None else f"{report.entropy_y:.6f}",
                "" if location_cost is None else f"{location_cost:.6f}",
                "" if report.predicted_relative_ratio is None
                else f"{report.predicted_relative_ratio:.6f}",
                f"{huffman_bits:.1f}",
                *estimates,
            ))

    header = ["class", "index", "p0", "entropy_x", "entropy_p", "civ", "entropy_y",
              "location_cost", "predicted_relative_ratio", "huffman_bits", "first_order_bits",
              "shape_order_bits"]
    if args.csv:
        write_csv(args.csv, header, rows)
    elif len(rows) == 1:
        print(",".join(header))
        print(",".join(str(v) for v in rows[0]))
    for label, values in civs.items():
        print(f"class {label}: {len(values)} images, mean CIV {float(np.mean(values)):.4f}")
    if args.cif_curve:
        write_csv(args.cif_curve, ["p", "civ"], cif_curve_rows())
    if args.civ_histogram:
        write_csv(args.civ_histogram, ["class", "civ_bin", "count"], civ_histogram_rows(civs))
    if args.deltas:
        if cb is None:
            raise UsageError("--deltas needs --codebook")
        write_csv(args.deltas, ["delta", "count"], delta_histogram_rows(deltas))
    return EXIT_OK


def _bench_classes(path: str, labels_path: str | None, limit: int, seed: int) -> dict[str, Corpus]:
    corpus = load_corpus(path)
    if labels_path is None:
        classes = {corpus.class_label or "all": corpus}
    else:
        classes = {
            str(k): v for k, v in split_by_class(corpus, load_idx_labels(labels_path)).items()
        }
    return {label: sample_corpus(c, limit, seed) for label, c in classes.items()}


def cmd_bench(args: argparse.Namespace) -> int:
    config = BenchConfig(
        train_per_class=args.train_per_class,
        test_per_class=args.test_per_class,
        seed=args.seed,
        mode=BenchMode.SHARED if args.shared else BenchMode.PER_CLASS,
        binary=args.binary,
        threshold=args.threshold,
        per_class_huffman=args.huffman_per_class,
        training=_training_config(args),
    )
    train = _bench_classes(args.train, args.train_labels, config.train_per_class, config.seed)
    test = _bench_classes(args.test, args.test_labels, config.test_per_class, config.seed)
    pool = WorkerPool()
    summary = run(train, test, config, pool)
    print(format_table(summary))
    if args.csv:
        write_summary_csv(summary, args.csv)
    if args.single_pixel:
        totals = run_single_pixel_comparison(train, test, config, pool, codebooks=summary.codebooks)
        print()
        print(format_table(totals, value="bits"))
    return EXIT_OK


def cmd_codebooks(args: argparse.Namespace) -> int:
    store = CodebookStore()
    if args.action == "remove":
        if not args.name:
            raise UsageError("codebooks remove needs a name")
        if not store.remove(args.name):
            raise UsageError(f"No stored codebook named {args.name!r}")
        print(f"removed {args.name}")
        return EXIT_OK
    for name, path in store.list():
        print(f"{name}\t{path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="softcodec", description="Soft compression image codec")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Verbose output")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="Train a codebook on a corpus")
    p.add_argument("corpus", help="IDX file, PGM/PPM file or directory of PGMs")
    p.add_argument("--labels", help="IDX label file to pick one class from")
    p.add_argument("--class", dest="class_label", type=int, default=0, help="Class to train on")
    p.add_argument("--depth", type=int, help="Expected intensity levels D")
    p.add_argument("--limit", type=int, default=0, help="Sample at most this many images")
    p.add_argument("--seed", type=int, default=BenchConfig.seed)
    p.add_argument("--binary", action="store_true", help="Binarize and train a binary codebook")
    p.add_argument("--threshold", type=int, default=BenchConfig.threshold)
    p.add_argument("-o", "--output", help="Codebook file to write")
    p.add_argument("--save", metavar="NAME", help="Also store the codebook under NAME")
    _add_training_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("encode", help="Encode a PGM/PPM image")
    p.add_argument("image")
    p.add_argument("--codebook", action="append", default=[],
                   help="Codebook file or stored name; repeat once per component")
    p.add_argument("--binary", action="store_true", help="Binarize before encoding")
    p.add_argument("--threshold", type=int, default=BenchConfig.threshold)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="Decode a frame back to PGM/PPM")
    p.add_argument("frame")
    p.add_argument("--codebook", action="append", default=[])
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("analyze", help="Report compressibility figures")
    p.add_argument("input", help="Image or corpus")
    p.add_argument("--labels", help="IDX label file for per-class means")
    p.add_argument("--codebook", help="Trial-encode with this codebook to measure L_W")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--threshold", type=int, default=BenchConfig.threshold)
    p.add_argument("--limit", type=int, default=0)
    p.add_argument("--seed", type=int, default=BenchConfig.seed)
    p.add_argument("--csv", help="Per-image report rows")
    p.add_argument("--cif-curve", help="C(p) samples")
    p.add_argument("--civ-histogram", help="Per-class CIV histogram")
    p.add_argument("--deltas", help="Location difference histogram")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("bench", help="Train, encode and tabulate compression ratios")
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--train-labels")
    p.add_argument("--test-labels")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--per-class", action="store_true", help="One codebook per class (default)")
    mode.add_argument("--shared", action="store_true", help="One codebook for all classes")
    p.add_argument("--binary", action="store_true")
    p.add_argument("--threshold", type=int, default=BenchConfig.threshold)
    p.add_argument("--train-per-class", type=int, default=BenchConfig.train_per_class)
    p.add_argument("--test-per-class", type=int, default=BenchConfig.test_per_class)
    p.add_argument("--seed", type=int, default=BenchConfig.seed)
    p.add_argument("--huffman-per-class", action="store_true")
    p.add_argument("--single-pixel", action="store_true",
                   help="Also compare the full codebook with single-pixel shapes")
    p.add_argument("--csv")
    _add_training_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("codebooks", help="Manage stored codebooks")
    p.add_argument("action", choices=["list", "remove"], nargs="?", default="list")
    p.add_argument("name", nargs="?")
    p.set_defaults(func=cmd_codebooks)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Main entry point."""
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=get_log_level(args.verbose),
        format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except UsageError as e:
        LOG.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, IngestIOError) as e:
        LOG.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT
    except SoftCodecError as e:
        LOG.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        LOG.error("%s", e)
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())

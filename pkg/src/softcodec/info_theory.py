"""Information-theoretic analysis of compressibility.

All logarithms are base 2 and 0 * log 0 is taken as 0. For an intensity
distribution with p = P(X = r0):

    H(Y) = (H(X) - H(p)) / (1 - p)          entropy of the non-zero intensities
    C(p) = H(p) / (1 - p)                   compressible indicator function
    R'   = 1 + (1 - p)(C(p) - L_W) / H(X)   soft coding vs Huffman coding

where L_W is the average number of bits spent on one shape location.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from scipy import stats

from .errors import DomainError
from .types import Image, ResidualPlane

LOG = logging.getLogger(__name__)

_SUM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class IntensityDistribution:
    """Empirical intensity probabilities n_k / (M N)."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        if not probs:
            raise DomainError("A distribution needs at least one symbol")
        if any(p < 0 for p in probs):
            raise DomainError("Probabilities must be non-negative")
        if abs(math.fsum(probs) - 1.0) > _SUM_TOLERANCE:
            raise DomainError(f"Probabilities sum to {math.fsum(probs)}, not 1")
        object.__setattr__(self, "probs", probs)

    @property
    def p0(self) -> float:
        """Return the probability of intensity r0."""
        return self.probs[0]

    @classmethod
    def from_counts(cls, counts: Sequence[int] | np.ndarray) -> IntensityDistribution:
        """Normalize raw symbol counts."""
        arr = np.asarray(counts, dtype=np.float64)
        total = arr.sum()
        if total <= 0:
            raise DomainError("Cannot normalize an all-zero count vector")
        return cls(tuple((arr / total).tolist()))

    @classmethod
    def from_image(cls, img: Image | ResidualPlane) -> IntensityDistribution:
        """Count intensities of an image (D symbols) or residual plane (2D - 1 symbols)."""
        if isinstance(img, Image):
            values, levels = img.pixels, img.depth_levels
        else:
            values, levels = img.values, img.max_value + 1
        return cls.from_counts(np.bincount(values.ravel(), minlength=levels))


@dataclass(frozen=True)
class CompressibilityReport:
    """Compressibility figures of one image.

    `degenerate` is set when p0 = 1: the CIF diverges there, but a
    constant plane needs no shape coding, so civ is reported as 0.
    """

    p0: float
    entropy_x: float
    entropy_p: float
    civ: float
    entropy_y: float | None = None
    location_cost_estimate: float | None = None
    predicted_relative_ratio: float | None = None
    degenerate: bool = False


def _plogp_sum(probs: Iterable[float]) -> float:
    return -math.fsum(p * math.log2(p) for p in probs if p > 0)


def entropy(dist: IntensityDistribution) -> float:
    """Return H(X) in bits."""
    return max(0.0, _plogp_sum(dist.probs))


def binary_entropy(p: float) -> float:
    """Return H(p) = -p log p - (1 - p) log (1 - p).

    Raises:
        DomainError: If p is outside [0, 1].
    """
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"binary entropy needs p in [0, 1], got {p}")
    return max(0.0, _plogp_sum((p, 1.0 - p)))


def conditional_residual_entropy(dist: IntensityDistribution) -> float:
    """Return H(Y) = (H(X) - H(p)) / (1 - p).

    Raises:
        DomainError: If p0 = 1, where Y is undefined.
    """
    p = dist.p0
    if p >= 1.0:
        raise DomainError("H(Y) is undefined when every pixel equals r0")
    return max(0.0, (entropy(dist) - binary_entropy(p)) / (1.0 - p))


def renormalized_tail(dist: IntensityDistribution) -> IntensityDistribution:
    """Return the distribution of X given X != r0."""
    p = dist.p0
    if p >= 1.0:
        raise DomainError("The tail is empty when every pixel equals r0")
    tail = [q / (1.0 - p) for q in dist.probs[1:]]
    total = math.fsum(tail)
    return IntensityDistribution(tuple(q / total for q in tail))


def civ(p: float) -> float:
    """Return the compressible indicator value C(p) = H(p) / (1 - p).

    Raises:
        DomainError: If p is outside [0, 1).
    """
    if not 0.0 <= p < 1.0:
        raise DomainError(f"C(p) needs p in [0, 1), got {p}")
    return binary_entropy(p) / (1.0 - p)


def predicted_relative_ratio(dist: IntensityDistribution, location_cost: float) -> float:
    """Return R' = 1 + (1 - p)(C(p) - L_W) / H(X).

    Raises:
        DomainError: If H(X) = 0 or p0 = 1.
    """
    hx = entropy(dist)
    if hx <= 0.0:
        raise DomainError("R' needs H(X) > 0")
    p = dist.p0
    return 1.0 + (1.0 - p) * (civ(p) - location_cost) / hx


def huffman_min_bits(dist: IntensityDistribution, pixels: int) -> float:
    """Return the Huffman lower bound M N H(X)."""
    return pixels * entropy(dist)


def first_order_soft_bits(dist: IntensityDistribution, pixels: int, location_cost: float) -> float:
    """Return M N (1 - p)(H(Y) + L_W), single-pixel shapes only."""
    if dist.p0 >= 1.0:
        return 0.0
    return pixels * (1.0 - dist.p0) * (conditional_residual_entropy(dist) + location_cost)


def shape_order_soft_bits(
    shape_counts: Mapping[int, int], entropy_y: float, location_cost: float
) -> float:
    """Return sum_k N_k (k H(Y) + L_W), with H(Y_k) replaced by its bound k H(Y)."""
    return math.fsum(n * (k * entropy_y + location_cost) for k, n in shape_counts.items())


def plugin_entropy(counts: Iterable[int]) -> float:
    """Return the plug-in entropy of a count vector."""
    arr = np.asarray(list(counts), dtype=np.float64)
    total = arr.sum()
    if total <= 0:
        return 0.0
    probs = arr[arr > 0] / total
    return max(0.0, float(-(probs * np.log2(probs)).sum()))


def shape_entropy_by_size(counts_by_size: Mapping[int, Mapping[Any, int]]) -> dict[int, float]:
    """Return the plug-in entropy of the patterns of each shape size."""
    return {size: plugin_entropy(table.values()) for size, table in sorted(counts_by_size.items())}


def mean_location_cost(location_bits: int, locations: int) -> float:
    """Return L_W, the mean bits per coded location (0 when nothing was placed)."""
    return location_bits / locations if locations else 0.0


def analyze_image(img: Image | ResidualPlane, location_cost: float | None = None) -> CompressibilityReport:
    """Compute the compressibility report of an image or residual plane."""
    dist = IntensityDistribution.from_image(img)
    p = dist.p0
    hx = entropy(dist)
    hp = binary_entropy(p)
    if p >= 1.0:
        return CompressibilityReport(
            p0=p, entropy_x=hx, entropy_p=hp, civ=0.0,
            location_cost_estimate=location_cost, degenerate=True,
        )
    ratio = None
    if location_cost is not None and hx > 0.0:
        ratio = predicted_relative_ratio(dist, location_cost)
    return CompressibilityReport(
        p0=p,
        entropy_x=hx,
        entropy_p=hp,
        civ=civ(p),
        entropy_y=conditional_residual_entropy(dist),
        location_cost_estimate=location_cost,
        predicted_relative_ratio=ratio,
    )


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Return the Spearman rank correlation using average ranks for ties.

    A constant sample has no ranking and gives 0.
    """
    if len(x) != len(y) or len(x) < 2:
        raise DomainError("Spearman correlation needs two equal-length samples of size >= 2")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        return 0.0
    return float(stats.spearmanr(x, y).statistic)


def cif_curve_rows(step: float = 0.001, upper: float = 0.999) -> list[tuple[float, float]]:
    """Sample (p, C(p)) on [0, upper]."""
    count = int(round(upper / step)) + 1
    rows = []
    for i in range(count):
        p = round(i * step, 12)
        rows.append((p, civ(p)))
    return rows


def civ_histogram_rows(
    civs_by_class: Mapping[str, Sequence[float]], bin_width: float = 0.25
) -> list[tuple[str, float, int]]:
    """Bucket per-image CIVs into (class, bin lower edge, count) rows."""
    rows: list[tuple[str, float, int]] = []
    for label, values in civs_by_class.items():
        bins: dict[int, int] = {}
        for value in values:
            index = int(math.floor(value / bin_width))
            bins[index] = bins.get(index, 0) + 1
        rows.extend((label, round(i * bin_width, 6), n) for i, n in sorted(bins.items()))
    return rows


def delta_histogram_rows(deltas: Iterable[int]) -> list[tuple[int, int]]:
    """Count location differences into (delta, count) rows."""
    values = np.asarray(list(deltas), dtype=np.int64)
    if values.size == 0:
        return []
    counts = np.bincount(values)
    return [(int(d), int(n)) for d, n in enumerate(counts) if n]


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Write rows to a CSV file with a header line."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        writer.writerows(rows)
    LOG.info("Wrote %s", path)

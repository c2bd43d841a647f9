"""Distance and correlation primitives.

The curve-similarity machinery is built from two distances:

* unit-cost Levenshtein edit distance between header strings, and
* discrete Frechet distance between point sequences (the minimum, over
  order-preserving couplings of the two sequences, of the largest paired
  Euclidean distance).

Each is normalized into [0, 1] before being combined into the curve
similarity score.  Correlation helpers (Pearson, Spearman, permutation
p-values) support comparing automated scores against human judgments.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist
from scipy.stats import rankdata

from .config import DEFAULT_CONFIG, EvalConfig
from .errors import ContractViolation, DataError
from .model import Curve, normalize_label

Point = tuple[float, float]


def levenshtein(a: str, b: str) -> int:
    """Unit-cost edit distance (insert, delete, substitute), two-row DP."""
    if a == b:
        return len(a) - len(b) if len(a) != len(b) else 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(
                min(
                    previous[j] + 1,
                    current[j - 1] + 1,
                    previous[j - 1] + (ca != cb),
                )
            )
        previous = current
    return previous[-1]


def normalized_levenshtein(a: str, b: str) -> float:
    """Edit distance scaled by the longer string, clamped to [0, 1].

    Two empty strings are identical, so the distance is 0.
    """
    longest = max(len(a), len(b))
    if longest == 0:
        return 0.0
    return min(1.0, levenshtein(a, b) / longest)


def discrete_frechet(p: Sequence[Point], q: Sequence[Point]) -> float:
    """Discrete Frechet distance between two non-empty point sequences."""
    if not p or not q:
        raise ContractViolation("discrete Frechet distance needs non-empty sequences")
    dist = cdist(np.asarray(p, dtype=float), np.asarray(q, dtype=float))
    n, m = dist.shape
    ca = np.empty((n, m))
    ca[0, 0] = dist[0, 0]
    for j in range(1, m):
        ca[0, j] = max(ca[0, j - 1], dist[0, j])
    for i in range(1, n):
        ca[i, 0] = max(ca[i - 1, 0], dist[i, 0])
        for j in range(1, m):
            ca[i, j] = max(
                min(ca[i - 1, j], ca[i - 1, j - 1], ca[i, j - 1]), dist[i, j]
            )
    return float(ca[n - 1, m - 1])


def curve_norm(points: Sequence[Point], mode: str = "frobenius") -> float:
    """Magnitude of a point sequence, used to scale the Frechet distance.

    ``frobenius`` is the root of the summed squared coordinates;
    ``bbox`` is the diagonal length of the axis-aligned bounding box.
    """
    if not points:
        raise ContractViolation("curve norm needs a non-empty point sequence")
    arr = np.asarray(points, dtype=float)
    if mode == "frobenius":
        return float(np.linalg.norm(arr))
    if mode == "bbox":
        spans = arr.max(axis=0) - arr.min(axis=0)
        return float(np.hypot(spans[0], spans[1]))
    raise DataError(f"unknown curve norm mode {mode!r}")


def normalized_frechet(
    predicted: Sequence[Point],
    truth: Sequence[Point],
    norm_mode: str = "frobenius",
) -> float:
    """Frechet distance scaled by the truth curve's magnitude, clamped to [0, 1].

    Conventions for degenerate inputs keep self-comparison at distance 0:
    two empty sequences are identical (0), one empty sequence is maximally
    far (1), and a zero-magnitude truth curve yields 0 only on an exact
    match.
    """
    if not predicted and not truth:
        return 0.0
    if not predicted or not truth:
        return 1.0
    distance = discrete_frechet(predicted, truth)
    scale = curve_norm(truth, norm_mode)
    if scale == 0.0:
        return 0.0 if distance == 0.0 else 1.0
    return min(1.0, distance / scale)


def join_headers(labels: Sequence[str]) -> str:
    """Join normalized axis labels into one comparison string.

    Absent labels are skipped entirely, so a curve with only one real
    label compares on that label alone rather than on a dangling
    separator.
    """
    return "|".join(label for label in labels if label)


def header_distance(
    pred_labels: Sequence[str], truth_labels: Sequence[str], join_mode: str = "concat"
) -> float:
    """Normalized edit distance between two curves' header labels.

    ``concat`` compares the joined label strings; ``mean`` averages the
    per-axis normalized distances instead, which keeps a wildly wrong
    y label from drowning out a perfect x label.
    """
    if join_mode == "concat":
        return normalized_levenshtein(join_headers(pred_labels), join_headers(truth_labels))
    if join_mode == "mean":
        pairs = list(zip(pred_labels, truth_labels))
        if not pairs:
            return 0.0
        return sum(normalized_levenshtein(a, b) for a, b in pairs) / len(pairs)
    raise DataError(f"unknown header join mode {join_mode!r}")


@dataclass(frozen=True)
class ScoreBreakdown:
    """Header and shape agreement of one curve pair, and their product."""

    header_factor: float
    curve_factor: float
    css: float


def curve_similarity(
    pred: Curve, truth: Curve, config: EvalConfig = DEFAULT_CONFIG
) -> ScoreBreakdown:
    """Similarity of a predicted curve to a ground-truth curve, in [0, 1].

    The score is the product of a header factor (one minus the normalized
    edit distance between axis labels) and a curve factor (one minus the
    normalized Frechet distance between point sequences), so full credit
    requires getting both the labels and the shape right.
    """
    pred_labels = (normalize_label(pred.x_header), normalize_label(pred.y_header))
    truth_labels = (normalize_label(truth.x_header), normalize_label(truth.y_header))
    header_factor = 1.0 - header_distance(pred_labels, truth_labels, config.header_join)
    curve_factor = 1.0 - normalized_frechet(pred.points, truth.points, config.curve_norm)
    header_factor = min(1.0, max(0.0, header_factor))
    curve_factor = min(1.0, max(0.0, curve_factor))
    return ScoreBreakdown(header_factor, curve_factor, header_factor * curve_factor)


# ---------------------------------------------------------------------------
# Correlation
# ---------------------------------------------------------------------------

def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation; raises on length mismatch or zero variance."""
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise DataError("correlation needs at least two observations")
    ax = np.asarray(x, dtype=float)
    ay = np.asarray(y, dtype=float)
    dx = ax - ax.mean()
    dy = ay - ay.mean()
    denom = math.sqrt(float(dx @ dx)) * math.sqrt(float(dy @ dy))
    if denom == 0.0:
        raise DataError("correlation undefined for a constant sequence")
    return float(dx @ dy) / denom


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Spearman rank correlation (average ranks for ties)."""
    if len(x) != len(y):
        raise DataError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise DataError("correlation needs at least two observations")
    return pearson(rankdata(x), rankdata(y))


def permutation_pvalue(
    x: Sequence[float],
    y: Sequence[float],
    statistic,
    *,
    permutations: int = 10_000,
    seed: int = 0,
) -> float:
    """Two-sided permutation p-value for a correlation statistic.

    Shuffles ``y`` with a seeded generator and counts permutations whose
    absolute statistic reaches the observed one; the +1 correction keeps
    the estimate away from an impossible zero.
    """
    if permutations < 1:
        raise DataError("permutation count must be positive")
    observed = abs(statistic(x, y))
    rng = random.Random(seed)
    shuffled = list(y)
    hits = 0
    for _ in range(permutations):
        rng.shuffle(shuffled)
        try:
            value = abs(statistic(x, shuffled))
        except DataError:
            value = 0.0
        if value >= observed - 1e-12:
            hits += 1
    return (hits + 1) / (permutations + 1)

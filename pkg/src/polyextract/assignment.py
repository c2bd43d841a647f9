"""Maximum-total assignment with a deterministic tie-break.

Wraps the Hungarian solver from scipy.  When several matchings reach the
optimal total, the solver's pick depends on internal iteration order, so
a greedy refinement pass re-derives the lexicographically smallest
optimal matching: pairs sorted by row index, compared as the flattened
sequence (r0, c0, r1, c1, ...).  Determinism here is what makes scores
and baselines reproducible across runs and platforms.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ContractViolation, DataError


@dataclass(frozen=True)
class Assignment:
    """Matched (row, column) index pairs and their summed score."""

    pairs: tuple[tuple[int, int], ...]
    total: float


def _lsap_total(matrix: np.ndarray) -> float:
    if matrix.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(matrix, maximize=True)
    return float(matrix[rows, cols].sum())


def optimal_assignment(scores) -> Assignment:
    """Best-total matching of rows to columns of a similarity matrix.

    Exactly min(n, m) pairs are produced, so the smaller side is matched
    completely.  Among matchings tied for the maximum total (within a
    relative tolerance of 1e-9), the lexicographically smallest one is
    returned.
    """
    matrix = np.asarray(scores, dtype=float)
    if matrix.ndim == 1 and matrix.size == 0:
        matrix = matrix.reshape(0, 0)
    if matrix.ndim != 2:
        raise DataError("score matrix must be two-dimensional")
    if matrix.size and not np.isfinite(matrix).all():
        raise ContractViolation("score matrix contains non-finite values")
    n, m = matrix.shape
    size = min(n, m)
    if size == 0:
        return Assignment((), 0.0)

    best = _lsap_total(matrix)
    tol = 1e-9 * max(1.0, abs(best))
    pairs: list[tuple[int, int]] = []
    free_rows = list(range(n))
    free_cols = list(range(m))
    fixed_sum = 0.0
    while len(pairs) < size:
        needed = size - len(pairs) - 1
        chosen = None
        for ri, row in enumerate(free_rows):
            # Later pairs use strictly larger rows, so skipping past this
            # row must still leave enough rows to finish the matching.
            if len(free_rows) - ri - 1 < needed:
                break
            rest_rows = free_rows[ri + 1 :]
            for ci, col in enumerate(free_cols):
                rest_cols = free_cols[:ci] + free_cols[ci + 1 :]
                sub_total = _lsap_total(matrix[np.ix_(rest_rows, rest_cols)])
                if fixed_sum + matrix[row, col] + sub_total >= best - tol:
                    chosen = (ri, ci)
                    break
            if chosen is not None:
                break
        if chosen is None:  # unreachable if lsap returned a true optimum
            raise DataError("assignment refinement failed to reach the optimal total")
        ri, ci = chosen
        row, col = free_rows[ri], free_cols[ci]
        fixed_sum += matrix[row, col]
        pairs.append((row, col))
        free_rows = free_rows[ri + 1 :]
        free_cols.pop(ci)
    return Assignment(tuple(pairs), float(fixed_sum))

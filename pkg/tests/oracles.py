"""Independent oracle implementations used to cross-check the package.

Everything here is written from the mathematical definitions using the
dumbest workable algorithms (full tables, exhaustive enumeration) and
imports nothing from the package under test, so agreement between the
two is meaningful evidence rather than a tautology.
"""

import itertools
import math


def levenshtein_table(a: str, b: str) -> int:
    """Unit-cost edit distance via the full (n+1) x (m+1) table."""
    n, m = len(a), len(b)
    table = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        table[i][0] = i
    for j in range(m + 1):
        table[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            table[i][j] = min(
                table[i - 1][j] + 1,
                table[i][j - 1] + 1,
                table[i - 1][j - 1] + (a[i - 1] != b[j - 1]),
            )
    return table[n][m]


def frechet_enumerate(p, q) -> float:
    """Discrete Frechet distance by exhaustive coupling search.

    Walks every order-preserving coupling of the two sequences carrying
    the running maximum pairwise distance, keeping the smallest final
    value.  Branches whose running maximum already reaches the best
    known value are cut, which is exact because extending a coupling can
    never lower its maximum.  Exponential, fine for short curves.
    """
    dist = [
        [math.hypot(pi[0] - qj[0], pi[1] - qj[1]) for qj in q] for pi in p
    ]
    n, m = len(p), len(q)
    best = math.inf
    # Diagonal moves are pushed last so they are explored first and give
    # a decent bound early.
    stack = [(0, 0, dist[0][0])]
    while stack:
        i, j, running = stack.pop()
        if running >= best:
            continue
        if i == n - 1 and j == m - 1:
            best = running
            continue
        for di, dj in ((1, 0), (0, 1), (1, 1)):
            ni, nj = i + di, j + dj
            if ni < n and nj < m:
                stack.append((ni, nj, max(running, dist[ni][nj])))
    return best


def assignment_enumerate(matrix):
    """Best matching by enumerating every maximal injective pairing.

    Returns (pairs, total) where pairs is the lexicographically smallest
    optimal matching, ties on total resolved within a relative 1e-9
    tolerance, matching the documented deterministic tie-break.
    """
    n = len(matrix)
    m = len(matrix[0]) if n else 0
    size = min(n, m)
    if size == 0:
        return (), 0.0
    candidates = []
    for rows in itertools.combinations(range(n), size):
        for cols in itertools.permutations(range(m), size):
            pairs = tuple(zip(rows, cols))
            total = sum(matrix[i][j] for i, j in pairs)
            candidates.append((total, pairs))
    best_total = max(total for total, _ in candidates)
    tolerance = 1e-9 * max(1.0, abs(best_total))
    tied = [pairs for total, pairs in candidates if total >= best_total - tolerance]
    best_pairs = min(tied, key=lambda ps: tuple(x for pair in ps for x in pair))
    return best_pairs, best_total


def pearson_defn(x, y) -> float:
    """Product-moment correlation straight from the formula."""
    n = len(x)
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    num = sum((a - mean_x) * (b - mean_y) for a, b in zip(x, y))
    den = math.sqrt(sum((a - mean_x) ** 2 for a in x)) * math.sqrt(
        sum((b - mean_y) ** 2 for b in y)
    )
    return num / den


def average_ranks(values):
    """1-based ranks with tied values sharing their average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def spearman_defn(x, y) -> float:
    return pearson_defn(average_ranks(x), average_ranks(y))

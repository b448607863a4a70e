"""Slow, loop-based reference implementations used only as test oracles."""

import math


def _dist(a, b):
    total = 0.0
    for u, v in zip(a, b):
        total += (u - v) * (u - v)
    return math.sqrt(total)


def brute_distances(vectors):
    n = len(vectors)
    return [[_dist(vectors[i], vectors[j]) for j in range(n)] for i in range(n)]


def brute_rho(d, d_c):
    n = len(d)
    return [sum(1 for j in range(n) if j != i and d[i][j] - d_c < 0) for i in range(n)]


def brute_delta(d, rho):
    """Nearest point of higher rank, rank = (rho desc, index asc)."""
    n = len(d)

    def ranks_above(i, j):
        return rho[j] > rho[i] or (rho[j] == rho[i] and j < i)

    delta, parent = [], []
    for i in range(n):
        higher = [j for j in range(n) if ranks_above(i, j)]
        if not higher:
            delta.append(max(d[i]))
            parent.append(-1)
            continue
        best = None
        for j in higher:  # ascending index, strict < keeps the smallest index on ties
            if best is None or d[i][j] < d[i][best]:
                best = j
        delta.append(d[i][best])
        parent.append(best)
    return delta, parent


def brute_select(rho, delta, alpha):
    thr = alpha * max(rho) * max(delta)
    gamma = [r * dl for r, dl in zip(rho, delta)]
    if thr == 0:
        return set(range(len(rho))), thr
    return {i for i, g in enumerate(gamma) if g >= thr}, thr


def brute_required_iterations(p, w, s):
    """Smallest k with 1 - (1 - w**s)**k >= p, by direct search."""
    if w >= 1:
        return 1
    k = 1
    good = w**s
    while 1 - (1 - good) ** k < p:
        k += 1
    return k

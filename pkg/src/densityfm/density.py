"""Density-peaks analysis of correspondences embedded as 4D vectors.

Each correspondence ``(x, y) <-> (x', y')`` becomes the point ``(x, y, x', y')``.
Every point gets a local density ``rho`` (neighbours closer than a cutoff
``d_c``), a separation ``delta`` (distance to the nearest denser point) and a
decision value ``gamma = rho * delta``. Points whose ``gamma`` falls below
``alpha * max(rho) * max(delta)`` are rejected as outliers.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import InputError, TooFewPoints
from .geometry import MatchPair, as_pairs

# Parent index of the single highest-density point.
NO_PARENT = -1


@dataclass(frozen=True, eq=False)
class DensityPeaksResult:
    rho: np.ndarray
    delta: np.ndarray
    nearest_higher: np.ndarray
    gamma: np.ndarray
    d_c: float

    @property
    def top(self):
        return int(np.flatnonzero(self.nearest_higher == NO_PARENT)[0])


@dataclass(frozen=True, eq=False)
class ClusterSelection:
    alpha: float
    inlier_indices: np.ndarray
    threshold_value: float
    labels: np.ndarray

    @property
    def mask(self):
        out = np.zeros(len(self.labels), dtype=bool)
        out[self.inlier_indices] = True
        return out


def build_match_vectors(pairs):
    """Stack correspondences as 4D vectors ``(x, y, x', y')``, one row each."""
    return np.array(as_pairs(pairs), dtype=float).reshape(-1, 4)


def vectors_to_pairs(vectors):
    return [MatchPair(*map(float, v)) for v in np.asarray(vectors, dtype=float)]


def _condensed(vectors):
    v = np.asarray(vectors, dtype=float)
    if v.ndim != 2 or v.shape[0] < 2:
        raise TooFewPoints(f"need at least 2 vectors; got {0 if v.ndim != 2 else v.shape[0]}")
    return pdist(v)


def pairwise_distances(vectors):
    """Symmetric ``(N, N)`` Euclidean distance matrix with a zero diagonal."""
    return squareform(_condensed(vectors))


def _unique_pair_distances(d):
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    if d.ndim != 2 or n < 2 or d.shape[1] != n:
        raise TooFewPoints("distance matrix must be square with N >= 2")
    return d[np.triu_indices(n, k=1)], n


def select_dc(d, target_fraction=0.02):
    """Cutoff distance giving an average neighbour count of about ``target_fraction * N``.

    The cutoff is an order statistic of the ``M = N (N - 1) / 2`` unique pair
    distances, taken at 1-based rank ``ceil(target_fraction * M)``. The rank is
    raised to at least ``ceil(N / 2)`` so the mean neighbour count stays >= 1.
    """
    if not 0 < target_fraction < 1:
        raise InputError(f"target_fraction must lie in (0, 1); got {target_fraction}")
    flat, n = _unique_pair_distances(d)
    m = flat.size
    rank = max(math.ceil(target_fraction * m), math.ceil(n / 2))
    rank = min(rank, m)
    return float(np.partition(flat, rank - 1)[rank - 1])


def local_density(d, d_c):
    """Neighbour counts ``#{j != i : d_ij < d_c}``."""
    if d_c < 0:
        raise InputError(f"d_c must be non-negative; got {d_c}")
    d = np.asarray(d, dtype=float)
    within = d < d_c
    np.fill_diagonal(within, False)
    return within.sum(axis=1).astype(np.int64)


def density_order(rho):
    """Point indices from highest to lowest density; ties keep the smaller index first."""
    return np.argsort(-np.asarray(rho), kind="stable")


def delta_and_parents(d, rho):
    """Distance to, and index of, the nearest point ranked higher in density.

    The single top-ranked point gets the largest distance in its row and
    ``NO_PARENT``. Equal distances resolve to the smaller index.
    """
    d = np.asarray(d, dtype=float)
    n = d.shape[0]
    order = density_order(rho)
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    higher = rank[None, :] < rank[:, None]
    masked = np.where(higher, d, np.inf)
    parent = np.argmin(masked, axis=1)
    delta = masked[np.arange(n), parent]
    top = order[0]
    delta[top] = d[top].max()
    parent[top] = NO_PARENT
    return delta, parent


def density_peaks(vectors, dc_fraction=0.02, d_c=None):
    """Full density-peaks pass over 4D match vectors."""
    d = pairwise_distances(vectors)
    if d_c is None:
        d_c = select_dc(d, dc_fraction)
    rho = local_density(d, d_c)
    delta, parent = delta_and_parents(d, rho)
    return DensityPeaksResult(rho, delta, parent, rho * delta, float(d_c))


def cluster_labels(result, selected):
    """Assign each point to its first selected ancestor along the parent chain.

    Points with no selected ancestor get ``NO_PARENT``. Selected points label
    themselves, so they act as cluster centres.
    """
    selected = np.asarray(selected, dtype=bool)
    labels = np.full(len(selected), NO_PARENT, dtype=np.int64)
    for i in density_order(result.rho):
        if selected[i]:
            labels[i] = i
        elif result.nearest_higher[i] != NO_PARENT:
            labels[i] = labels[result.nearest_higher[i]]
    return labels


def select_inliers(result, alpha):
    """Keep points whose decision value reaches ``alpha * max(rho) * max(delta)``."""
    if alpha < 0:
        raise InputError(f"alpha must be non-negative; got {alpha}")
    threshold = float(alpha * result.rho.max() * result.delta.max())
    if threshold == 0.0:
        keep = np.ones(len(result.rho), dtype=bool)
    else:
        keep = result.gamma >= threshold
    return ClusterSelection(
        float(alpha), np.flatnonzero(keep), threshold, cluster_labels(result, keep)
    )

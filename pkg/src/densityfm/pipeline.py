"""F estimation with a density-peaks prefilter in front of RANSAC.

The correspondences are embedded as 4D vectors and scored by density peaks.
Only points whose decision value clears the alpha threshold are handed to
RANSAC, and the resulting inlier mask is mapped back to the original indexing.
"""

import time
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple

import numpy as np

from .density import (
    ClusterSelection,
    DensityPeaksResult,
    build_match_vectors,
    density_peaks,
    select_inliers,
)
from .errors import InputError, TooFewClusterInliers
from .geometry import as_pairs
from .robust import SAMPLE_SIZE, EstimateResult, RansacConfig, ransac_search, refit


@dataclass(frozen=True)
class PipelineConfig:
    alpha: float = 0.011
    ransac: RansacConfig = field(default_factory=RansacConfig)
    dc_fraction: float = 0.02
    normalize: bool = True

    def __post_init__(self):
        if self.alpha < 0:
            raise InputError(f"alpha must be non-negative; got {self.alpha}")
        if not 0 < self.dc_fraction < 1:
            raise InputError(f"dc_fraction must lie in (0, 1); got {self.dc_fraction}")


@dataclass(frozen=True, eq=False)
class PipelineReport:
    estimate: EstimateResult
    cluster_selection: ClusterSelection
    density: DensityPeaksResult
    stage_timings: Dict[str, float]


def _cluster(q, config):
    result = density_peaks(build_match_vectors(q), dc_fraction=config.dc_fraction)
    return result, select_inliers(result, config.alpha)


def clustering_assisted_estimate(pairs, config=None):
    """Estimate F with RANSAC restricted to the density-peaks selection."""
    config = config or PipelineConfig()
    q = as_pairs(pairs)
    if q.ndim != 2 or len(q) < SAMPLE_SIZE:
        raise InputError(f"need at least {SAMPLE_SIZE} correspondences; got {len(q)}")
    rconf = config.ransac
    if rconf.normalize != config.normalize:
        rconf = RansacConfig(rconf.th, rconf.p, rconf.max_iterations, rconf.seed, config.normalize)

    t0 = time.perf_counter()
    density, selection = _cluster(q, config)
    keep = selection.inlier_indices
    if len(keep) < SAMPLE_SIZE:
        raise TooFewClusterInliers(config.alpha, len(keep), SAMPLE_SIZE)
    t1 = time.perf_counter()
    sub = q[keep]
    best = ransac_search(sub, rconf)
    t2 = time.perf_counter()
    F, sub_mask, error = refit(sub, best, rconf.th, rconf.normalize)
    t3 = time.perf_counter()

    mask = np.zeros(len(q), dtype=bool)
    mask[keep[sub_mask]] = True
    timings = {"cluster": t1 - t0, "ransac": t2 - t1, "refit": t3 - t2}
    estimate = EstimateResult(F, mask, best.iterations, error, t3 - t0, timings)
    return PipelineReport(estimate, selection, density, timings)


class DecisionRecord(NamedTuple):
    index: int
    rho: int
    delta: float
    gamma: float
    inlier: bool
    nearest_higher: int


@dataclass(frozen=True)
class DecisionFigure:
    records: List[DecisionRecord]
    d_c: float
    alpha: float
    curve_constant: float

    def curve(self, rho):
        """Boundary ``delta = curve_constant / rho`` of the rejection region."""
        rho = np.asarray(rho, dtype=float)
        with np.errstate(divide="ignore"):
            return self.curve_constant / rho


def decision_figure(pairs, config=None):
    """Per-point ``(rho, delta, gamma)`` with the selection flag and threshold curve."""
    config = config or PipelineConfig()
    q = as_pairs(pairs)
    density, selection = _cluster(q, config)
    inlier = selection.mask
    records = [
        DecisionRecord(
            i,
            int(density.rho[i]),
            float(density.delta[i]),
            float(density.gamma[i]),
            bool(inlier[i]),
            int(density.nearest_higher[i]),
        )
        for i in range(len(q))
    ]
    return DecisionFigure(records, density.d_c, config.alpha, selection.threshold_value)

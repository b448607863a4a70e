"""Ground-truth comparison of fundamental matrices and the benchmark runner.

The comparison metric samples a point ``m`` in the left image, places ``m'``
on the true epipolar line ``F0 m`` and measures how far ``m`` and ``m'`` sit
from the epipolar lines of the estimate ``F1``. Averaged over many draws this
gives a pixel-scale distance between two epipolar geometries.
"""

import math
import time
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .errors import DensityFMError, InputError, RetriesExhausted
from .geometry import as_pairs, homogeneous, symmetric_epipolar_distance
from .linear import eight_point, seven_point
from .pipeline import PipelineConfig, clustering_assisted_estimate
from .robust import EstimateResult, RansacConfig, lmeds, ransac


@dataclass(frozen=True)
class EvaluationConfig:
    trials: int = 500
    image_bounds: Tuple[float, float] = (640.0, 480.0)
    seed: int = 0
    max_retries: int = 1000

    def __post_init__(self):
        if self.trials < 1:
            raise InputError("trials must be at least 1")
        if min(self.image_bounds) <= 0:
            raise InputError("image bounds must be positive")
        if self.max_retries < 1:
            raise InputError("max_retries must be at least 1")


@dataclass(frozen=True, eq=False)
class EvaluationReport:
    d1: float
    per_trial: np.ndarray  # (trials, 2) columns d_i, d'_i
    retries_used: int


def _corners(bounds):
    w, h = bounds
    return np.array([[0.0, 0.0, 1.0], [w, 0.0, 1.0], [0.0, h, 1.0], [w, h, 1.0]])


def _hits_rectangle(lines, bounds):
    vals = lines @ _corners(bounds).T
    nondegenerate = np.hypot(lines[:, 0], lines[:, 1]) > 0
    return nondegenerate & (vals.min(axis=1) <= 0) & (vals.max(axis=1) >= 0)


def clip_lines(lines, bounds):
    """Endpoints of each line's segment inside ``[0, w] x [0, h]``.

    Returns ``(start, end, ok)``; ``ok`` is false where the line misses the
    rectangle or only touches it at a single point.
    """
    w, h = bounds
    a, b, c = lines[:, 0], lines[:, 1], lines[:, 2]
    n = len(lines)
    with np.errstate(divide="ignore", invalid="ignore"):
        cand = np.stack(
            [
                np.column_stack([np.zeros(n), -c / b]),
                np.column_stack([np.full(n, w), -(a * w + c) / b]),
                np.column_stack([-c / a, np.zeros(n)]),
                np.column_stack([-(b * h + c) / a, np.full(n, h)]),
            ],
            axis=1,
        )
    tol = 1e-9 * max(w, h)
    inside = (
        np.all(np.isfinite(cand), axis=2)
        & (cand[..., 0] >= -tol)
        & (cand[..., 0] <= w + tol)
        & (cand[..., 1] >= -tol)
        & (cand[..., 1] <= h + tol)
    )
    direction = np.column_stack([-b, a])
    t = np.einsum("nkj,nj->nk", np.nan_to_num(cand), direction)
    t_lo = np.where(inside, t, np.inf)
    t_hi = np.where(inside, t, -np.inf)
    i_lo = np.argmin(t_lo, axis=1)
    i_hi = np.argmax(t_hi, axis=1)
    rows = np.arange(n)
    start = cand[rows, i_lo]
    end = cand[rows, i_hi]
    ok = inside.any(axis=1) & (t_hi[rows, i_hi] - t_lo[rows, i_lo] > tol * np.hypot(a, b))
    return start, end, ok


def _line_distance(lines, points):
    return np.abs(np.sum(lines * points, axis=1)) / np.hypot(lines[:, 0], lines[:, 1])


def zhang_error(f0, f1, config=None):
    """Mean distance of ground-truth-consistent points to the estimate's epipolar lines.

    Each accepted draw contributes ``d_i = d(m_i, F1^T m'_i)`` and
    ``d'_i = d(m'_i, F1 m_i)``. A draw is rejected when any epipolar line
    involved misses the image; ``max_retries`` consecutive rejections raise
    :class:`RetriesExhausted`.
    """
    config = config or EvaluationConfig()
    f0 = np.asarray(f0, dtype=float)
    f1 = np.asarray(f1, dtype=float)
    bounds = tuple(float(v) for v in config.image_bounds)
    w, h = bounds
    rng = np.random.default_rng(config.seed)

    accepted = []
    need = config.trials
    retries = 0
    streak = 0
    while need > 0:
        batch = max(2 * need, 64)
        m = homogeneous(np.column_stack([rng.uniform(0, w, batch), rng.uniform(0, h, batch)]))
        u = rng.uniform(size=batch)
        l0 = m @ f0.T
        start, end, ok = clip_lines(l0, bounds)
        mp = homogeneous(start + u[:, None] * (end - start))
        l1 = m @ f1.T
        l0p = mp @ f0
        l1p = mp @ f1
        ok &= _hits_rectangle(l1, bounds) & _hits_rectangle(l0p, bounds) & _hits_rectangle(l1p, bounds)
        with np.errstate(divide="ignore", invalid="ignore"):
            d = _line_distance(l1p, m)
            dp = _line_distance(l1, mp)
        for i in range(batch):
            if not ok[i]:
                retries += 1
                streak += 1
                if streak >= config.max_retries:
                    raise RetriesExhausted(
                        f"{streak} consecutive rejected draws; epipolar lines miss the image"
                    )
                continue
            streak = 0
            accepted.append((d[i], dp[i]))
            need -= 1
            if need == 0:
                break
    per_trial = np.array(accepted)
    return EvaluationReport(float(per_trial.mean()), per_trial, retries)


# --- benchmark -------------------------------------------------------------

METHODS = ("eight-point", "seven-point", "lmeds", "ransac", "proposed")
THRESHOLD_METHODS = ("ransac", "proposed")


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    th: Optional[float]
    alpha: Optional[float]
    seed: int
    time_ms: float
    mean_error_px: float
    d1_px: Optional[float]
    status: str = "ok"
    iterations: int = 0
    num_inliers: int = 0
    dataset: str = ""

    def sort_key(self):
        return (
            self.dataset,
            self.method,
            -1.0 if self.th is None else self.th,
            -1.0 if self.alpha is None else self.alpha,
            self.seed,
        )


@dataclass(frozen=True)
class BenchmarkSettings:
    ths: Tuple[float, ...] = (2.2,)
    alphas: Optional[Tuple[float, ...]] = None  # one per th; defaults to `alpha`
    alpha: float = 0.011
    seed: int = 0
    confidence: float = 0.99
    max_iterations: int = 100_000
    lmeds_trials: int = 500
    dc_fraction: float = 0.02
    normalize: bool = True
    evaluation: EvaluationConfig = field(default_factory=EvaluationConfig)

    def threshold_grid(self):
        alphas = self.alphas or (self.alpha,) * len(self.ths)
        if len(alphas) != len(self.ths):
            raise InputError("alphas must pair one-to-one with ths")
        return list(zip(self.ths, alphas))


def seven_point_best(pairs, normalize=True):
    """7-point fit on the first seven pairs, choosing the candidate that best explains all pairs."""
    q = as_pairs(pairs)
    candidates = seven_point(q[:7], normalize=normalize)
    errors = [float(np.mean(symmetric_epipolar_distance(F, q))) for F in candidates]
    return candidates[int(np.argmin(errors))]


def _all_pairs_result(F, q, start):
    d = symmetric_epipolar_distance(F, q)
    mask = np.ones(len(q), dtype=bool)
    return EstimateResult(F, mask, 1, float(d.mean()), time.perf_counter() - start)


def run_method(method, pairs, th=None, alpha=None, settings=None):
    """Run one named estimator and return its :class:`EstimateResult`."""
    settings = settings or BenchmarkSettings()
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
    if method in THRESHOLD_METHODS and th is None:
        raise InputError(f"{method} needs a threshold th")
    q = as_pairs(pairs)
    start = time.perf_counter()
    if method == "eight-point":
        return _all_pairs_result(eight_point(q, settings.normalize), q, start)
    if method == "seven-point":
        return _all_pairs_result(seven_point_best(q, settings.normalize), q, start)
    if method == "lmeds":
        return lmeds(q, settings.lmeds_trials, settings.seed, settings.normalize)
    rconf = RansacConfig(
        th, settings.confidence, settings.max_iterations, settings.seed, settings.normalize
    )
    if method == "ransac":
        return ransac(q, rconf)
    alpha = settings.alpha if alpha is None else alpha
    pconf = PipelineConfig(alpha, rconf, settings.dc_fraction, settings.normalize)
    return clustering_assisted_estimate(q, pconf).estimate


def benchmark(pairs, methods, f0=None, settings=None, dataset=""):
    """Run ``methods`` on one dataset; failures become rows with an error status."""
    settings = settings or BenchmarkSettings()
    q = as_pairs(pairs)
    rows: List[BenchmarkRow] = []
    for method in methods:
        if method not in METHODS:
            raise InputError(f"unknown method {method!r}; choose from {', '.join(METHODS)}")
        grid = settings.threshold_grid() if method in THRESHOLD_METHODS else [(None, None)]
        for th, alpha in grid:
            if method == "ransac":
                alpha = None
            try:
                res = run_method(method, q, th, alpha, settings)
            except DensityFMError as exc:
                rows.append(
                    BenchmarkRow(method, th, alpha, settings.seed, math.nan, math.nan, None,
                                 type(exc).__name__, dataset=dataset)
                )
                continue
            d1 = None
            status = "ok"
            if f0 is not None:
                try:
                    d1 = zhang_error(f0, res.f_matrix, settings.evaluation).d1
                except DensityFMError as exc:
                    status = type(exc).__name__
            rows.append(
                BenchmarkRow(
                    method, th, alpha, settings.seed, res.elapsed * 1e3, res.mean_inlier_error,
                    d1, status, res.iterations_used, res.num_inliers, dataset,
                )
            )
    return sorted(rows, key=BenchmarkRow.sort_key)

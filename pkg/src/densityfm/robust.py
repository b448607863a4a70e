"""Robust estimators: RANSAC over 8-point samples and LMedS over 7-point samples."""

import math
import time
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .errors import DegenerateConfiguration, DegenerateLine, InputError, NoConsensus
from .geometry import as_pairs, enforce_rank2, symmetric_epipolar_distance
from .linear import RANK_RATIO_TOL, eight_point, seven_point

SAMPLE_SIZE = 8

# Smallest robust scale (pixels) LMedS will use; keeps round-off from splitting exact data.
LMEDS_SCALE_FLOOR = 1e-8


@dataclass(frozen=True)
class RansacConfig:
    th: float = 1.0
    p: float = 0.99
    max_iterations: int = 100_000
    seed: int = 0
    normalize: bool = True
    sample_size: int = field(default=SAMPLE_SIZE, init=False)

    def __post_init__(self):
        if not self.th > 0:
            raise InputError(f"th must be positive; got {self.th}")
        if not 0 < self.p < 1:
            raise InputError(f"confidence p must lie in (0, 1); got {self.p}")
        if self.max_iterations < 1:
            raise InputError("max_iterations must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise InputError("seed must be an unsigned 64-bit integer")


@dataclass(frozen=True, eq=False)
class EstimateResult:
    f_matrix: np.ndarray
    inlier_mask: np.ndarray
    iterations_used: int
    mean_inlier_error: float
    elapsed: float = 0.0
    timings: Dict[str, float] = field(default_factory=dict, compare=False)

    @property
    def num_inliers(self):
        return int(np.count_nonzero(self.inlier_mask))


def required_iterations(p, inlier_ratio, sample_size=SAMPLE_SIZE):
    """Number of samples k with ``1 - p = (1 - w**s)**k``, rounded up and at least 1."""
    if not 0 < p < 1:
        raise InputError(f"confidence p must lie in (0, 1); got {p}")
    if not 0 < inlier_ratio <= 1:
        raise InputError(f"inlier_ratio must lie in (0, 1]; got {inlier_ratio}")
    good = inlier_ratio**sample_size
    if good >= 1.0:
        return 1
    # log1p keeps precision when the all-inlier sample probability is tiny
    k = math.log1p(-p) / math.log1p(-good)
    if math.isinf(k):
        return 1
    return max(1, math.ceil(k))


def _score(F, q):
    try:
        return symmetric_epipolar_distance(F, q)
    except DegenerateLine:
        return None


@dataclass
class _Consensus:
    f_matrix: np.ndarray
    mask: np.ndarray
    count: int
    error: float
    iterations: int


def draw_samples(rng, n, count, size=SAMPLE_SIZE):
    """``count`` rows of ``size`` distinct indices in ``range(n)``."""
    if n < 4 * size:
        return np.argsort(rng.random((count, n)), axis=1)[:, :size]
    out = rng.integers(0, n, size=(count, size))
    while True:
        srt = np.sort(out, axis=1)
        bad = np.flatnonzero(np.any(srt[:, 1:] == srt[:, :-1], axis=1))
        if not len(bad):
            return out
        out[bad] = rng.integers(0, n, size=(len(bad), size))


def _batch_normalize(pts):
    centroid = pts.mean(axis=1)
    shifted = pts - centroid[:, None, :]
    spread = np.hypot(shifted[..., 0], shifted[..., 1]).mean(axis=1)
    ok = spread > 1e-12 * np.maximum(1.0, np.abs(centroid).max(axis=1))
    scale = np.sqrt(2.0) / np.where(ok, spread, 1.0)
    T = np.zeros((len(pts), 3, 3))
    T[:, 0, 0] = T[:, 1, 1] = scale
    T[:, :2, 2] = -scale[:, None] * centroid
    T[:, 2, 2] = 1.0
    return shifted * scale[:, None, None], T, ok


def _batch_rank2(F):
    U, s, Vt = np.linalg.svd(F)
    s[:, 2] = 0.0
    return np.einsum("bij,bj,bjk->bik", U, s, Vt)


def batch_eight_point(samples, normalize=True):
    """8-point fits of a stack of ``(B, 8, 4)`` samples.

    Returns ``(B, 3, 3)`` rank-2 matrices (not canonicalized) and a validity
    mask that is false for degenerate samples.
    """
    left, right = samples[..., 0:2], samples[..., 2:4]
    ok = np.ones(len(samples), dtype=bool)
    if normalize:
        left, T1, ok1 = _batch_normalize(left)
        right, T2, ok2 = _batch_normalize(right)
        ok &= ok1 & ok2
    x, y, xp, yp = left[..., 0], left[..., 1], right[..., 0], right[..., 1]
    A = np.stack([x * xp, y * xp, xp, x * yp, y * yp, yp, x, y, np.ones_like(x)], axis=-1)
    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    ok &= sv[:, -1] > RANK_RATIO_TOL * sv[:, 0]
    F = _batch_rank2(Vt[:, -1].reshape(-1, 3, 3))
    if normalize:
        F = np.einsum("bji,bjk,bkl->bil", T2, F, T1)
    return F, ok


def batch_seven_point(samples, normalize=True):
    """7-point fits of a stack of ``(B, 7, 4)`` samples.

    Returns ``(B, 3, 3, 3)`` candidate matrices (not canonicalized) and a
    ``(B, 3)`` mask of which candidate slots hold a real root.
    """
    b = len(samples)
    left, right = samples[..., 0:2], samples[..., 2:4]
    ok = np.ones(b, dtype=bool)
    if normalize:
        left, T1, ok1 = _batch_normalize(left)
        right, T2, ok2 = _batch_normalize(right)
        ok &= ok1 & ok2
    x, y, xp, yp = left[..., 0], left[..., 1], right[..., 0], right[..., 1]
    A = np.stack([x * xp, y * xp, xp, x * yp, y * yp, yp, x, y, np.ones_like(x)], axis=-1)
    _, sv, Vt = np.linalg.svd(A, full_matrices=True)
    ok &= sv[:, 6] > RANK_RATIO_TOL * sv[:, 0]
    F1 = Vt[:, 7].reshape(-1, 3, 3)
    F2 = Vt[:, 8].reshape(-1, 3, 3)

    lams = np.array([-1.0, 0.0, 1.0, 2.0])
    dets = np.linalg.det(lams[None, :, None, None] * F1[:, None] + (1.0 - lams)[None, :, None, None] * F2[:, None])
    coeffs = np.linalg.solve(np.vander(lams, 4), dets.T).T
    lead = coeffs[:, 0]
    cubic = np.abs(lead) > 1e-12 * np.abs(coeffs).max(axis=1)

    roots = np.full((b, 3), np.nan, dtype=complex)
    if cubic.any():
        c = coeffs[cubic] / lead[cubic, None]
        comp = np.zeros((len(c), 3, 3))
        comp[:, 0, :] = -c[:, 1:]
        comp[:, 1, 0] = comp[:, 2, 1] = 1.0
        roots[cubic] = np.linalg.eigvals(comp)
    real = np.abs(roots.imag) <= 1e-8 * np.maximum(1.0, np.abs(roots.real))
    lam = np.where(real, roots.real, 0.0)[..., None, None]
    cand = lam * F1[:, None] + (1.0 - lam) * F2[:, None]
    if normalize:
        cand = np.einsum("bji,bcjk,bkl->bcil", T2, cand, T1)
    valid = real & ok[:, None]

    # a vanishing leading coefficient puts a root at infinity; use the scalar solver
    for i in np.flatnonzero(~cubic & ok):
        try:
            found = seven_point(samples[i], normalize=normalize)
        except DegenerateConfiguration:
            continue
        cand[i, : len(found)] = found
        valid[i] = np.arange(3) < len(found)
    return cand, valid


def batch_symmetric_distance(F, m, mp):
    """``(B, N)`` symmetric epipolar distances for a stack of models.

    Rows where some epipolar line is the line at infinity are flagged in the
    returned validity mask.
    """
    # line coefficient planes as contiguous (B, N) GEMM outputs
    mt, mpt = m.T, mp.T
    a, b, c = (F[:, i, :] @ mt for i in range(3))
    al, bl = (F[:, :, i] @ mpt for i in range(2))
    r = a * mpt[0]
    r += b * mpt[1]
    r += c
    np.abs(r, out=r)
    nr = a * a
    nr += b * b
    nl = al * al
    nl += bl * bl
    ok = np.all(nr > 0, axis=1) & np.all(nl > 0, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        np.sqrt(nr, out=nr)
        np.sqrt(nl, out=nl)
        d = (r / nr + r / nl) * 0.5
    return d, ok


def ransac_search(pairs, config, batch_size=512):
    """Hypothesize-and-verify loop; returns the best sample model before refitting.

    Hypotheses are generated and scored in batches for speed, but the
    bookkeeping runs in iteration order: a model replaces the incumbent only
    with more inliers, or as many with a lower mean inlier distance, and the
    adaptive bound is re-evaluated after every replacement.
    """
    q = as_pairs(pairs)
    n = len(q)
    if n < SAMPLE_SIZE:
        raise InputError(f"ransac needs at least {SAMPLE_SIZE} correspondences; got {n}")
    rng = np.random.default_rng(config.seed)
    m = np.column_stack([q[:, 0:2], np.ones(n)])
    mp = np.column_stack([q[:, 2:4], np.ones(n)])
    best = None
    limit = config.max_iterations
    it = 0
    chunk = 16
    while it < limit:
        count = min(chunk, limit - it)
        chunk = min(2 * chunk, batch_size)
        idx = draw_samples(rng, n, count)
        F, ok = batch_eight_point(q[idx], config.normalize)
        d, ok_lines = batch_symmetric_distance(F, m, mp)
        ok &= ok_lines
        within = d <= config.th
        counts = within.sum(axis=1)
        floor = SAMPLE_SIZE if best is None else max(SAMPLE_SIZE, best.count)
        candidates = np.flatnonzero(ok & (counts >= floor))
        stop = count
        for j in candidates:
            if j >= stop:
                break
            c = int(counts[j])
            error = float(d[j][within[j]].mean())
            if best is None or c > best.count or (c == best.count and error < best.error):
                best = _Consensus(enforce_rank2(F[j]), within[j].copy(), c, error, it + j + 1)
                limit = min(required_iterations(config.p, c / n, SAMPLE_SIZE), config.max_iterations)
                stop = max(j + 1, min(count, limit - it))
        it += stop
    if best is None:
        raise NoConsensus(f"no sample reached {SAMPLE_SIZE} inliers in {it} iterations")
    best.iterations = it
    return best


def refit(pairs, consensus, th, normalize=True):
    """8-point refit on a consensus set; the sample model is kept if the refit loses support."""
    q = as_pairs(pairs)
    F, mask = consensus.f_matrix, consensus.mask
    try:
        G = eight_point(q[mask], normalize=normalize)
    except DegenerateConfiguration:
        G = None
    d = _score(G, q) if G is not None else None
    if d is not None and np.count_nonzero(d <= th) >= SAMPLE_SIZE:
        F, mask = G, d <= th
    else:
        d = symmetric_epipolar_distance(F, q)
    return F, mask, float(d[mask].mean())


def ransac(pairs, config=None, **kwargs):
    """RANSAC estimate of F with adaptive stopping and a final consensus refit.

    ``kwargs`` build a :class:`RansacConfig` when ``config`` is omitted.
    """
    if config is None:
        config = RansacConfig(**kwargs)
    start = time.perf_counter()
    best = ransac_search(pairs, config)
    mid = time.perf_counter()
    F, mask, error = refit(pairs, best, config.th, config.normalize)
    end = time.perf_counter()
    return EstimateResult(
        F,
        mask,
        best.iterations,
        error,
        end - start,
        {"ransac": mid - start, "refit": end - mid},
    )


def lmeds(pairs, trials=500, seed=0, normalize=True, batch_size=128):
    """Least-median-of-squares estimate from random 7-point samples.

    Every real 7-point candidate is scored by the median squared symmetric
    epipolar distance over all pairs. Inliers are pairs within 2.5 robust
    standard deviations of the best candidate, and F is refit on them.
    """
    q = as_pairs(pairs)
    n = len(q)
    if n < SAMPLE_SIZE:
        raise InputError(f"lmeds needs at least {SAMPLE_SIZE} correspondences; got {n}")
    if trials < 1:
        raise InputError("trials must be at least 1")
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    m = np.column_stack([q[:, 0:2], np.ones(n)])
    mp = np.column_stack([q[:, 2:4], np.ones(n)])
    # medians below the floor are indistinguishable from an exact fit; such ties
    # go to the lower mean, which separates the 7-point roots when N is tiny
    floor_sq = LMEDS_SCALE_FLOOR**2
    best_key = (np.inf, np.inf)
    best_median = np.inf
    best_sq = None
    done = 0
    while done < trials:
        count = min(batch_size, trials - done)
        done += count
        idx = draw_samples(rng, n, count, size=7)
        cand, valid = batch_seven_point(q[idx], normalize)
        cand = cand.reshape(-1, 3, 3)
        d, ok_lines = batch_symmetric_distance(cand, m, mp)
        valid = valid.ravel() & ok_lines
        if not valid.any():
            continue
        sq = d[valid]
        sq *= sq
        med = np.median(sq, axis=1)
        mean = sq.mean(axis=1)
        # lexicographic minimum; lexsort is stable, so the earliest candidate wins ties
        j = np.lexsort((mean, np.maximum(med, floor_sq)))[0]
        key = (max(float(med[j]), floor_sq), float(mean[j]))
        if key < best_key:
            best_key, best_median, best_sq = key, float(med[j]), sq[j]
    if best_sq is None:
        raise NoConsensus("every LMedS trial was degenerate")

    scale = 1.4826 * (1.0 + 5.0 / (n - 7)) * math.sqrt(best_median)
    scale = max(scale, LMEDS_SCALE_FLOOR)
    mask = best_sq <= (2.5 * scale) ** 2
    if np.count_nonzero(mask) < SAMPLE_SIZE:
        raise NoConsensus(f"LMedS kept {np.count_nonzero(mask)} inliers; need {SAMPLE_SIZE}")
    F = eight_point(q[mask], normalize=normalize)
    error = float(symmetric_epipolar_distance(F, q[mask]).mean())
    return EstimateResult(F, mask, trials, error, time.perf_counter() - start)

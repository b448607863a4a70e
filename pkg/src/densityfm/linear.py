"""Linear fundamental-matrix solvers: normalized 8-point and minimal 7-point."""

import numpy as np

from .errors import DegenerateConfiguration, DegenerateInput, InputError
from .geometry import as_pairs, enforce_rank2

# sigma_7 / sigma_0 of the design matrix below which it is treated as rank deficient.
RANK_RATIO_TOL = 1e-10


def hartley_normalize(points):
    """Similarity transform moving 2D points to centroid 0 and mean norm sqrt(2).

    Parameters
    ----------
    points : array-like, shape (N, 2) or (N, 3)
        Inhomogeneous points, or homogeneous points with ``w == 1``.

    Returns
    -------
    normalized : ndarray, shape (N, 2)
    T : ndarray, shape (3, 3)
        ``T @ (x, y, 1)`` gives the normalized homogeneous point.
    """
    p = np.asarray(points, dtype=float)[:, :2]
    if p.shape[0] < 1:
        raise InputError("need at least one point to normalize")
    centroid = p.mean(axis=0)
    shifted = p - centroid
    spread = np.mean(np.hypot(shifted[:, 0], shifted[:, 1]))
    if spread <= 1e-12 * max(1.0, np.abs(centroid).max()):
        raise DegenerateInput("all points coincide")
    s = np.sqrt(2.0) / spread
    T = np.array([[s, 0.0, -s * centroid[0]], [0.0, s, -s * centroid[1]], [0.0, 0.0, 1.0]])
    return shifted * s, T


def design_matrix(pairs):
    """Rows ``(x x', y x', x', x y', y y', y', x, y, 1)`` of the stacked constraint ``A f = 0``."""
    q = as_pairs(pairs)
    x, y, xp, yp = q[:, 0], q[:, 1], q[:, 2], q[:, 3]
    one = np.ones_like(x)
    return np.column_stack([x * xp, y * xp, xp, x * yp, y * yp, yp, x, y, one])


def _normalized_system(q, normalize):
    if not normalize:
        return q, np.eye(3), np.eye(3)
    left, T1 = hartley_normalize(q[:, 0:2])
    right, T2 = hartley_normalize(q[:, 2:4])
    return np.hstack([left, right]), T1, T2


def _nullspace(A, dim):
    _, s, Vt = np.linalg.svd(A, full_matrices=True)
    # index of the last singular value that must be nonzero for the nullspace to have `dim` columns
    last = 9 - dim - 1
    if s[0] == 0.0 or s[last] / s[0] < RANK_RATIO_TOL:
        raise DegenerateConfiguration(
            f"design matrix is rank deficient (sigma_{last}/sigma_0 = "
            f"{s[last] / s[0] if s[0] else 0.0:.3g})"
        )
    return Vt[9 - dim:]


def eight_point(pairs, normalize=True):
    """Linear 8-point estimate of F from N >= 8 correspondences.

    Solves ``min ||A f||`` subject to ``||f|| = 1`` by SVD, optionally in
    Hartley-normalized coordinates, then projects to rank 2 and canonicalizes.
    """
    q = as_pairs(pairs)
    if q.ndim != 2 or q.shape[0] < 8:
        raise InputError(f"eight_point needs at least 8 correspondences; got {len(q)}")
    qn, T1, T2 = _normalized_system(q, normalize)
    f = _nullspace(design_matrix(qn), 1)[0]
    Fn = f.reshape(3, 3)
    if normalize:
        # rank-2 projection in the conditioned frame, then undo the transforms
        Fn = enforce_rank2(Fn)
        return enforce_rank2(T2.T @ Fn @ T1)
    return enforce_rank2(Fn)


def _cubic_coefficients(F1, F2):
    """Coefficients (highest first) of ``det(lam * F1 + (1 - lam) * F2)``."""
    lams = np.array([-1.0, 0.0, 1.0, 2.0])
    dets = [np.linalg.det(lam * F1 + (1.0 - lam) * F2) for lam in lams]
    return np.linalg.solve(np.vander(lams, 4), dets)


def seven_point(pairs, normalize=True):
    """Minimal 7-point solver.

    Returns a list of one to three canonical rank-2 candidates, one per real
    root of the determinant cubic over the two-dimensional nullspace.
    """
    q = as_pairs(pairs)
    if q.ndim != 2 or q.shape[0] != 7:
        raise InputError(f"seven_point needs exactly 7 correspondences; got {len(q)}")
    qn, T1, T2 = _normalized_system(q, normalize)
    basis = _nullspace(design_matrix(qn), 2)
    F1, F2 = basis[0].reshape(3, 3), basis[1].reshape(3, 3)

    coeffs = _cubic_coefficients(F1, F2)
    scale = np.abs(coeffs).max()
    candidates = []
    if abs(coeffs[0]) <= 1e-12 * scale:
        # det(F1 - F2) vanishes: the root at infinity is itself a solution
        candidates.append(F1 - F2)
        coeffs = coeffs[1:]
    for root in np.roots(coeffs):
        if abs(root.imag) <= 1e-8 * max(1.0, abs(root.real)):
            lam = root.real
            candidates.append(lam * F1 + (1.0 - lam) * F2)

    out = []
    for Fn in candidates:
        F = enforce_rank2(T2.T @ Fn @ T1)
        if not any(np.allclose(F, G, rtol=0, atol=1e-12) for G in out):
            out.append(F)
    if not out:
        # unreachable for a real cubic, kept as a guard against root-finder failure
        raise DegenerateConfiguration("seven-point cubic has no real root")
    return out

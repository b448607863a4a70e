"""Homogeneous 2D primitives for two-view epipolar geometry.

Correspondences are handled as float arrays of shape ``(N, 4)`` holding
``(x, y, x', y')`` rows, the left image point followed by the right one. Every
function here also accepts a single row of shape ``(4,)`` and then returns a
scalar. Points are ``(x, y)`` or homogeneous ``(x, y, w)``; lines are
``(a, b, c)`` for ``a*x + b*y + c = 0``.
"""

from typing import NamedTuple

import numpy as np

from .errors import DegenerateLine, InputError, SingularInput

# Relative tolerance used to decide which entries tie for the largest magnitude.
SIGN_TIE_RTOL = 1e-6


class MatchPair(NamedTuple):
    x: float
    y: float
    xp: float
    yp: float

    @property
    def m(self):
        return np.array([self.x, self.y, 1.0])

    @property
    def m_prime(self):
        return np.array([self.xp, self.yp, 1.0])


def as_pairs(pairs):
    """Return correspondences as a float ``(N, 4)`` array (or ``(4,)`` for one pair)."""
    arr = np.asarray(pairs, dtype=float)
    if arr.ndim == 1 and arr.shape[0] == 0:
        return arr.reshape(0, 4)
    if arr.shape[-1] != 4 or arr.ndim > 2:
        raise InputError(f"correspondences must have shape (N, 4); got {arr.shape}")
    return arr


def homogeneous(points):
    """Append ``w = 1`` to ``(..., 2)`` points; ``(..., 3)`` input passes through."""
    p = np.asarray(points, dtype=float)
    if p.shape[-1] == 3:
        return p
    if p.shape[-1] != 2:
        raise InputError(f"points must have 2 or 3 coordinates; got {p.shape}")
    return np.concatenate([p, np.ones(p.shape[:-1] + (1,))], axis=-1)


def split_pairs(pairs):
    """Homogeneous left and right points of ``pairs``."""
    q = as_pairs(pairs)
    return homogeneous(q[..., 0:2]), homogeneous(q[..., 2:4])


def cross_matrix(v):
    """Skew-symmetric matrix ``[v]_x`` such that ``[v]_x @ u == cross(v, u)``."""
    x, y, z = np.asarray(v, dtype=float)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def epipolar_residual(F, pairs):
    """Algebraic residual ``m'^T F m`` per correspondence (signed)."""
    F = np.asarray(F, dtype=float)
    m, mp = split_pairs(pairs)
    return np.einsum("...i,ij,...j->...", mp, F, m)


def epipolar_line(F, point, side="left-to-right"):
    """Epipolar line ``F m`` (left-to-right) or ``F^T m'`` (right-to-left).

    Raises
    ------
    DegenerateLine
        If the point is mapped to the line at infinity, i.e. ``(a, b) == (0, 0)``.
    """
    F = np.asarray(F, dtype=float)
    p = homogeneous(point)
    if side == "left-to-right":
        line = p @ F.T
    elif side == "right-to-left":
        line = p @ F
    else:
        raise InputError(f"unknown side {side!r}")
    if np.any((line[..., 0] == 0.0) & (line[..., 1] == 0.0)):
        raise DegenerateLine("epipolar line is the line at infinity")
    return line


def point_line_distance(line, point):
    """Euclidean distance from ``point`` to ``line``; broadcasts over leading axes."""
    line = np.asarray(line, dtype=float)
    p = homogeneous(point)
    norm = np.hypot(line[..., 0], line[..., 1])
    if np.any(norm == 0.0):
        raise DegenerateLine("line has (a, b) == (0, 0)")
    return np.abs(np.sum(line * p, axis=-1)) / (norm * np.abs(p[..., 2]))


def epipolar_distances(F, pairs):
    """Distances ``d(m', F m)`` and ``d(m, F^T m')`` for each correspondence."""
    F = np.asarray(F, dtype=float)
    m, mp = split_pairs(pairs)
    right = point_line_distance(m @ F.T, mp)
    left = point_line_distance(mp @ F, m)
    return right, left


def symmetric_epipolar_distance(F, pairs):
    """Mean of the two point-to-epipolar-line distances, in pixels."""
    right, left = epipolar_distances(F, pairs)
    return 0.5 * (right + left)


def canonicalize(F):
    """Scale ``F`` to unit Frobenius norm with its largest-magnitude entry positive.

    Entries whose magnitude is within a relative ``SIGN_TIE_RTOL`` of the maximum
    count as tied; the first of them in row-major order fixes the sign.
    """
    F = np.asarray(F, dtype=float)
    if F.shape != (3, 3):
        raise InputError(f"F must be 3x3; got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise InputError("F has non-finite entries")
    norm = np.linalg.norm(F)
    if norm == 0.0:
        raise SingularInput("cannot canonicalize the zero matrix")
    G = F / norm
    flat = np.abs(G).ravel()
    lead = int(np.flatnonzero(flat >= flat.max() * (1.0 - SIGN_TIE_RTOL))[0])
    if G.flat[lead] < 0:
        G = -G
    # adding zero clears negative zeros so printed output is stable
    return G + 0.0


def enforce_rank2(F):
    """Closest rank-2 matrix in Frobenius norm, canonicalized."""
    F = np.asarray(F, dtype=float)
    if F.shape != (3, 3):
        raise InputError(f"F must be 3x3; got {F.shape}")
    if not np.all(np.isfinite(F)):
        raise InputError("F has non-finite entries")
    if not np.any(F):
        raise SingularInput("cannot enforce rank 2 on the zero matrix")
    U, s, Vt = np.linalg.svd(F)
    s[2] = 0.0
    return canonicalize((U * s) @ Vt)

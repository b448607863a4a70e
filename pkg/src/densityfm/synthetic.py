"""Synthetic two-view scenes with exact ground-truth fundamental matrices.

Random 3D points are projected through two pinhole cameras. Gaussian pixel
noise is added to every coordinate and a share of the right-image points is
replaced by uniform random points, which are the planted outliers.
"""

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from .errors import CoincidentCenters, FrustumEmpty, InputError
from .geometry import canonicalize, cross_matrix


@dataclass(frozen=True)
class CameraModel:
    K: np.ndarray
    R: np.ndarray
    t: np.ndarray

    @classmethod
    def from_parameters(cls, focal, principal_point, R=None, t=None):
        cx, cy = principal_point
        K = np.array([[focal, 0.0, cx], [0.0, focal, cy], [0.0, 0.0, 1.0]])
        R = np.eye(3) if R is None else np.asarray(R, dtype=float)
        t = np.zeros(3) if t is None else np.asarray(t, dtype=float)
        return cls(K, R, t)

    @property
    def P(self):
        return self.K @ np.hstack([self.R, self.t[:, None]])

    @property
    def center(self):
        return -self.R.T @ self.t

    def project(self, X):
        """Project ``(N, 3)`` world points to ``(N, 2)`` pixels; also returns depths."""
        cam = X @ self.R.T + self.t
        uvw = cam @ self.K.T
        return uvw[:, :2] / uvw[:, 2:3], cam[:, 2]


def _projection(P):
    if isinstance(P, CameraModel):
        return P.P
    P = np.asarray(P, dtype=float)
    if P.shape != (3, 4):
        raise InputError(f"projection matrix must be 3x4; got {P.shape}")
    return P


def camera_center(P):
    """Homogeneous camera center: the right null vector of ``P``."""
    P = _projection(P)
    C = np.linalg.svd(P)[2][-1]
    return C / np.linalg.norm(C)


def f_from_cameras(P, P_prime):
    """Ground-truth F with ``m'^T F m = 0``, built as ``[e']_x P' P^+``."""
    P = _projection(P)
    P_prime = _projection(P_prime)
    C = camera_center(P)
    C_prime = camera_center(P_prime)
    # centers coincide when the two homogeneous 4-vectors are parallel
    if np.linalg.matrix_rank(np.vstack([C, C_prime]), tol=1e-12) < 2:
        raise CoincidentCenters("camera centers coincide; F is undefined")
    e_prime = P_prime @ C
    F = cross_matrix(e_prime) @ P_prime @ np.linalg.pinv(P)
    return canonicalize(F)


@dataclass(frozen=True)
class SyntheticSceneConfig:
    num_points: int = 200
    noise_sigma: float = 0.0
    outlier_fraction: float = 0.0
    image_size: Tuple[int, int] = (640, 480)
    focal: float = 500.0
    depth_range: Tuple[float, float] = (5.0, 15.0)
    baseline_ratio: float = 0.2
    max_rotation_deg: float = 5.0
    seed: int = 0
    max_rejections: int = 100_000

    def validate(self):
        if self.num_points < 8:
            raise InputError("num_points must be at least 8")
        if not 0.0 <= self.outlier_fraction < 1.0:
            raise InputError("outlier_fraction must lie in [0, 1)")
        if self.noise_sigma < 0:
            raise InputError("noise_sigma must be non-negative")
        w, h = self.image_size
        if w <= 0 or h <= 0:
            raise InputError("image_size must be positive")
        near, far = self.depth_range
        if not 0 < near < far:
            raise InputError("depth_range must satisfy 0 < near < far")
        if self.num_points - self.num_outliers < 8:
            raise InputError("fewer than 8 genuine correspondences after outlier planting")

    @property
    def num_outliers(self):
        return int(round(self.outlier_fraction * self.num_points))


@dataclass(frozen=True)
class SyntheticScene:
    pairs: np.ndarray
    truth_mask: np.ndarray
    f0: np.ndarray
    cameras: Tuple[CameraModel, CameraModel]
    points3d: np.ndarray = field(repr=False)
    config: Optional[SyntheticSceneConfig] = None


def make_cameras(config, rng):
    """Reference camera at the origin and a second camera offset by a random small motion."""
    w, h = config.image_size
    pp = (w / 2.0, h / 2.0)
    left = CameraModel.from_parameters(config.focal, pp)
    angles = rng.uniform(-config.max_rotation_deg, config.max_rotation_deg, size=3)
    R = Rotation.from_euler("xyz", angles, degrees=True).as_matrix()
    # mostly lateral baseline with a random tilt
    direction = np.array([1.0, 0.0, 0.0]) + rng.normal(scale=0.2, size=3)
    direction /= np.linalg.norm(direction)
    baseline = config.baseline_ratio * 0.5 * sum(config.depth_range)
    center = baseline * direction
    right = CameraModel.from_parameters(config.focal, pp, R, -R @ center)
    return left, right


def _sample_visible_points(config, left, right, rng):
    w, h = config.image_size
    near, far = config.depth_range
    Kinv = np.linalg.inv(left.K)
    n = config.num_points
    kept = []
    drawn = 0
    while sum(len(k) for k in kept) < n:
        if drawn >= config.max_rejections + n:
            raise FrustumEmpty("no 3D points visible in both cameras")
        batch = max(2 * n, 64)
        drawn += batch
        # depth density proportional to z^2 gives uniform density in the frustum volume
        u = rng.uniform(size=batch)
        z = (near**3 + u * (far**3 - near**3)) ** (1.0 / 3.0)
        pix = np.column_stack([rng.uniform(0, w, batch), rng.uniform(0, h, batch), np.ones(batch)])
        X = (pix @ Kinv.T) * z[:, None]
        xr, depth = right.project(X)
        ok = (depth > 0) & (xr[:, 0] >= 0) & (xr[:, 0] <= w) & (xr[:, 1] >= 0) & (xr[:, 1] <= h)
        kept.append(X[ok])
    return np.vstack(kept)[:n]


def generate_scene(config=None, **overrides):
    """Draw a reproducible synthetic scene; ``overrides`` replace config fields."""
    if config is None:
        config = SyntheticSceneConfig(**overrides)
    elif overrides:
        config = SyntheticSceneConfig(**{**config.__dict__, **overrides})
    config.validate()
    rng = np.random.default_rng(config.seed)
    left, right = make_cameras(config, rng)
    X = _sample_visible_points(config, left, right, rng)
    xl, _ = left.project(X)
    xr, _ = right.project(X)
    pairs = np.hstack([xl, xr])
    if config.noise_sigma > 0:
        pairs = pairs + rng.normal(scale=config.noise_sigma, size=pairs.shape)

    n = config.num_points
    truth = np.ones(n, dtype=bool)
    k = config.num_outliers
    if k:
        w, h = config.image_size
        idx = rng.choice(n, size=k, replace=False)
        pairs[idx, 2] = rng.uniform(0, w, size=k)
        pairs[idx, 3] = rng.uniform(0, h, size=k)
        truth[idx] = False

    f0 = f_from_cameras(left, right)
    return SyntheticScene(pairs, truth, f0, (left, right), X, config)

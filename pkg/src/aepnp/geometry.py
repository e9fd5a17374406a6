"""Camera model, correspondence container, pose types, and rotation utilities.

Conventions used throughout the package:

* column vectors, ``p_camera = R @ p_world + t``
* pixel coordinates in the usual image frame, normalized coordinates are
  ``(u - c) / f`` so the third homogeneous component is 1
* all linear algebra in float64
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateMatrix, NonPositiveDepth

ROTATION_TOL = 1e-9


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole parameters in pixels: focal lengths and principal point."""

    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")

    @property
    def focal(self) -> np.ndarray:
        return np.array([self.fx, self.fy])

    @property
    def principal_point(self) -> np.ndarray:
        return np.array([self.cx, self.cy])


def normalize_pixels(intrinsics: CameraIntrinsics, pixels: np.ndarray) -> np.ndarray:
    """Map pixel coordinates to normalized image coordinates.

    Accepts a single ``(2,)`` pixel or an ``(n, 2)`` batch and returns the
    same shape: ``((u - cx) / fx, (v - cy) / fy)``.
    """
    p = np.asarray(pixels, dtype=float)
    return (p - intrinsics.principal_point) / intrinsics.focal


def denormalize(intrinsics: CameraIntrinsics, normalized: np.ndarray) -> np.ndarray:
    """Inverse of :func:`normalize_pixels`."""
    q = np.asarray(normalized, dtype=float)
    return q * intrinsics.focal + intrinsics.principal_point


@dataclass
class Correspondences:
    """A batch of 2D-3D correspondences.

    Attributes:
        world: (n, 3) model-frame point coordinates.
        pixel: (n, 2) observed image coordinates in pixels.
        normalized: (n, 2) normalized image coordinates consistent with the
            intrinsics the pixels were observed under.
    """

    world: np.ndarray
    pixel: np.ndarray
    normalized: np.ndarray

    def __post_init__(self):
        self.world = np.atleast_2d(np.asarray(self.world, dtype=float))
        self.pixel = np.atleast_2d(np.asarray(self.pixel, dtype=float))
        self.normalized = np.atleast_2d(np.asarray(self.normalized, dtype=float))
        n = self.world.shape[0]
        if self.world.shape != (n, 3):
            raise ValueError(f"world must be (n, 3), got {self.world.shape}")
        if self.pixel.shape != (n, 2) or self.normalized.shape != (n, 2):
            raise ValueError("pixel and normalized must be (n, 2) matching world")

    @classmethod
    def from_pixels(
        cls, world: np.ndarray, pixel: np.ndarray, intrinsics: CameraIntrinsics
    ) -> "Correspondences":
        pixel = np.atleast_2d(np.asarray(pixel, dtype=float))
        return cls(world=world, pixel=pixel, normalized=normalize_pixels(intrinsics, pixel))

    def __len__(self) -> int:
        return self.world.shape[0]

    def __getitem__(self, index) -> "Correspondences":
        """Index with anything numpy fancy indexing accepts; returns a sub-batch."""
        return Correspondences(
            world=self.world[index], pixel=self.pixel[index], normalized=self.normalized[index]
        )


def is_rotation_matrix(m: np.ndarray, tol: float = ROTATION_TOL) -> bool:
    """True when m is orthonormal with determinant +1 within ``tol``."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 3):
        return False
    if not np.all(np.abs(m.T @ m - np.eye(3)) <= tol):
        return False
    return abs(np.linalg.det(m) - 1.0) <= tol


@dataclass
class ScaledPose:
    """Rigid pose plus the two free per-axis scales (x-axis scale fixed to 1).

    Attributes:
        rotation: (3, 3) rotation matrix, world to camera.
        translation: (3,) translation, camera frame.
        s1: y-axis scale, > 0.
        s2: z-axis scale, > 0.
    """

    rotation: np.ndarray
    translation: np.ndarray
    s1: float
    s2: float

    def __post_init__(self):
        self.rotation = np.asarray(self.rotation, dtype=float)
        self.translation = np.asarray(self.translation, dtype=float).reshape(3)
        self.s1 = float(self.s1)
        self.s2 = float(self.s2)
        if not is_rotation_matrix(self.rotation):
            raise ValueError("rotation is not orthonormal with det +1")
        if not (self.s1 > 0 and self.s2 > 0 and np.isfinite(self.s1) and np.isfinite(self.s2)):
            raise ValueError(f"scales must be positive finite, got s1={self.s1}, s2={self.s2}")

    @property
    def scale_vector(self) -> np.ndarray:
        """Diagonal of the scale matrix, (1, s1, s2)."""
        return np.array([1.0, self.s1, self.s2])

    def transform(self, points: np.ndarray) -> np.ndarray:
        """Map model points to the camera frame: R @ diag(1, s1, s2) @ x + t."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        cam = (pts * self.scale_vector) @ self.rotation.T + self.translation
        return cam if np.ndim(points) == 2 else cam[0]


def project(pose: ScaledPose, points: np.ndarray, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Project model points to pixel coordinates under a scaled pose.

    Raises:
        NonPositiveDepth: if any point has camera-frame depth <= 0.
    """
    cam = np.atleast_2d(pose.transform(points))
    depths = cam[:, 2]
    if np.any(depths <= 0):
        raise NonPositiveDepth(f"{int(np.sum(depths <= 0))} point(s) at depth <= 0")
    pix = denormalize(intrinsics, cam[:, :2] / depths[:, None])
    return pix if np.ndim(points) == 2 else pix[0]


def nearest_rotation(m: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a 3x3 matrix onto SO(3) (Frobenius-nearest).

    Raises:
        DegenerateMatrix: if the smallest singular value is below 1e-12.
    """
    m = np.asarray(m, dtype=float)
    u, s, vt = np.linalg.svd(m)
    if s[-1] < 1e-12:
        raise DegenerateMatrix(f"smallest singular value {s[-1]:.3e} below 1e-12")
    d = np.sign(np.linalg.det(u @ vt))
    return u @ np.diag([1.0, 1.0, d]) @ vt


def rotation_from_axis_angle(axis_angle: np.ndarray) -> np.ndarray:
    """Rodrigues map: 3-vector (axis * angle, radians) to a rotation matrix."""
    w = np.asarray(axis_angle, dtype=float).reshape(3)
    theta = np.linalg.norm(w)
    if theta < 1e-12:
        k = _skew(w)
        return np.eye(3) + k  # first-order term; exact at w = 0
    k = _skew(w / theta)
    return np.eye(3) + np.sin(theta) * k + (1.0 - np.cos(theta)) * (k @ k)


def rotation_from_quaternion(q: np.ndarray) -> np.ndarray:
    """Rotation matrix for a quaternion (w, x, y, z); normalizes its input."""
    q = np.asarray(q, dtype=float).reshape(4)
    norm = np.linalg.norm(q)
    if norm < 1e-12:
        raise DegenerateMatrix("quaternion norm too small to normalize")
    w, x, y, z = q / norm
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_to_quaternion(r: np.ndarray) -> np.ndarray:
    """Unit quaternion (w, x, y, z) with w >= 0 for a rotation matrix."""
    r = np.asarray(r, dtype=float)
    t = np.trace(r)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(r[i, i] - r[j, j] - r[k, k] + 1.0, 0.0)) * 2.0
        q = np.empty(4)
        q[0] = (r[k, j] - r[j, k]) / s
        q[1 + i] = 0.25 * s
        q[1 + j] = (r[j, i] + r[i, j]) / s
        q[1 + k] = (r[k, i] + r[i, k]) / s
    q /= np.linalg.norm(q)
    return q if q[0] >= 0 else -q


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )

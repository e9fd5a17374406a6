"""Scikit-learn style estimator facade over the functional solvers.

Each estimator takes ``X`` as an (n, 3) array of world points and ``y``
as the matching (n, 2) pixel observations. Fitted state lives in
trailing-underscore attributes; ``predict`` reprojects world points and
``score`` returns the negative mean reprojection error in pixels.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .geometry import CameraIntrinsics, Correspondences, ScaledPose, project
from .linear import aepnp_solve, epnp_solve
from .ransac import RansacConfig, ransac_aepnp, reprojection_residuals
from .refine import refine


def check_points(x, n_columns: int, name: str) -> np.ndarray:
    """Validate a 2-D finite float array with a fixed column count."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != n_columns:
        raise ValueError(f"{name} must have shape (n, {n_columns}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_paired_points(x, y) -> tuple[np.ndarray, np.ndarray]:
    """Validate matching world/pixel arrays for fitting."""
    world = check_points(x, 3, "X")
    pixel = check_points(y, 2, "y")
    if len(world) != len(pixel):
        raise ValueError(f"X and y must have the same length, got {len(world)} and {len(pixel)}")
    return world, pixel


class _PoseEstimatorBase(BaseEstimator):
    """Shared prediction/scoring for the pose estimators."""

    def _require_intrinsics(self) -> CameraIntrinsics:
        if not isinstance(self.intrinsics, CameraIntrinsics):
            raise ValueError("set intrinsics to a CameraIntrinsics instance before use")
        return self.intrinsics

    def _fit_corrs(self, x, y) -> Correspondences:
        world, pixel = check_paired_points(x, y)
        return Correspondences.from_pixels(world, pixel, self._require_intrinsics())

    def predict(self, X) -> np.ndarray:
        """Project world points (n, 3) to pixels (n, 2) under the fitted pose."""
        check_is_fitted(self, "pose_")
        world = check_points(X, 3, "X")
        return project(self.pose_, world, self._require_intrinsics())

    def score(self, X, y) -> float:
        """Negative mean reprojection error in pixels (higher is better)."""
        check_is_fitted(self, "pose_")
        corrs = self._fit_corrs(X, y)
        residuals = reprojection_residuals(self.pose_, corrs, self._require_intrinsics())
        return -float(residuals.mean())


class EPnP(_PoseEstimatorBase):
    """Rigid baseline solver; the fitted pose carries unit scales."""

    def __init__(self, intrinsics: CameraIntrinsics | None = None):
        self.intrinsics = intrinsics

    def fit(self, X, y):
        corrs = self._fit_corrs(X, y)
        rotation, translation, diagnostics = epnp_solve(corrs, self.intrinsics)
        self.rotation_ = rotation
        self.translation_ = translation
        self.diagnostics_ = diagnostics
        self.pose_ = ScaledPose(rotation=rotation, translation=translation, s1=1.0, s2=1.0)
        return self


class AEPnP(_PoseEstimatorBase):
    """Closed-form pose + anisotropic y/z scale estimator (x-scale gauge = 1)."""

    def __init__(self, intrinsics: CameraIntrinsics | None = None):
        self.intrinsics = intrinsics

    def fit(self, X, y):
        corrs = self._fit_corrs(X, y)
        pose, diagnostics = aepnp_solve(corrs, self.intrinsics)
        self.pose_ = pose
        self.rotation_ = pose.rotation
        self.translation_ = pose.translation
        self.s1_ = pose.s1
        self.s2_ = pose.s2
        self.diagnostics_ = diagnostics
        return self


class RansacAEPnP(_PoseEstimatorBase):
    """RANSAC-wrapped scaled-pose estimator with optional refinement.

    Parameters mirror RansacConfig; ``refine=True`` additionally runs the
    nonlinear refinement on the consensus inliers after RANSAC.
    """

    def __init__(
        self,
        intrinsics: CameraIntrinsics | None = None,
        inlier_threshold_px: float = 2.0,
        max_iterations: int = 1000,
        sample_size: int = 6,
        confidence: float = 0.99,
        refine: bool = False,
        seed: int = 0,
    ):
        self.intrinsics = intrinsics
        self.inlier_threshold_px = inlier_threshold_px
        self.max_iterations = max_iterations
        self.sample_size = sample_size
        self.confidence = confidence
        self.refine = refine
        self.seed = seed

    def fit(self, X, y):
        corrs = self._fit_corrs(X, y)
        cfg = RansacConfig(
            inlier_threshold_px=self.inlier_threshold_px,
            max_iterations=self.max_iterations,
            sample_size=self.sample_size,
            confidence=self.confidence,
            seed=self.seed,
        )
        result = ransac_aepnp(corrs, self.intrinsics, cfg)
        pose = result.pose
        self.refine_report_ = None
        if self.refine:
            pose, self.refine_report_ = refine(
                pose, corrs[result.inlier_mask], self.intrinsics
            )
        self.pose_ = pose
        self.rotation_ = pose.rotation
        self.translation_ = pose.translation
        self.s1_ = pose.s1
        self.s2_ = pose.s2
        self.inlier_mask_ = result.inlier_mask
        self.n_inliers_ = result.best_inlier_count
        self.iterations_run_ = result.iterations_run
        return self

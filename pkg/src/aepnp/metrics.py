"""Evaluation metrics: rotation, translation, and scale errors."""

from __future__ import annotations

import numpy as np

from .exceptions import InvalidGroundTruth


def rotation_error(r: np.ndarray, r_gt: np.ndarray) -> float:
    """Geodesic distance between two rotations, in degrees.

    arccos((trace(R_gt^T R) - 1) / 2), clamped against floating-point drift.
    """
    cos_angle = (np.trace(np.asarray(r_gt).T @ np.asarray(r)) - 1.0) / 2.0
    return float(np.degrees(np.arccos(np.clip(cos_angle, -1.0, 1.0))))


def translation_error(t: np.ndarray, t_gt: np.ndarray) -> float:
    """Euclidean distance between two translations."""
    return float(np.linalg.norm(np.asarray(t, dtype=float) - np.asarray(t_gt, dtype=float)))


def scale_error(s: float, s_gt: float) -> float:
    """Relative scale error |s - s_gt| / s_gt, as a fraction (not percent)."""
    if not s_gt > 0:
        raise InvalidGroundTruth(f"ground-truth scale must be positive, got {s_gt}")
    return abs(s - s_gt) / s_gt

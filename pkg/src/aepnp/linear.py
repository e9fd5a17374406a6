"""Closed-form pose solvers based on control-point null-space decomposition.

Both solvers express every model point as a barycentric combination of four
control points, eliminate the unknown depths, and read the camera-frame
control points off the null space of a 2n x 12 homogeneous system.

* :func:`epnp_solve` is the rigid baseline: control points from the point
  cloud's centroid and principal directions, null vector rescaled to match
  the known world control-point distances, pose by rigid alignment.
* :func:`aepnp_solve` additionally recovers two per-axis scale factors by
  choosing the canonical control points (origin plus the three axis unit
  vectors), so that translation, per-axis scales, and rotation columns can
  be read directly off the camera-frame control points. The overall scale
  ambiguity is resolved by the x-scale = 1 gauge.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .exceptions import (
    AxisCollapse,
    DegenerateControlPoints,
    DegenerateMatrix,
    RankDeficient,
    TooFewCorrespondences,
)
from .geometry import CameraIntrinsics, Correspondences, ScaledPose, nearest_rotation, normalize_pixels

MIN_CORRESPONDENCES = 6
# Calibrated on the synthetic protocols: legitimate solves at 4 px noise
# bottom out near gap 4.3, while degenerate configurations sit below ~3
# (or collapse absolutely and are caught by ABSOLUTE_RANK_TOL).
CONDITION_GAP_THRESHOLD = 3.0
ABSOLUTE_RANK_TOL = 1e-10
AXIS_RMS_FLOOR = 1e-9

CANONICAL_CONTROL_POINTS = np.array(
    [
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
    ]
)


@dataclass
class SolveDiagnostics:
    """Solution-quality report attached to every closed-form solve.

    Attributes:
        smallest_singular_values: (2,) the two smallest singular values of
            the design matrix, ascending: [smallest, second smallest].
        condition_gap: second-smallest over smallest singular value. Large
            means a clean one-dimensional null space.
        cheirality_flips: number of points with negative recovered depth
            before the null-vector sign correction.
    """

    smallest_singular_values: np.ndarray
    condition_gap: float
    cheirality_flips: int = 0


def pca_control_points(points: np.ndarray) -> np.ndarray:
    """Centroid plus principal-direction control points for a point cloud.

    Returns a (4, 3) array: row 0 is the centroid, rows 1..3 are the
    centroid offset by each principal direction scaled to one standard
    deviation of the cloud.
    """
    pts = np.asarray(points, dtype=float)
    centroid = pts.mean(axis=0)
    centered = pts - centroid
    _, svals, vt = np.linalg.svd(centered, full_matrices=False)
    std = svals / np.sqrt(pts.shape[0])
    return np.vstack([centroid, centroid + std[:, None] * vt])


def compute_alphas(points: np.ndarray, control_points: np.ndarray) -> np.ndarray:
    """Barycentric coefficients of each point over four control points.

    Solves the 3x3 basis system per point; rows sum to 1 and reproduce the
    input points exactly. For the canonical control points the weights for
    j = 1..3 are simply the point's coordinates.

    Args:
        points: (n, 3) model points.
        control_points: (4, 3), first row is the reference point c0.

    Returns:
        (n, 4) coefficients ordered like the control points.

    Raises:
        DegenerateControlPoints: if the basis c_j - c_0 is singular.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    cps = np.asarray(control_points, dtype=float)
    basis = (cps[1:] - cps[0]).T  # columns are c_j - c_0
    svals = np.linalg.svd(basis, compute_uv=False)
    if svals[-1] <= 1e-12 * max(svals[0], 1.0):
        raise DegenerateControlPoints("control-point basis is singular")
    w = np.linalg.solve(basis, (pts - cps[0]).T).T  # (n, 3)
    return np.column_stack([1.0 - w.sum(axis=1), w])


def build_design_matrix(normalized: np.ndarray, alphas: np.ndarray) -> np.ndarray:
    """Assemble the 2n x 12 depth-eliminated projection constraints.

    Row 2i carries (alpha_ij, 0, -u_ix * alpha_ij) in columns (3j, 3j+1,
    3j+2); row 2i+1 carries (0, alpha_ij, -u_iy * alpha_ij). The unknown
    vector stacks the four camera-frame control points.

    Raises:
        TooFewCorrespondences: if fewer than 6 points are supplied.
    """
    u = np.atleast_2d(np.asarray(normalized, dtype=float))
    alphas = np.atleast_2d(np.asarray(alphas, dtype=float))
    n = alphas.shape[0]
    if n < MIN_CORRESPONDENCES:
        raise TooFewCorrespondences(f"need at least {MIN_CORRESPONDENCES} points, got {n}")
    a = np.zeros((2 * n, 12))
    for j in range(4):
        a[0::2, 3 * j] = alphas[:, j]
        a[0::2, 3 * j + 2] = -u[:, 0] * alphas[:, j]
        a[1::2, 3 * j + 1] = alphas[:, j]
        a[1::2, 3 * j + 2] = -u[:, 1] * alphas[:, j]
    return a


def null_space_vector(a: np.ndarray) -> tuple[np.ndarray, SolveDiagnostics]:
    """Unit right singular vector of the smallest singular value of ``a``.

    Raises:
        TooFewCorrespondences: if ``a`` has fewer than 12 rows.
        RankDeficient: if the null space is not clearly one-dimensional,
            either because the second-smallest singular value collapses
            toward zero absolutely (numerical rank < 11) or because it is
            not separated from the smallest by the condition-gap threshold.
    """
    a = np.asarray(a, dtype=float)
    if a.shape[0] < 12:
        raise TooFewCorrespondences(f"design matrix needs >= 12 rows, got {a.shape[0]}")
    _, svals, vt = np.linalg.svd(a, full_matrices=False)
    smallest = svals[-1]
    second = svals[-2]
    gap = float(second / smallest) if smallest > 0 else np.inf
    diagnostics = SolveDiagnostics(
        smallest_singular_values=np.array([smallest, second]), condition_gap=gap
    )
    if second <= ABSOLUTE_RANK_TOL * max(svals[0], 1.0):
        raise RankDeficient(
            f"second-smallest singular value {second:.3e} is at numerical-zero level; "
            "the null space has dimension > 1"
        )
    if gap < CONDITION_GAP_THRESHOLD:
        raise RankDeficient(
            f"condition gap {gap:.3f} below {CONDITION_GAP_THRESHOLD}; "
            "degenerate configuration"
        )
    return vt[-1], diagnostics


def decompose_scaled_rotation(
    cps_camera: np.ndarray,
) -> tuple[np.ndarray, float, float, float, np.ndarray]:
    """Split camera-frame canonical control points into rotation, scales, t.

    With canonical world control points, the camera-frame set satisfies
    t = c0, and each difference c_j - c0 is the j-th rotation column times
    the j-th scale. The column-normalized difference matrix is projected
    onto SO(3) to absorb noise.

    Returns:
        (rotation, s1', s2', s3', translation) where s_j' are the raw
        per-axis scales before gauge fixing.

    Raises:
        DegenerateMatrix: if a difference vector collapses or the column
            matrix cannot be projected onto a rotation.
    """
    cps = np.asarray(cps_camera, dtype=float)
    t = cps[0]
    diffs = cps[1:] - t  # rows: scaled rotation columns
    scales = np.linalg.norm(diffs, axis=1)
    if np.any(scales < 1e-15):
        raise DegenerateMatrix("control-point difference vector collapsed")
    rotation = nearest_rotation((diffs / scales[:, None]).T)
    return rotation, float(scales[0]), float(scales[1]), float(scales[2]), t


def aepnp_solve(
    corrs: Correspondences, intrinsics: CameraIntrinsics
) -> tuple[ScaledPose, SolveDiagnostics]:
    """Estimate rotation, translation, and two per-axis scales.

    Pipeline: per-axis RMS preconditioning, canonical control points,
    design-matrix null space, cheirality sign fix, scale-aware
    decomposition, gauge fix (x-scale = 1), and exact preconditioning undo.

    Args:
        corrs: n >= 6 correspondences whose world points span all three axes.
        intrinsics: camera used to normalize the pixel observations.

    Returns:
        (pose, diagnostics); the pose carries scales relative to the model's
        x-axis, which is reported as scale 1.

    Raises:
        TooFewCorrespondences, AxisCollapse, RankDeficient, DegenerateMatrix.
    """
    n = len(corrs)
    if n < MIN_CORRESPONDENCES:
        raise TooFewCorrespondences(f"need at least {MIN_CORRESPONDENCES} points, got {n}")
    world = corrs.world
    axis_rms = np.sqrt(np.mean(world**2, axis=0))
    if np.any(axis_rms < AXIS_RMS_FLOOR):
        raise AxisCollapse(f"world-axis RMS {axis_rms} has a component below {AXIS_RMS_FLOOR}")

    preconditioned = world / axis_rms
    alphas = compute_alphas(preconditioned, CANONICAL_CONTROL_POINTS)
    normalized = normalize_pixels(intrinsics, corrs.pixel)
    a = build_design_matrix(normalized, alphas)
    v, diagnostics = null_space_vector(a)

    depths = alphas @ v[2::3]
    negative = int(np.sum(depths < 0))
    diagnostics.cheirality_flips = negative
    if negative * 2 > n or (negative * 2 == n and v[2] < 0):
        v = -v

    rotation, s1p, s2p, s3p, t_raw = decompose_scaled_rotation(v.reshape(4, 3))

    # gauge fix (divide by the x-axis raw scale) and exact preconditioning undo
    kx, ky, kz = axis_rms
    translation = t_raw / s1p * kx
    s1 = s2p / s1p * kx / ky
    s2 = s3p / s1p * kx / kz
    return ScaledPose(rotation=rotation, translation=translation, s1=s1, s2=s2), diagnostics


def epnp_solve(
    corrs: Correspondences, intrinsics: CameraIntrinsics
) -> tuple[np.ndarray, np.ndarray, SolveDiagnostics]:
    """Rigid baseline solver: rotation and translation only.

    Control points are the cloud centroid plus its principal directions;
    the null vector's scale is fixed by matching the known world
    control-point distances, its sign by cheirality, and the pose follows
    from rigid alignment of the two control-point sets.

    Returns:
        (rotation, translation, diagnostics).

    Raises:
        TooFewCorrespondences, DegenerateControlPoints, RankDeficient,
        DegenerateMatrix.
    """
    n = len(corrs)
    if n < MIN_CORRESPONDENCES:
        raise TooFewCorrespondences(f"need at least {MIN_CORRESPONDENCES} points, got {n}")
    cps_world = pca_control_points(corrs.world)
    alphas = compute_alphas(corrs.world, cps_world)
    normalized = normalize_pixels(intrinsics, corrs.pixel)
    a = build_design_matrix(normalized, alphas)
    v, diagnostics = null_space_vector(a)

    cps_camera = v.reshape(4, 3)
    dist_world = _pairwise_distances(cps_world)
    dist_camera = _pairwise_distances(cps_camera)
    beta = float(dist_camera @ dist_world / (dist_camera @ dist_camera))
    cps_camera = beta * cps_camera

    depths = alphas @ cps_camera[:, 2]
    negative = int(np.sum(depths < 0))
    diagnostics.cheirality_flips = negative
    if negative * 2 > n or (negative * 2 == n and cps_camera[0, 2] < 0):
        cps_camera = -cps_camera

    rotation, translation = _align_rigid(cps_world, cps_camera)
    return rotation, translation, diagnostics


def _pairwise_distances(points: np.ndarray) -> np.ndarray:
    """The 6 pairwise distances between 4 points, fixed (i < j) order."""
    return np.array([np.linalg.norm(points[i] - points[j]) for i, j in combinations(range(4), 2)])


def _align_rigid(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares rigid transform with dst ~= R @ src + t."""
    src_mean = src.mean(axis=0)
    dst_mean = dst.mean(axis=0)
    cross = (dst - dst_mean).T @ (src - src_mean)
    rotation = nearest_rotation(cross)
    return rotation, dst_mean - rotation @ src_mean

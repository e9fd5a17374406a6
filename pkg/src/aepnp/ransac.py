"""RANSAC wrapper around the anisotropic-scale solver.

Deterministic for a fixed (correspondences, config) pair: each iteration
draws its minimal sample from a generator seeded by (seed, iteration), so
hypothesis k does not depend on how many iterations ran before it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AepnpError, NoHypothesisFound, TooFewCorrespondences
from .geometry import CameraIntrinsics, Correspondences, ScaledPose, denormalize
from .linear import MIN_CORRESPONDENCES, aepnp_solve

MAX_REFIT_ROUNDS = 10


@dataclass
class RansacConfig:
    inlier_threshold_px: float = 2.0
    max_iterations: int = 1000
    sample_size: int = MIN_CORRESPONDENCES
    confidence: float = 0.99
    seed: int = 0

    def __post_init__(self):
        if self.inlier_threshold_px <= 0:
            raise ValueError("inlier_threshold_px must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.sample_size < MIN_CORRESPONDENCES:
            raise ValueError(f"sample_size must be at least {MIN_CORRESPONDENCES}")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must lie in (0, 1)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass
class RobustResult:
    pose: ScaledPose
    inlier_mask: np.ndarray
    iterations_run: int
    best_inlier_count: int


def reprojection_residuals(
    pose: ScaledPose, corrs: Correspondences, intrinsics: CameraIntrinsics
) -> np.ndarray:
    """Per-point pixel reprojection distances, (n,).

    Points mapped to depth <= 0 get +inf so they can never be counted as
    inliers by any finite threshold.
    """
    cam = pose.transform(corrs.world)
    depths = cam[:, 2]
    out = np.full(len(corrs), np.inf)
    valid = depths > 0
    if np.any(valid):
        proj = denormalize(intrinsics, cam[valid, :2] / depths[valid, None])
        out[valid] = np.linalg.norm(proj - corrs.pixel[valid], axis=1)
    return out


def _adaptive_cap(inlier_ratio: float, sample_size: int, confidence: float) -> int:
    """Iterations needed to hit an all-inlier sample with the given confidence."""
    p_good = inlier_ratio**sample_size
    if p_good <= 0.0:
        return np.iinfo(np.int64).max
    if p_good >= 1.0:
        return 1
    needed = math.log(1.0 - confidence) / math.log1p(-p_good)
    if not needed < np.iinfo(np.int64).max:
        return np.iinfo(np.int64).max
    return int(math.ceil(needed))


def ransac_aepnp(
    corrs: Correspondences,
    intrinsics: CameraIntrinsics,
    cfg: RansacConfig | None = None,
) -> RobustResult:
    """Robust scaled-pose estimation by hypothesize-and-verify.

    Minimal samples of ``cfg.sample_size`` points are solved in closed form
    and scored by inlier count (ties broken by mean inlier residual, then
    by earlier iteration). The cap on iterations adapts downward as better
    hypotheses arrive. The winner is then re-estimated on its consensus
    set, iterating refit and mask recomputation while the (inlier count,
    mean inlier residual) score improves; a round that would degrade the
    score is discarded, so the returned model is never worse than the best
    sample hypothesis. The returned mask always belongs to the returned
    pose.

    Raises:
        TooFewCorrespondences: fewer points than the sample size.
        NoHypothesisFound: no sample produced a pose with any inliers.
    """
    if cfg is None:
        cfg = RansacConfig()
    n = len(corrs)
    if n < cfg.sample_size:
        raise TooFewCorrespondences(f"need at least {cfg.sample_size} correspondences, got {n}")

    best_pose: ScaledPose | None = None
    best_mask: np.ndarray | None = None
    best_count = 0
    best_mean = np.inf
    cap = cfg.max_iterations

    iteration = 0
    while iteration < cap:
        rng = np.random.default_rng([cfg.seed, iteration])
        sample = rng.choice(n, size=cfg.sample_size, replace=False)
        iteration += 1
        try:
            pose, _ = aepnp_solve(corrs[sample], intrinsics)
        except AepnpError:
            continue  # degenerate sample; costs an iteration but nothing else
        residual = reprojection_residuals(pose, corrs, intrinsics)
        mask = residual <= cfg.inlier_threshold_px
        count = int(mask.sum())
        if count == 0:
            continue
        mean_inlier = float(residual[mask].mean())
        if count > best_count or (count == best_count and mean_inlier < best_mean):
            best_pose, best_mask = pose, mask
            best_count, best_mean = count, mean_inlier
            cap = min(cap, _adaptive_cap(count / n, cfg.sample_size, cfg.confidence))

    if best_pose is None:
        raise NoHypothesisFound(
            f"no all-inlier hypothesis within {iteration} iterations "
            f"at threshold {cfg.inlier_threshold_px} px"
        )

    # Re-estimate on the consensus set until the support stabilizes. The
    # mask of a 6-point hypothesis is censored toward that hypothesis, so a
    # single refit inherits its bias; iterating to the fixpoint removes it.
    final_pose, final_mask = best_pose, best_mask
    final_count, final_mean = best_count, best_mean
    for _ in range(MAX_REFIT_ROUNDS):
        if final_count < MIN_CORRESPONDENCES:
            break
        try:
            refit_pose, _ = aepnp_solve(corrs[final_mask], intrinsics)
        except AepnpError:
            break
        residual = reprojection_residuals(refit_pose, corrs, intrinsics)
        mask = residual <= cfg.inlier_threshold_px
        count = int(mask.sum())
        mean_inlier = float(residual[mask].mean()) if count else np.inf
        if count < final_count or (count == final_count and mean_inlier >= final_mean):
            break  # would degrade the (count, mean residual) score
        support_stable = bool(np.array_equal(mask, final_mask))
        final_pose, final_mask = refit_pose, mask
        final_count, final_mean = count, mean_inlier
        if support_stable:
            break  # same support gives the same refit next round

    return RobustResult(
        pose=final_pose,
        inlier_mask=final_mask,
        iterations_run=iteration,
        best_inlier_count=final_count,
    )

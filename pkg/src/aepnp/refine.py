"""Nonlinear least-squares refinement of a scaled pose.

Minimizes the total squared reprojection error over an 8-parameter local
state: a right-composed axis-angle rotation increment (3), translation (3),
and the logs of the two free scales (2). Log-scales keep both scales
positive for every iterate, and the x-scale gauge is untouched because it
is not a parameter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import InsufficientResiduals, NumericalFailure
from .geometry import (
    CameraIntrinsics,
    Correspondences,
    ScaledPose,
    denormalize,
    nearest_rotation,
    rotation_from_axis_angle,
)

MIN_POINTS = 4  # 8 residuals for 8 parameters
DAMPING_CEILING = 1e15


@dataclass
class RefineConfig:
    max_iterations: int = 50
    gradient_tolerance: float = 1e-10
    step_tolerance: float = 1e-12
    initial_damping: float = 1e-3

    def __post_init__(self):
        if not (
            self.max_iterations > 0
            and self.gradient_tolerance > 0
            and self.step_tolerance > 0
            and self.initial_damping > 0
        ):
            raise ValueError("all refinement settings must be positive")


@dataclass
class RefineReport:
    """Outcome summary; final_cost never exceeds initial_cost."""

    initial_cost: float
    final_cost: float
    iterations: int
    converged: bool


def residuals(pose: ScaledPose, corrs: Correspondences, intrinsics: CameraIntrinsics):
    """Per-coordinate reprojection residuals, flattened to (2n,).

    Returns None when any point falls at depth <= 0 (the pose is outside
    the feasible region and the cost is treated as infinite).
    """
    cam = pose.transform(corrs.world)
    depths = cam[:, 2]
    if np.any(depths <= 0):
        return None
    proj = denormalize(intrinsics, cam[:, :2] / depths[:, None])
    return (proj - corrs.pixel).ravel()


def jacobian(pose: ScaledPose, corrs: Correspondences, intrinsics: CameraIntrinsics) -> np.ndarray:
    """Analytic (2n, 8) Jacobian of :func:`residuals` at the zero increment.

    Parameter order: axis-angle rotation increment (right-composed),
    translation, log s1, log s2.
    """
    n = len(corrs)
    r = pose.rotation
    cam = pose.transform(corrs.world)
    x, y, z = cam[:, 0], cam[:, 1], cam[:, 2]

    # d(pixel)/d(camera point), (n, 2, 3)
    d_proj = np.zeros((n, 2, 3))
    d_proj[:, 0, 0] = intrinsics.fx / z
    d_proj[:, 0, 2] = -intrinsics.fx * x / z**2
    d_proj[:, 1, 1] = intrinsics.fy / z
    d_proj[:, 1, 2] = -intrinsics.fy * y / z**2

    # d(camera point)/d(state), (n, 3, 8)
    scaled = corrs.world * pose.scale_vector
    d_cam = np.zeros((n, 3, 8))
    skews = np.zeros((n, 3, 3))
    skews[:, 0, 1] = -scaled[:, 2]
    skews[:, 0, 2] = scaled[:, 1]
    skews[:, 1, 0] = scaled[:, 2]
    skews[:, 1, 2] = -scaled[:, 0]
    skews[:, 2, 0] = -scaled[:, 1]
    skews[:, 2, 1] = scaled[:, 0]
    d_cam[:, :, :3] = -np.einsum("ab,nbc->nac", r, skews)
    d_cam[:, :, 3:6] = np.eye(3)
    d_cam[:, :, 6] = (pose.s1 * corrs.world[:, 1])[:, None] * r[:, 1]
    d_cam[:, :, 7] = (pose.s2 * corrs.world[:, 2])[:, None] * r[:, 2]

    return np.einsum("nij,njk->nik", d_proj, d_cam).reshape(2 * n, 8)


def apply_step(pose: ScaledPose, delta: np.ndarray) -> ScaledPose:
    """Compose an 8-vector increment onto a pose.

    The rotation is right-composed with the axis-angle increment and
    re-orthonormalized; scales are updated multiplicatively via exp.
    """
    delta = np.asarray(delta, dtype=float).reshape(8)
    rotation = nearest_rotation(pose.rotation @ rotation_from_axis_angle(delta[:3]))
    return ScaledPose(
        rotation=rotation,
        translation=pose.translation + delta[3:6],
        s1=pose.s1 * np.exp(delta[6]),
        s2=pose.s2 * np.exp(delta[7]),
    )


def refine(
    pose0: ScaledPose,
    corrs: Correspondences,
    intrinsics: CameraIntrinsics,
    cfg: RefineConfig | None = None,
) -> tuple[ScaledPose, RefineReport]:
    """Damped Gauss-Newton descent on the squared reprojection error.

    Steps that do not decrease the cost are rejected and the damping is
    raised (x10); accepted steps lower it (/3). Terminates on the gradient
    or step tolerance, the iteration cap, or when no descent step exists
    within the damping budget.

    Args:
        pose0: starting pose; must place all points at positive depth.
        corrs: the (inlier) correspondences to fit, at least 4.
        intrinsics: camera used for projection.

    Returns:
        (refined pose, report). final_cost <= initial_cost always holds.

    Raises:
        InsufficientResiduals: fewer than 4 correspondences.
        NumericalFailure: initial pose infeasible, or normal equations
            singular beyond damping recovery.
    """
    if cfg is None:
        cfg = RefineConfig()
    if len(corrs) < MIN_POINTS:
        raise InsufficientResiduals(f"need at least {MIN_POINTS} correspondences, got {len(corrs)}")

    res = residuals(pose0, corrs, intrinsics)
    if res is None or not np.all(np.isfinite(res)):
        raise NumericalFailure("initial pose places points at depth <= 0")
    cost = float(res @ res)
    initial_cost = cost

    pose = pose0
    damping = cfg.initial_damping
    iterations = 0
    converged = False

    for _ in range(cfg.max_iterations):
        res = residuals(pose, corrs, intrinsics)
        jac = jacobian(pose, corrs, intrinsics)
        gradient = jac.T @ res
        if np.max(np.abs(gradient)) < cfg.gradient_tolerance:
            converged = True
            break
        hessian = jac.T @ jac

        accepted = False
        solved_once = False
        delta = None
        while damping <= DAMPING_CEILING:
            try:
                delta = np.linalg.solve(hessian + damping * np.eye(8), -gradient)
            except np.linalg.LinAlgError:
                damping *= 10.0
                continue
            if not np.all(np.isfinite(delta)):
                damping *= 10.0
                continue
            solved_once = True
            candidate = apply_step(pose, delta)
            cand_res = residuals(candidate, corrs, intrinsics)
            cand_cost = np.inf if cand_res is None else float(cand_res @ cand_res)
            if cand_cost < cost:
                pose, cost = candidate, cand_cost
                damping /= 3.0
                accepted = True
                break
            damping *= 10.0

        if not solved_once:
            raise NumericalFailure("normal equations singular beyond damping recovery")
        if not accepted:
            break  # no descent direction within the damping budget
        iterations += 1
        if np.linalg.norm(delta) < cfg.step_tolerance:
            converged = True
            break

    return pose, RefineReport(
        initial_cost=initial_cost, final_cost=cost, iterations=iterations, converged=converged
    )

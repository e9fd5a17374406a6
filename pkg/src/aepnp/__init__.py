"""Pose and anisotropic-scale estimation from 2D-3D correspondences.

Estimates rotation, translation, and two per-axis scale factors (y and z,
with the x-scale fixed to 1 as the gauge) from correspondences between 3D
model points and their pixel observations, plus a rigid baseline solver,
RANSAC robustification, nonlinear refinement, and a synthetic benchmark
harness with a CLI.
"""

from .estimators import AEPnP, EPnP, RansacAEPnP
from .exceptions import (
    AepnpError,
    AxisCollapse,
    DegenerateControlPoints,
    DegenerateMatrix,
    InsufficientResiduals,
    InvalidGroundTruth,
    InvalidScale,
    NoHypothesisFound,
    NonPositiveDepth,
    NumericalFailure,
    ParseError,
    PlacementFailure,
    RankDeficient,
    TooFewCorrespondences,
    ValidationError,
)
from .fileio import (
    CSV_COLUMNS,
    apply_anisotropic_augmentation,
    load_correspondence_file,
    read_sweep_csv,
    save_correspondence_file,
    write_sweep_csv,
)
from .geometry import (
    CameraIntrinsics,
    Correspondences,
    ScaledPose,
    denormalize,
    is_rotation_matrix,
    nearest_rotation,
    normalize_pixels,
    project,
    rotation_from_axis_angle,
    rotation_from_quaternion,
    rotation_to_quaternion,
)
from .linear import (
    SolveDiagnostics,
    aepnp_solve,
    build_design_matrix,
    compute_alphas,
    decompose_scaled_rotation,
    epnp_solve,
    null_space_vector,
    pca_control_points,
)
from .metrics import rotation_error, scale_error, translation_error
from .ransac import RansacConfig, RobustResult, ransac_aepnp, reprojection_residuals
from .refine import RefineConfig, RefineReport, refine
from .simulate import (
    SceneConfig,
    SweepRecord,
    SyntheticScene,
    generate_scene,
    random_rotation,
    run_count_sweep,
    run_noise_sweep,
    run_outlier_sweep,
    run_sparse_keypoint_protocol,
    run_timing,
)

__version__ = "0.1.0"

__all__ = [
    "AEPnP",
    "AepnpError",
    "AxisCollapse",
    "CSV_COLUMNS",
    "CameraIntrinsics",
    "Correspondences",
    "DegenerateControlPoints",
    "DegenerateMatrix",
    "EPnP",
    "InsufficientResiduals",
    "InvalidGroundTruth",
    "InvalidScale",
    "NoHypothesisFound",
    "NonPositiveDepth",
    "NumericalFailure",
    "ParseError",
    "PlacementFailure",
    "RankDeficient",
    "RansacAEPnP",
    "RansacConfig",
    "RefineConfig",
    "RefineReport",
    "RobustResult",
    "ScaledPose",
    "SceneConfig",
    "SolveDiagnostics",
    "SweepRecord",
    "SyntheticScene",
    "TooFewCorrespondences",
    "ValidationError",
    "aepnp_solve",
    "apply_anisotropic_augmentation",
    "build_design_matrix",
    "compute_alphas",
    "decompose_scaled_rotation",
    "denormalize",
    "epnp_solve",
    "generate_scene",
    "is_rotation_matrix",
    "load_correspondence_file",
    "nearest_rotation",
    "normalize_pixels",
    "null_space_vector",
    "pca_control_points",
    "project",
    "random_rotation",
    "ransac_aepnp",
    "read_sweep_csv",
    "refine",
    "reprojection_residuals",
    "rotation_error",
    "rotation_from_axis_angle",
    "rotation_from_quaternion",
    "rotation_to_quaternion",
    "run_count_sweep",
    "run_noise_sweep",
    "run_outlier_sweep",
    "run_sparse_keypoint_protocol",
    "run_timing",
    "save_correspondence_file",
    "scale_error",
    "translation_error",
    "write_sweep_csv",
]

"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from aepnp import CameraIntrinsics, Correspondences, ScaledPose, SceneConfig, generate_scene


@pytest.fixture
def intrinsics():
    return CameraIntrinsics(fx=150.0, fy=150.0, cx=320.0, cy=240.0)


@pytest.fixture
def make_pose():
    """Factory for a random ScaledPose placed safely in front of the camera."""

    def _make(seed: int = 0, s1: float | None = None, s2: float | None = None) -> ScaledPose:
        rng = np.random.default_rng(seed)
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        w, x, y, z = q
        rotation = np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )
        return ScaledPose(
            rotation=rotation,
            translation=np.array([0.1, -0.2, 6.0]),
            s1=float(rng.uniform(0.5, 2.0)) if s1 is None else s1,
            s2=float(rng.uniform(0.5, 2.0)) if s2 is None else s2,
        )

    return _make


@pytest.fixture
def make_corrs(intrinsics):
    """Factory for exact synthetic correspondences under a given pose."""

    def _make(pose: ScaledPose, n: int = 20, seed: int = 0) -> Correspondences:
        rng = np.random.default_rng(seed)
        world = rng.uniform(-1.0, 1.0, size=(n, 3))
        camera = pose.transform(world)
        normalized = camera[:, :2] / camera[:, 2:3]
        pixel = normalized * intrinsics.focal + intrinsics.principal_point
        return Correspondences(world=world, pixel=pixel, normalized=normalized)

    return _make


@pytest.fixture
def scene():
    """One mid-size noisy scene reused by tests that just need plausible data."""
    return generate_scene(SceneConfig(n_points=64, noise_sigma_px=1.0, seed=11))

"""Up-to-scale odometry and its metric alignment against dense depth.

A monocular tracker recovers camera translation only up to a global scale.
Its tracked patches carry depths in the same arbitrary units, so comparing
them against a metric depth map of the first frame gives the missing factor:
the median of dense-to-patch depth ratios at the patch centers.

The tracker itself is simulated here (:func:`simulate_vo`); any other source
that yields :class:`TrajectoryFrame` and :class:`Patch` lists can be used.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import EmptyCloudError, ScaleUnavailableError
from .geom import Pose, exp_axisangle, inverse
from .scene import DepthMap

DEFAULT_PATCH_COUNT = 96
DEFAULT_PATCH_SIZE = 3


@dataclass(frozen=True)
class Patch:
    """A ``size`` x ``size`` patch sharing one depth, in odometry units."""

    center: tuple
    size: int
    depth: float

    def __post_init__(self):
        if not self.depth > 0:
            raise ValueError("patch depth must be positive")
        if self.size < 1 or self.size % 2 == 0:
            raise ValueError("patch size must be odd")
        object.__setattr__(self, "center", (int(self.center[0]), int(self.center[1])))


@dataclass(frozen=True)
class TrajectoryFrame:
    index: int
    pose: Pose


@dataclass(frozen=True)
class ScaleEstimate:
    alpha: float
    count: int

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"scale must be finite and positive, got {self.alpha}")
        if self.count < 1:
            raise ValueError("a scale estimate needs at least one ratio")


@dataclass(frozen=True)
class SimulatedVOConfig:
    hidden_scale: float = 1.0
    patch_count: int = DEFAULT_PATCH_COUNT
    patch_size: int = DEFAULT_PATCH_SIZE
    translation_sigma: float = 0.0  # m, per frame
    rotation_sigma: float = 0.0  # rad, per frame
    patch_depth_sigma: float = 0.0  # multiplicative
    seed: int = 0
    # "white": independent error on every frame; "walk": the per-frame
    # errors accumulate into drift
    noise_model: str = "white"

    def __post_init__(self):
        if not self.hidden_scale > 0:
            raise ValueError("hidden_scale must be positive")
        if self.patch_count < 1:
            raise ValueError("patch_count must be at least 1")
        if self.noise_model not in ("white", "walk"):
            raise ValueError(f"unknown noise model {self.noise_model!r}")


def simulate_vo(true_trajectory, d0: DepthMap, cfg: SimulatedVOConfig):
    """Emit an up-to-scale trajectory and first-frame patches.

    ``true_trajectory`` is a sequence of camera-to-world poses whose first
    element took the image behind ``d0``. Output poses are relative to that
    first camera; translations are divided by ``cfg.hidden_scale`` after
    adding metric noise (the first frame stays exact), and patch depths are
    true depths divided by the same factor.
    """
    traj = list(true_trajectory)
    if not traj:
        raise ValueError("trajectory is empty")
    v, u = np.nonzero(d0.hit)
    if len(u) == 0:
        raise EmptyCloudError("depth map has no hit pixels")

    rng = np.random.default_rng(cfg.seed)
    k = min(cfg.patch_count, len(u))
    pick = rng.choice(len(u), size=k, replace=False)
    depth_noise = rng.normal(0.0, cfg.patch_depth_sigma, size=k) if cfg.patch_depth_sigma else np.zeros(k)
    patches = []
    for j, eps in zip(pick, depth_noise):
        d = d0.values[v[j], u[j]] / cfg.hidden_scale
        patches.append(Patch((u[j], v[j]), cfg.patch_size, d * max(1.0 + eps, 1e-6)))

    n = len(traj)
    t_noise = np.zeros((n, 3))
    r_noise = np.zeros((n, 3))
    if cfg.translation_sigma:
        t_noise[1:] = rng.normal(0.0, cfg.translation_sigma, size=(n - 1, 3))
    if cfg.rotation_sigma:
        r_noise[1:] = rng.normal(0.0, cfg.rotation_sigma, size=(n - 1, 3))
    if cfg.noise_model == "walk":
        t_noise = np.cumsum(t_noise, axis=0)
        r_noise = np.cumsum(r_noise, axis=0)

    first_inv = inverse(traj[0])
    frames = []
    for i, T in enumerate(traj):
        rel = first_inv @ T
        R = rel.rotation @ exp_axisangle(r_noise[i]) if cfg.rotation_sigma else rel.rotation
        t = (rel.translation + t_noise[i]) / cfg.hidden_scale
        frames.append(TrajectoryFrame(i, Pose(R, t)))
    return frames, patches


def estimate_scale(d0: DepthMap, patches) -> ScaleEstimate:
    """Median of dense-depth / patch-depth ratios at the patch centers.

    Patches whose center has no dense depth are skipped. With an even number
    of usable ratios the two middle values are averaged.
    """
    ratios = []
    for p in patches:
        u, v = p.center
        if not (0 <= u < d0.width and 0 <= v < d0.height):
            continue
        dense = d0.values[v, u]
        if np.isfinite(dense):
            ratios.append(dense / p.depth)
    if not ratios:
        raise ScaleUnavailableError("no patch center has a valid dense depth")
    return ScaleEstimate(float(np.median(ratios)), len(ratios))


def apply_scale(frames, s: ScaleEstimate):
    return [replace(f, pose=Pose(f.pose.rotation, s.alpha * f.pose.translation)) for f in frames]

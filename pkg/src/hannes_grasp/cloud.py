"""Point clouds from depth maps and depth-weighted downsampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyCloudError
from .geom import CameraIntrinsics
from .scene import DepthMap

DEFAULT_N_POINTS = 4096


@dataclass(frozen=True)
class PointCloud:
    """Camera-frame points with the ``(u, v)`` pixel each one came from."""

    points: np.ndarray
    pixels: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 3)
        pix = np.asarray(self.pixels, dtype=np.int64).reshape(-1, 2)
        if len(pts) != len(pix):
            raise ValueError("points and pixels differ in length")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "pixels", pix)

    def __len__(self):
        return len(self.points)

    def subset(self, idx) -> PointCloud:
        return PointCloud(self.points[idx], self.pixels[idx])


@dataclass(frozen=True)
class SamplingWeights:
    """Probability per hit pixel, aligned with :func:`build_cloud` ordering."""

    pixels: np.ndarray
    p: np.ndarray


def _hit_pixels(d: DepthMap) -> np.ndarray:
    v, u = np.nonzero(d.hit)  # row-major order
    return np.stack([u, v], axis=1)


def build_cloud(d: DepthMap, K: CameraIntrinsics) -> PointCloud:
    """Un-project every hit pixel; no-hit pixels are skipped."""
    pix = _hit_pixels(d)
    u = pix[:, 0].astype(float)
    v = pix[:, 1].astype(float)
    z = d.values[pix[:, 1], pix[:, 0]]
    pts = np.stack([(u - K.cx) / K.fx * z, (v - K.cy) / K.fy * z, z], axis=1)
    return PointCloud(pts, pix)


def depth_weights(d: DepthMap) -> SamplingWeights:
    """softmax(1/depth) over all hit pixels, so closer pixels are favoured."""
    pix = _hit_pixels(d)
    if len(pix) == 0:
        raise EmptyCloudError("depth map has no hit pixels")
    logits = 1.0 / d.values[pix[:, 1], pix[:, 0]]
    e = np.exp(logits - logits.max())
    return SamplingWeights(pix, e / e.sum())


def downsample(cloud: PointCloud, weights: SamplingWeights, n: int = DEFAULT_N_POINTS,
               seed: int = 0) -> PointCloud:
    """Draw ``n`` points without replacement with probability ``weights.p``.

    Selected points keep their original cloud order. When the cloud has at
    most ``n`` points it is returned unchanged.
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if len(cloud) != len(weights.p):
        raise ValueError("weights do not match the cloud")
    if len(cloud) <= n:
        return cloud
    rng = np.random.default_rng(seed)
    # successive weighted draws, renormalizing over the remaining points
    idx = rng.choice(len(cloud), size=n, replace=False, p=weights.p)
    return cloud.subset(np.sort(idx))

"""Primitive scenes and analytic ray-cast depth rendering.

The renderer is the stand-in for a learned monocular depth estimator: it
produces exact metric depth, and :func:`perturb_depth` adds multiplicative
estimation error on top.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geom import CameraIntrinsics, Pose

KINDS = ("sphere", "cylinder", "box", "plane")
_N_DIMS = {"sphere": 1, "cylinder": 2, "box": 3, "plane": 0}
_EPS = 1e-12


@dataclass(frozen=True)
class Primitive:
    """A solid shape posed in the world.

    ``dimensions`` by kind: sphere ``(radius,)``; cylinder ``(radius, height)``
    with the axis along local y; box ``(hx, hy, hz)`` half-extents; plane
    ``()`` with normal along local z through the origin.
    """

    kind: str
    pose: Pose = field(default_factory=Pose)
    dimensions: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown primitive kind {self.kind!r}")
        dims = tuple(float(x) for x in self.dimensions)
        if len(dims) != _N_DIMS[self.kind]:
            raise ValueError(f"{self.kind} takes {_N_DIMS[self.kind]} dimensions, got {len(dims)}")
        if any(not (x > 0 and np.isfinite(x)) for x in dims):
            raise ValueError("dimensions must be positive")
        object.__setattr__(self, "dimensions", dims)

    def transformed(self, T: Pose) -> Primitive:
        return Primitive(self.kind, T @ self.pose, self.dimensions, self.name)

    def signed_distance(self, points) -> np.ndarray:
        """Signed distance of world points to the surface (negative inside)."""
        p = np.atleast_2d(np.asarray(points, dtype=float))
        q = (p - self.pose.translation) @ self.pose.rotation
        if self.kind == "sphere":
            return np.linalg.norm(q, axis=1) - self.dimensions[0]
        if self.kind == "plane":
            return q[:, 2]
        if self.kind == "cylinder":
            r, h = self.dimensions
            d = np.stack([np.hypot(q[:, 0], q[:, 2]) - r, np.abs(q[:, 1]) - h / 2], axis=1)
        else:
            d = np.abs(q) - np.asarray(self.dimensions)
        outside = np.linalg.norm(np.maximum(d, 0.0), axis=1)
        return outside + np.minimum(d.max(axis=1), 0.0)


@dataclass(frozen=True)
class Scene:
    primitives: tuple
    intrinsics: CameraIntrinsics = field(default_factory=CameraIntrinsics)

    def __post_init__(self):
        prims = tuple(self.primitives)
        if not prims:
            raise ValueError("a scene needs at least one primitive")
        object.__setattr__(self, "primitives", prims)

    def transformed(self, T: Pose) -> Scene:
        return Scene(tuple(p.transformed(T) for p in self.primitives), self.intrinsics)


@dataclass(frozen=True)
class DepthMap:
    """Per-pixel metric depth, indexed ``values[v, u]``; NaN marks no hit."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2:
            raise ValueError("depth map must be 2-D")
        hit = np.isfinite(vals)
        if np.any(vals[hit] <= 0):
            raise ValueError("hit depths must be positive")
        vals[~hit] = np.nan
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def hit(self) -> np.ndarray:
        return np.isfinite(self.values)

    def at(self, u: int, v: int) -> float:
        """Depth at pixel (u, v), NaN when no hit."""
        return float(self.values[v, u])


@dataclass(frozen=True)
class DepthNoiseModel:
    sigma: float = 0.02
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise ValueError("sigma must be non-negative")


def _quadratic_entries(a, b, c):
    disc = b * b - 4 * a * c
    ok = disc >= 0
    sq = np.sqrt(np.where(ok, disc, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t1 = (-b - sq) / (2 * a)
        t2 = (-b + sq) / (2 * a)
    t1 = np.where(ok, t1, np.inf)
    t2 = np.where(ok, t2, np.inf)
    return t1, t2


def _nearest_positive(*candidates):
    t = np.full(np.shape(candidates[0]), np.inf)
    for c in candidates:
        c = np.where(np.isfinite(c) & (c > _EPS), c, np.inf)
        t = np.minimum(t, c)
    return t


def intersect(prim: Primitive, origin, dirs) -> np.ndarray:
    """Ray parameter of the first hit of ``origin + t * dirs`` (world frame).

    ``dirs`` is ``(N, 3)`` and need not be normalized; misses give ``inf``.
    """
    R, p = prim.pose.rotation, prim.pose.translation
    o = (np.asarray(origin, dtype=float) - p) @ R
    d = np.asarray(dirs, dtype=float) @ R
    ox, oy, oz = o
    dx, dy, dz = d[:, 0], d[:, 1], d[:, 2]

    with np.errstate(divide="ignore", invalid="ignore"):
        if prim.kind == "sphere":
            r = prim.dimensions[0]
            a = np.einsum("ij,ij->i", d, d)
            t1, t2 = _quadratic_entries(a, 2 * d @ o, o @ o - r * r)
            return _nearest_positive(t1, t2)

        if prim.kind == "plane":
            return _nearest_positive(-oz / dz)

        if prim.kind == "cylinder":
            r, h = prim.dimensions
            hh = h / 2
            a = dx * dx + dz * dz
            t1, t2 = _quadratic_entries(a, 2 * (ox * dx + oz * dz), ox * ox + oz * oz - r * r)
            side = [np.where(np.abs(oy + t * dy) <= hh, t, np.inf) for t in (t1, t2)]
            caps = []
            for y0 in (-hh, hh):
                t = (y0 - oy) / dy
                inside = (ox + t * dx) ** 2 + (oz + t * dz) ** 2 <= r * r
                caps.append(np.where(inside, t, np.inf))
            return _nearest_positive(*side, *caps)

        # box: slab test
        half = np.asarray(prim.dimensions)
        lo = (-half - o) / d
        hi = (half - o) / d
        # a zero direction component inside the slab yields nan; treat as unbounded
        parallel = d == 0
        inside = np.abs(o) <= half
        lo = np.where(parallel, np.where(inside, -np.inf, np.inf), lo)
        hi = np.where(parallel, np.where(inside, np.inf, -np.inf), hi)
        t_near = np.minimum(lo, hi).max(axis=1)
        t_far = np.maximum(lo, hi).min(axis=1)
        ok = t_near <= t_far
        return _nearest_positive(np.where(ok, t_near, np.inf), np.where(ok, t_far, np.inf))


def pixel_rays(K: CameraIntrinsics) -> np.ndarray:
    """Camera-frame ray directions with unit z, shape ``(H, W, 3)``."""
    u, v = np.meshgrid(np.arange(K.width, dtype=float), np.arange(K.height, dtype=float))
    return np.stack([(u - K.cx) / K.fx, (v - K.cy) / K.fy, np.ones_like(u)], axis=-1)


def render_depth(scene: Scene, camera_pose: Pose) -> DepthMap:
    """Depth (camera z) of the nearest surface along every pixel ray.

    ``camera_pose`` maps camera coordinates to world coordinates.
    """
    K = scene.intrinsics
    rays = pixel_rays(K).reshape(-1, 3)
    dirs = rays @ camera_pose.rotation.T
    t = np.full(len(dirs), np.inf)
    for prim in scene.primitives:
        t = np.minimum(t, intersect(prim, camera_pose.translation, dirs))
    # rays have unit camera-z, so the ray parameter is the depth
    t[~np.isfinite(t)] = np.nan
    return DepthMap(t.reshape(K.height, K.width))


def perturb_depth(d: DepthMap, model: DepthNoiseModel) -> DepthMap:
    if model.sigma == 0:
        return DepthMap(d.values)
    rng = np.random.default_rng(model.seed)
    factors = rng.normal(1.0, model.sigma, size=d.values.shape)
    # keep hit depths positive under very large sigma
    factors = np.maximum(factors, 1e-6)
    return DepthMap(d.values * factors)

"""Parallel-jaw grasp parameterization and an analytic antipodal sampler.

A candidate is a contact point ``c``, an approach direction ``a`` and a
baseline ``b`` pointing from ``c`` toward the opposing contact, plus the
jaw opening ``width``. The sampler works directly on scene primitives and
emits candidates in the frame of the camera that took the first image.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import Pose, inverse
from .scene import Scene

DEFAULT_MAX_APERTURE = 0.09
DEFAULT_PER_OBJECT = 8


def _vec(x) -> np.ndarray:
    a = np.array(x, dtype=float).reshape(3)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GraspCandidate:
    contact: np.ndarray
    approach: np.ndarray
    baseline: np.ndarray
    width: float
    feasible: bool = True
    object_index: int = -1

    def __post_init__(self):
        a, b = _vec(self.approach), _vec(self.baseline)
        if abs(np.linalg.norm(a) - 1) > 1e-9 or abs(np.linalg.norm(b) - 1) > 1e-9:
            raise ValueError("approach and baseline must be unit vectors")
        if abs(a @ b) > 1e-9:
            raise ValueError("approach and baseline must be orthogonal")
        if not self.width >= 0:
            raise ValueError("width must be non-negative")
        object.__setattr__(self, "contact", _vec(self.contact))
        object.__setattr__(self, "approach", a)
        object.__setattr__(self, "baseline", b)
        object.__setattr__(self, "width", float(self.width))

    def transformed(self, T: Pose) -> GraspCandidate:
        R = T.rotation
        return GraspCandidate(T.apply(self.contact), R @ self.approach, R @ self.baseline,
                              self.width, self.feasible, self.object_index)


@dataclass(frozen=True)
class GraspSet:
    candidates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "candidates", tuple(self.candidates))

    def __len__(self):
        return len(self.candidates)

    def __iter__(self):
        return iter(self.candidates)

    def __getitem__(self, i) -> GraspCandidate:
        return self.candidates[i]

    def midpoints(self) -> np.ndarray:
        return np.array([gripper_midpoint(g) for g in self.candidates]).reshape(-1, 3)


def grasp_rotation(g: GraspCandidate) -> np.ndarray:
    """Gripper frame with baseline as x and approach as z."""
    a, b = g.approach, g.baseline
    return np.column_stack([b, np.cross(a, b), a])


def gripper_midpoint(g: GraspCandidate) -> np.ndarray:
    """Point halfway between the two fingertip contacts."""
    return g.contact + 0.5 * g.width * g.baseline


def _unit(v) -> np.ndarray:
    return v / np.linalg.norm(v)


def _perp(v, b):
    """Component of ``v`` orthogonal to unit ``b``, normalized (None if degenerate)."""
    w = v - (v @ b) * b
    n = np.linalg.norm(w)
    return w / n if n > 1e-9 else None


def _axis_rotate(v, axis, angle):
    # Rodrigues rotation of v about unit axis
    return (v * np.cos(angle) + np.cross(axis, v) * np.sin(angle)
            + axis * (axis @ v) * (1 - np.cos(angle)))


def _antipodal(p1, p2, cam):
    """Visible contact (nearer the camera), baseline toward the other, width."""
    # equidistant contacts (baseline across the line of sight) keep p1, so
    # rounding cannot flip the choice
    if np.linalg.norm(p2 - cam) < np.linalg.norm(p1 - cam) - 1e-9:
        p1, p2 = p2, p1
    w = np.linalg.norm(p2 - p1)
    return p1, (p2 - p1) / w, w


def _sphere_grasp(r, cam, rng):
    view = _unit(-cam)
    u = rng.normal(size=3)
    b_dir = _perp(u, view)
    if b_dir is None:
        b_dir = _perp(np.roll(np.abs(view), 1), view)
    c, b, w = _antipodal(r * b_dir, -r * b_dir, cam)
    return c, view, b, w


def _cylinder_grasp(r, h, cam, rng):
    axis = np.array([0.0, 1.0, 0.0])
    y = rng.uniform(-0.25 * h, 0.25 * h)
    jitter = rng.uniform(-np.pi / 6, np.pi / 6)
    mid = np.array([0.0, y, 0.0])
    view = _unit(mid - cam)
    n0 = np.cross(axis, view)
    n0 = _unit(n0) if np.linalg.norm(n0) > 1e-9 else np.array([1.0, 0.0, 0.0])
    b_dir = _axis_rotate(n0, axis, jitter)
    c, b, w = _antipodal(mid + r * b_dir, mid - r * b_dir, cam)
    a = _perp(view, b)
    if a is None:
        a = axis
    return c, a, b, w


def _box_grasp(half, cam, rng):
    view_c = _unit(-cam)
    eligible = [k for k in range(3) if abs(view_c[k]) < 0.9] or [0, 1, 2]
    k = int(rng.choice(eligible))
    offset = rng.uniform(-0.5, 0.5, size=3) * half
    mid = offset.copy()
    mid[k] = 0.0
    e = np.zeros(3)
    e[k] = half[k]
    c, b, w = _antipodal(mid + e, mid - e, cam)
    a = _perp(_unit(mid - cam), b)
    if a is None:
        a = np.roll(np.abs(b), 1)
    return c, a, b, w


def sample_grasps(scene: Scene, camera_pose: Pose, max_aperture: float = DEFAULT_MAX_APERTURE,
                  per_object: int = DEFAULT_PER_OBJECT, seed: int = 0) -> GraspSet:
    """Antipodal candidates on every non-plane primitive, in the camera frame.

    Candidates wider than ``max_aperture`` are kept and marked infeasible.
    All random choices are made relative to the object and the camera, so a
    rigid motion applied to both leaves the output unchanged.
    """
    if per_object < 1:
        raise ValueError("per_object must be at least 1")
    rng = np.random.default_rng(seed)
    world_to_cam = inverse(camera_pose)
    out = []
    for i, prim in enumerate(scene.primitives):
        if prim.kind == "plane":
            continue
        obj_to_cam = world_to_cam @ prim.pose
        cam = inverse(prim.pose).apply(camera_pose.translation)
        for _ in range(per_object):
            if prim.kind == "sphere":
                c, a, b, w = _sphere_grasp(prim.dimensions[0], cam, rng)
            elif prim.kind == "cylinder":
                c, a, b, w = _cylinder_grasp(*prim.dimensions, cam, rng)
            else:
                c, a, b, w = _box_grasp(np.asarray(prim.dimensions), cam, rng)
            g = GraspCandidate(c, a, b, w, bool(w <= max_aperture), i)
            out.append(g.transformed(obj_to_cam))
    return GraspSet(out)

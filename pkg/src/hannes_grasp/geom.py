"""Rigid transforms, rotations and pinhole camera primitives.

Rotations are plain ``(3, 3)`` float arrays. Poses map points from their own
frame into the parent frame: ``x_parent = R @ x_local + t``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BehindCameraError, InvalidDepthError

_SMALL_ANGLE = 1e-6


def hat(v) -> np.ndarray:
    x, y, z = v
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def exp_axisangle(v) -> np.ndarray:
    """Rodrigues formula: rotation vector (radians * unit axis) to matrix."""
    v = np.asarray(v, dtype=float)
    theta = float(np.linalg.norm(v))
    K = hat(v)
    if theta < _SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / (theta * theta)
    return np.eye(3) + a * K + b * (K @ K)


def _canonical_sign(n: np.ndarray) -> np.ndarray:
    # half-turn: n and -n are the same rotation; keep the one whose first
    # nonzero component is positive
    for x in n:
        if abs(x) > 1e-12:
            return n if x > 0 else -n
    return n


def axisangle(R) -> np.ndarray:
    """Inverse of :func:`exp_axisangle`, returning a vector with norm in [0, pi]."""
    R = np.asarray(R, dtype=float)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    s = 0.5 * np.linalg.norm(w)
    c = 0.5 * (np.trace(R) - 1.0)
    theta = float(np.arctan2(s, c))
    if theta < _SMALL_ANGLE:
        return 0.5 * w * (1.0 + theta * theta / 6.0)
    if c >= 0.0:
        return theta * w / (2.0 * s)
    # obtuse angles: the symmetric part (R + R^T)/2 - cI = (1 - c) n n^T is
    # well conditioned, while w/(2s) loses precision as s -> 0
    B = 0.5 * (R + R.T) - c * np.eye(3)
    i = int(np.argmax(np.diag(B)))
    n = B[:, i] / np.linalg.norm(B[:, i])
    if s > 1e-12:
        if np.dot(n, w) < 0:
            n = -n
    else:
        n = _canonical_sign(n)
    return theta * n


def orthonormalize(R) -> np.ndarray:
    """Nearest rotation matrix (polar decomposition via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def is_rotation(R, tol: float = 1e-9) -> bool:
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        return False
    return bool(np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0)
                and abs(np.linalg.det(R) - 1.0) <= tol)


def angle_between(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    # atan2 form stays accurate for nearly parallel vectors
    return float(np.arctan2(np.linalg.norm(np.cross(u, v)), np.dot(u, v)))


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Pose:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = _frozen(self.rotation)
        t = _frozen(self.translation).reshape(3)
        if R.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {R.shape}")
        if not np.all(np.isfinite(t)):
            raise ValueError("translation must be finite")
        if not is_rotation(R, 1e-7):
            R = _frozen(orthonormalize(R))
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> Pose:
        return cls()

    @classmethod
    def from_axisangle(cls, translation, rotvec) -> Pose:
        return cls(exp_axisangle(rotvec), translation)

    @property
    def position(self) -> np.ndarray:
        return self.translation

    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    def apply(self, points) -> np.ndarray:
        """Map points (``(3,)`` or ``(N, 3)``) from this frame to the parent."""
        p = np.asarray(points, dtype=float)
        return p @ self.rotation.T + self.translation

    def __matmul__(self, other: Pose) -> Pose:
        return compose(self, other)

    def __eq__(self, other):
        if not isinstance(other, Pose):
            return NotImplemented
        return (np.array_equal(self.rotation, other.rotation)
                and np.array_equal(self.translation, other.translation))

    __hash__ = None


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(a: Pose) -> Pose:
    Rt = a.rotation.T
    return Pose(Rt, -Rt @ a.translation)


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float = 250.0
    fy: float = 250.0
    cx: float = 160.0
    cy: float = 120.0
    width: int = 320
    height: int = 240

    def __post_init__(self):
        if not (self.fx > 0 and self.fy > 0):
            raise ValueError("focal lengths must be positive")
        if not (0 <= self.cx < self.width and 0 <= self.cy < self.height):
            raise ValueError("principal point outside the image")

    @property
    def K(self) -> np.ndarray:
        return np.array([[self.fx, 0.0, self.cx], [0.0, self.fy, self.cy], [0.0, 0.0, 1.0]])

    def contains(self, u: float, v: float) -> bool:
        return 0 <= u < self.width and 0 <= v < self.height


def unproject(pixel, depth: float, K: CameraIntrinsics) -> np.ndarray:
    u, v = pixel
    if not np.isfinite(depth) or depth <= 0:
        raise InvalidDepthError(f"depth must be positive and finite, got {depth}")
    if not K.contains(u, v):
        raise ValueError(f"pixel ({u}, {v}) outside {K.width}x{K.height} image")
    return np.array([(u - K.cx) / K.fx * depth, (v - K.cy) / K.fy * depth, depth])


def project(point, K: CameraIntrinsics) -> tuple[float, float, float]:
    x, y, z = np.asarray(point, dtype=float)
    if not z > 0:
        raise BehindCameraError(f"point has z={z}, must be in front of the camera")
    return (K.fx * x / z + K.cx, K.fy * y / z + K.cy, float(z))

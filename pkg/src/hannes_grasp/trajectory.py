"""Approach-path generators standing in for a user's reach toward an object."""

from __future__ import annotations

import numpy as np

from .geom import Pose, axisangle, exp_axisangle

DEFAULT_RATE = 30.0


def look_at(position, target, up=(0.0, -1.0, 0.0)) -> np.ndarray:
    """Camera rotation with optical axis (z) pointing from position to target."""
    z = np.asarray(target, dtype=float) - np.asarray(position, dtype=float)
    z /= np.linalg.norm(z)
    up = np.asarray(up, dtype=float)
    x = np.cross(-up, z)
    if np.linalg.norm(x) < 1e-9:
        x = np.cross([1.0, 0.0, 0.0], z) if abs(z[0]) < 0.9 else np.cross([0.0, 1.0, 0.0], z)
    x /= np.linalg.norm(x)
    return np.column_stack([x, np.cross(z, x), z])


def slerp(R0, R1, s: float) -> np.ndarray:
    return R0 @ exp_axisangle(s * axisangle(R0.T @ R1))


def _timed(positions, rotations, rate, t0):
    return [(t0 + i / rate, Pose(R, p)) for i, (p, R) in enumerate(zip(positions, rotations))]


def _rotations(start_R, end_R, n, settle_index):
    if end_R is None:
        return [start_R] * n
    settle = n - 1 if settle_index is None else max(1, min(settle_index, n - 1))
    return [slerp(start_R, end_R, min(i / settle, 1.0)) for i in range(n)]


def straight_line(start: Pose, goal, speed: float, rate: float = DEFAULT_RATE, t0: float = 0.0,
                  end_rotation=None, settle_index=None):
    """Constant-speed straight path from ``start`` to position ``goal``.

    The orientation turns from the start rotation to ``end_rotation`` and
    holds it from frame ``settle_index`` on (default: the last frame).
    Returns a list of ``(time, Pose)``.
    """
    if not speed > 0:
        raise ValueError("speed must be positive")
    p0 = start.translation
    p1 = np.asarray(goal, dtype=float)
    n = max(2, int(np.ceil(np.linalg.norm(p1 - p0) * rate / speed)) + 1)
    s = np.linspace(0.0, 1.0, n)
    positions = p0 + s[:, None] * (p1 - p0)
    return _timed(positions, _rotations(start.rotation, end_rotation, n, settle_index), rate, t0)


def arc(start: Pose, goal, speed: float, bulge, rate: float = DEFAULT_RATE, t0: float = 0.0,
        end_rotation=None, settle_index=None):
    """Quadratic-Bezier path bowing out by the ``bulge`` offset vector at mid-way."""
    p0 = start.translation
    p1 = np.asarray(goal, dtype=float)
    ctrl = 0.5 * (p0 + p1) + 2.0 * np.asarray(bulge, dtype=float)
    # resample by arc length so the speed stays constant
    fine = np.linspace(0.0, 1.0, 2001)[:, None]
    curve = (1 - fine) ** 2 * p0 + 2 * (1 - fine) * fine * ctrl + fine ** 2 * p1
    seg = np.linalg.norm(np.diff(curve, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    n = max(2, int(np.ceil(cum[-1] * rate / speed)) + 1)
    targets = np.linspace(0.0, cum[-1], n)
    positions = np.stack([np.interp(targets, cum, curve[:, k]) for k in range(3)], axis=1)
    return _timed(positions, _rotations(start.rotation, end_rotation, n, settle_index), rate, t0)

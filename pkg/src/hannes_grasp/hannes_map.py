"""Mapping a parallel-jaw grasp candidate onto the prosthesis preshape.

The preshape is the triplet (pronation-supination, flexion-extension,
finger opening). The opening is the gripper width scaled to the finger
range. The two wrist angles come from a closed-loop resolved-rate
iteration that drives the x and z components of the camera orientation
error to zero through the camera-frame wrist Jacobian.

Wrist model: two revolute joints at a common origin, pronation-supination
about ``wps_axis`` followed by flexion-extension about ``wfe_axis`` (both in
the forearm frame at home), with the camera fixed in the palm by
``camera_in_palm``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import JointLimitError, NumericalFailureError
from .geom import Pose, axisangle, exp_axisangle, hat, inverse, rot_y, rot_z
from .grasp import DEFAULT_MAX_APERTURE, GraspCandidate, grasp_rotation

_ERR_ROWS = (0, 2)  # camera-frame x and z


@dataclass(frozen=True)
class PreshapeConfig:
    wps: float
    wfe: float
    lf: float
    over_aperture: bool = False

    @property
    def q(self) -> np.ndarray:
        return np.array([self.wps, self.wfe])


@dataclass(frozen=True)
class WristModel:
    wps_axis: tuple = (0.0, 0.0, 1.0)
    wfe_axis: tuple = (1.0, 0.0, 0.0)
    camera_in_palm: Pose = field(default_factory=Pose)
    wps_limits: tuple = (-np.pi / 2, np.pi / 2)
    wfe_limits: tuple = (-np.pi / 4, np.pi / 4)
    finger_close_dir: tuple = (0.0, 1.0, 0.0)
    gamma: float = -np.pi / 2
    beta: float = -np.pi / 4
    max_aperture: float = DEFAULT_MAX_APERTURE

    def __post_init__(self):
        for name in ("wps_axis", "wfe_axis", "finger_close_dir"):
            v = np.asarray(getattr(self, name), dtype=float)
            if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-9:
                raise ValueError(f"{name} must be a unit 3-vector")
            object.__setattr__(self, name, tuple(float(x) for x in v))
        for name in ("wps_limits", "wfe_limits"):
            lo, hi = getattr(self, name)
            if not lo < hi:
                raise ValueError(f"{name}: min must be below max")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if not self.max_aperture > 0:
            raise ValueError("max_aperture must be positive")

    @property
    def lower(self) -> np.ndarray:
        return np.array([self.wps_limits[0], self.wfe_limits[0]])

    @property
    def upper(self) -> np.ndarray:
        return np.array([self.wps_limits[1], self.wfe_limits[1]])

    def within_limits(self, q, tol: float = 1e-12) -> bool:
        q = np.asarray(q, dtype=float)
        return bool(np.all(q >= self.lower - tol) and np.all(q <= self.upper + tol))

    def home_offset(self) -> np.ndarray:
        """Rotation turning an identity gripper into the hand's home pose."""
        return rot_z(self.gamma) @ rot_y(self.beta)


@dataclass(frozen=True)
class IKSettings:
    gain: float = 0.5
    max_steps: int = 100
    error_threshold: float = 1e-3
    damping: float = 1e-6

    def __post_init__(self):
        if not self.gain > 0:
            raise ValueError("gain must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be at least 1")


@dataclass(frozen=True)
class IKResult:
    q: np.ndarray
    error: np.ndarray
    steps: int
    converged: bool


def width_to_lf(width: float, max_aperture: float = DEFAULT_MAX_APERTURE) -> tuple[float, bool]:
    """Finger opening fraction (1 = fully open) and an over-aperture flag."""
    if width < 0:
        raise ValueError("width must be non-negative")
    ratio = width / max_aperture
    return float(min(max(ratio, 0.0), 1.0)), bool(ratio > 1.0)


def desired_camera_rotation(Rg, Rc_last, model: WristModel) -> np.ndarray:
    return np.asarray(Rc_last).T @ np.asarray(Rg) @ model.home_offset()


def _palm_rotation(q, model: WristModel) -> np.ndarray:
    w1 = np.asarray(model.wps_axis)
    w2 = np.asarray(model.wfe_axis)
    return exp_axisangle(q[0] * w1) @ exp_axisangle(q[1] * w2)


def camera_rotation(q, model: WristModel) -> np.ndarray:
    """Camera orientation in the forearm frame; no limit check."""
    return _palm_rotation(q, model) @ model.camera_in_palm.rotation


def wrist_fk(q, model: WristModel) -> Pose:
    """Camera pose in the forearm frame at joint angles ``q``."""
    q = np.asarray(q, dtype=float)
    if not model.within_limits(q):
        raise JointLimitError(f"q={q} outside joint limits")
    return Pose(_palm_rotation(q, model)) @ model.camera_in_palm


def palm_jacobian(q, model: WristModel) -> np.ndarray:
    """6x2 body Jacobian of the palm, rows (v, omega) in the palm frame."""
    w1 = np.asarray(model.wps_axis)
    w2 = np.asarray(model.wfe_axis)
    J = np.zeros((6, 2))
    # joints share the palm origin, so the linear part vanishes
    J[3:, 0] = exp_axisangle(q[1] * w2).T @ w1
    J[3:, 1] = w2
    return J


def adjoint(T: Pose) -> np.ndarray:
    """6x6 twist transform for (v, omega) ordering."""
    R, p = T.rotation, T.translation
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[:3, 3:] = hat(p) @ R
    Ad[3:, 3:] = R
    return Ad


def camera_frame_jacobian(q, model: WristModel) -> np.ndarray:
    """Map from joint rates to camera-frame angular rates about x and z."""
    q = np.asarray(q, dtype=float)
    J = adjoint(inverse(model.camera_in_palm)) @ palm_jacobian(q, model)
    return J[[3 + r for r in _ERR_ROWS], :]


def _error(Rg, Rc_last, R_home_cam, q, model):
    Rc = Rc_last @ R_home_cam.T @ camera_rotation(q, model)
    return axisangle(desired_camera_rotation(Rg, Rc, model))[list(_ERR_ROWS)]


def solve_wrist(Rg, Rc_last, model: WristModel, settings: IKSettings = IKSettings(),
                q0=None) -> IKResult:
    """Iterate ``q += gain * pinv(J) @ e`` until ``|e|`` drops below threshold.

    ``Rc_last`` is the camera orientation observed while the wrist sat at
    ``q0``; the error is recomputed at every step from the camera
    orientation the current ``q`` would produce.
    """
    q = np.zeros(2) if q0 is None else np.array(q0, dtype=float)
    if not model.within_limits(q):
        raise JointLimitError(f"q0={q} outside joint limits")
    Rg = np.asarray(Rg, dtype=float)
    Rc_last = np.asarray(Rc_last, dtype=float)
    R_home_cam = camera_rotation(q, model)
    mu = settings.damping * np.eye(2)

    for step in range(settings.max_steps + 1):
        e = _error(Rg, Rc_last, R_home_cam, q, model)
        if not np.all(np.isfinite(e)) or not np.all(np.isfinite(q)):
            raise NumericalFailureError(f"non-finite state at step {step}")
        if np.linalg.norm(e) < settings.error_threshold:
            return IKResult(q, e, step, True)
        if step == settings.max_steps:
            break
        J = camera_frame_jacobian(q, model)
        dq = settings.gain * np.linalg.solve(J.T @ J + mu, J.T @ e)
        q = np.clip(q + dq, model.lower, model.upper)
    return IKResult(q, e, settings.max_steps, False)


def hand_approach_axis(R_cam, model: WristModel) -> np.ndarray:
    """Direction the hand would advance along, given the camera orientation.

    At a perfect mapping this equals the candidate approach vector.
    """
    return np.asarray(R_cam) @ model.home_offset().T @ np.array([0.0, 0.0, 1.0])


def map_candidate(g: GraspCandidate, Rc_last, model: WristModel,
                  settings: IKSettings = IKSettings(), q0=None):
    """Return ``(PreshapeConfig, IKResult)`` for a candidate."""
    ik = solve_wrist(grasp_rotation(g), Rc_last, model, settings, q0)
    lf, over = width_to_lf(g.width, model.max_aperture)
    return PreshapeConfig(float(ik.q[0]), float(ik.q[1]), lf, over), ik

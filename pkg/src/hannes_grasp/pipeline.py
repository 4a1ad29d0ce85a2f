"""Episode orchestration: trigger, approach, grasp; plus GSR/AGT metrics.

One episode follows the shared-autonomy sequence. At the trigger the first
image is captured: its depth is estimated (rendered, then perturbed), a
point cloud is built and downsampled, grasp candidates are generated and
the odometry scale is fixed against the estimated depth. During the
approach every metric odometry frame is matched to the nearest candidate;
once it is within the distance threshold the odometry stops, the candidate
is mapped to a wrist/finger preshape, and the fingers close ``t_grasp``
seconds later.
"""

from __future__ import annotations

import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import errors
from .cloud import DEFAULT_N_POINTS, build_cloud, depth_weights, downsample
from .geom import Pose, angle_between, inverse
from .grasp import DEFAULT_PER_OBJECT, GraspCandidate, gripper_midpoint, sample_grasps
from .hannes_map import (IKResult, IKSettings, PreshapeConfig, WristModel, camera_rotation,
                         hand_approach_axis, map_candidate)
from .odom import SimulatedVOConfig, apply_scale, estimate_scale, simulate_vo
from .scene import DepthNoiseModel, Scene, intersect, perturb_depth, render_depth
from .select import DEFAULT_THRESHOLD, select_nearest

DEFAULT_T_GRASP = 2.0

# failure reasons
OVER_APERTURE = "over-aperture"
NOT_CONVERGED = "not-converged"
MISALIGNED = "misaligned"
NEVER_TRIGGERED = "never-triggered"
WIDTH_MISMATCH = "width-mismatch"

_ERROR_REASONS = {
    errors.EmptyCloudError: "empty-cloud",
    errors.ScaleUnavailableError: "scale-unavailable",
    errors.NoCandidatesError: "no-candidates",
    errors.NumericalFailureError: "numerical-failure",
    errors.JointLimitError: "joint-limit",
}


class Phase(enum.IntEnum):
    IDLE = 0
    TRIGGERED = 1
    APPROACHING = 2
    GRASPING = 3
    DONE = 4


@dataclass
class PipelineState:
    """Phase tracker; moves one phase forward at a time.

    The only shortcut is ending the episode (``DONE``) from any phase, used
    when the approach runs out of frames or a stage fails.
    """

    phase: Phase = Phase.IDLE
    frame: int = -1
    selection: object = None
    history: list = field(default_factory=lambda: [Phase.IDLE])

    def advance(self, phase: Phase):
        if phase != self.phase + 1 and not (phase == Phase.DONE and self.phase != Phase.DONE):
            raise RuntimeError(f"illegal transition {self.phase.name} -> {phase.name}")
        self.phase = phase
        self.history.append(phase)


@dataclass(frozen=True)
class SuccessCriteria:
    axis_tol: float = 0.05  # rad
    lf_tol: float = 0.1


@dataclass(frozen=True)
class PipelineSettings:
    threshold: float = DEFAULT_THRESHOLD
    t_grasp: float = DEFAULT_T_GRASP
    n_points: int = DEFAULT_N_POINTS
    per_object: int = DEFAULT_PER_OBJECT
    grasp_seed: int = 0
    sample_seed: int = 0
    ik: IKSettings = field(default_factory=IKSettings)
    success: SuccessCriteria = field(default_factory=SuccessCriteria)


@dataclass(frozen=True)
class EpisodeSpec:
    scene: Scene
    trajectory: tuple  # of (time, camera-to-world Pose)
    trigger_time: float = 0.0
    vo: SimulatedVOConfig = field(default_factory=SimulatedVOConfig)
    depth_noise: DepthNoiseModel = field(default_factory=lambda: DepthNoiseModel(0.0))
    settings: PipelineSettings = field(default_factory=PipelineSettings)
    wrist: WristModel = field(default_factory=WristModel)
    label: str = ""
    name: str = ""

    def __post_init__(self):
        traj = tuple((float(t), p) for t, p in self.trajectory)
        if not traj:
            raise ValueError("trajectory is empty")
        times = np.array([t for t, _ in traj])
        if np.any(np.diff(times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")
        if not times[0] <= self.trigger_time <= times[-1]:
            raise ValueError("trigger time outside the trajectory span")
        object.__setattr__(self, "trajectory", traj)

    @property
    def times(self) -> np.ndarray:
        return np.array([t for t, _ in self.trajectory])

    @property
    def poses(self) -> list:
        return [p for _, p in self.trajectory]

    def trigger_index(self) -> int:
        return int(np.searchsorted(self.times, self.trigger_time, side="left"))


@dataclass(frozen=True)
class EpisodeOutcome:
    success: bool
    failure_reason: str | None = None
    grasp_time: float | None = None
    selected: int | None = None
    candidate: GraspCandidate | None = None
    preshape: PreshapeConfig | None = None
    ik: IKResult | None = None
    trigger_frame: int | None = None  # index into the trajectory
    scale: float | None = None
    misalignment: float | None = None
    phases: tuple = ()
    label: str = ""
    name: str = ""

    def __post_init__(self):
        if self.success and self.failure_reason is not None:
            raise ValueError("a successful outcome carries no failure reason")


def graspable_width(scene_c0: Scene, g: GraspCandidate, reach: float = 1.0) -> float:
    """Chord length of the candidate's object along its baseline line.

    The line passes through the gripper midpoint; both crossings are found by
    casting rays inward from ``reach`` metres away on either side.
    """
    prim = scene_c0.primitives[g.object_index]
    mid = gripper_midpoint(g)
    b = g.baseline[None, :]
    t_in = intersect(prim, mid - reach * g.baseline, b)[0]
    t_out = intersect(prim, mid + reach * g.baseline, -b)[0]
    if not (np.isfinite(t_in) and np.isfinite(t_out)):
        return 0.0
    return float(2 * reach - t_in - t_out)


def evaluate_success(candidate: GraspCandidate, preshape: PreshapeConfig, ik: IKResult,
                     object_width: float, final_camera_rotation, model: WristModel,
                     criteria: SuccessCriteria = SuccessCriteria()):
    """Simulated grasp judgement.

    ``final_camera_rotation`` is the true camera orientation after the wrist
    moved, in the frame the candidate is expressed in. Returns
    ``(success, reason, misalignment)``; the checks run in order feasibility,
    convergence, hand alignment with the approach vector, finger opening.
    """
    axis = hand_approach_axis(final_camera_rotation, model)
    misalignment = angle_between(axis, candidate.approach)
    if not candidate.feasible or preshape.over_aperture:
        return False, OVER_APERTURE, misalignment
    if not ik.converged:
        return False, NOT_CONVERGED, misalignment
    if misalignment > criteria.axis_tol:
        return False, MISALIGNED, misalignment
    if abs(preshape.lf - object_width / model.max_aperture) > criteria.lf_tol:
        return False, WIDTH_MISMATCH, misalignment
    return True, None, misalignment


def run_episode(spec: EpisodeSpec) -> EpisodeOutcome:
    state = PipelineState()
    common = dict(label=spec.label, name=spec.name)
    cfg = spec.settings
    i0 = spec.trigger_index()
    poses = spec.poses
    times = spec.times
    cam0 = poses[i0]
    state.advance(Phase.TRIGGERED)
    state.frame = i0

    try:
        d_true = render_depth(spec.scene, cam0)
        d_est = perturb_depth(d_true, spec.depth_noise)
        cloud = build_cloud(d_est, spec.scene.intrinsics)
        downsample(cloud, depth_weights(d_est), cfg.n_points, cfg.sample_seed)
        grasps = sample_grasps(spec.scene, cam0, spec.wrist.max_aperture, cfg.per_object,
                               cfg.grasp_seed)
        if len(grasps) == 0:
            raise errors.NoCandidatesError("scene produced no grasp candidates")
        frames, patches = simulate_vo(poses[i0:], d_true, spec.vo)
        scale = estimate_scale(d_est, patches)
    except errors.GraspPipelineError as exc:
        state.advance(Phase.DONE)
        return EpisodeOutcome(False, _ERROR_REASONS.get(type(exc), "error"),
                              phases=tuple(state.history), **common)

    frames = apply_scale(frames, scale)
    state.advance(Phase.APPROACHING)
    sel = None
    for frame in frames[1:]:
        state.frame = i0 + frame.index
        sel = select_nearest(grasps, frame, cfg.threshold)
        state.selection = sel
        if sel.triggered:
            break
    if sel is None or not sel.triggered:
        state.advance(Phase.DONE)
        return EpisodeOutcome(False, NEVER_TRIGGERED, scale=scale.alpha,
                              phases=tuple(state.history), **common)

    # odometry stops here; the wrist moves open-loop, fingers close after t_grasp
    state.advance(Phase.GRASPING)
    j = state.frame
    g = grasps[sel.index]
    Rc_last = frames[j - i0].pose.rotation
    try:
        preshape, ik = map_candidate(g, Rc_last, spec.wrist, cfg.ik)
    except errors.GraspPipelineError as exc:
        state.advance(Phase.DONE)
        return EpisodeOutcome(False, _ERROR_REASONS.get(type(exc), "error"), selected=sel.index,
                              candidate=g, trigger_frame=j, scale=scale.alpha,
                              phases=tuple(state.history), **common)
    grasp_time = (times[j] - spec.trigger_time) + cfg.t_grasp

    true_rel = inverse(cam0) @ poses[j]
    home = camera_rotation(np.zeros(2), spec.wrist)
    R_final = true_rel.rotation @ home.T @ camera_rotation(ik.q, spec.wrist)
    width = graspable_width(spec.scene.transformed(inverse(cam0)), g)
    ok, reason, mis = evaluate_success(g, preshape, ik, width, R_final, spec.wrist, cfg.success)
    state.advance(Phase.DONE)
    return EpisodeOutcome(ok, reason, float(grasp_time), sel.index, g, preshape, ik, j,
                          scale.alpha, mis, tuple(state.history), **common)


@dataclass(frozen=True)
class MetricsReport:
    gsr: float
    agt_mean: float
    agt_std: float
    n: int
    per_object: dict
    outcomes: tuple = ()


def _stats(outcomes):
    n = len(outcomes)
    gsr = sum(o.success for o in outcomes) / n if n else 0.0
    # grasp time counts every episode that reached the grasping stage
    times = np.array([o.grasp_time for o in outcomes if o.grasp_time is not None])
    mean = float(times.mean()) if len(times) else float("nan")
    std = float(times.std(ddof=1)) if len(times) > 1 else (0.0 if len(times) else float("nan"))
    return gsr, mean, std, n


def summarize(outcomes) -> MetricsReport:
    outcomes = tuple(outcomes)
    if not outcomes:
        raise ValueError("no outcomes to summarize")
    per = {}
    for label in sorted({o.label for o in outcomes}):
        gsr, mean, std, n = _stats([o for o in outcomes if o.label == label])
        per[label] = {"gsr": gsr, "agt_mean": mean, "agt_std": std, "n": n}
    gsr, mean, std, n = _stats(outcomes)
    return MetricsReport(gsr, mean, std, n, per, outcomes)


def run_batch(specs, jobs: int = 1) -> MetricsReport:
    specs = list(specs)
    if not specs:
        raise ValueError("batch is empty")
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            outcomes = list(pool.map(run_episode, specs))
    else:
        outcomes = [run_episode(s) for s in specs]
    return summarize(outcomes)

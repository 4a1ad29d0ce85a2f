"""Ready-made desk-scale episodes: one object in front of a wall.

The approach path heads for the candidate nearest the starting camera and
turns the camera, well before the trigger distance, into an orientation
from which the selected candidate is reachable by the wrist.
"""

from __future__ import annotations

import numpy as np

from .geom import CameraIntrinsics, Pose, exp_axisangle, inverse
from .grasp import grasp_rotation, gripper_midpoint, sample_grasps
from .hannes_map import WristModel, camera_rotation
from .odom import SimulatedVOConfig, TrajectoryFrame
from .pipeline import EpisodeSpec, PipelineSettings
from .scene import DepthNoiseModel, Primitive, Scene
from .select import select_nearest
from .trajectory import arc, look_at, straight_line

OBJECT_KINDS = ("sphere", "cylinder", "box")

NOISY_DEPTH = 0.02
NOISY_TRANSLATION = 0.002
NOISY_PATCH_DEPTH = 0.02


def random_rotation(rng) -> np.ndarray:
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def random_object(kind: str, rng, max_aperture: float = 0.09):
    """Dimensions for a graspable object of ``kind`` that fits the aperture."""
    if kind == "sphere":
        return (rng.uniform(0.02, min(0.04, 0.45 * max_aperture)),)
    if kind == "cylinder":
        return (rng.uniform(0.02, min(0.04, 0.45 * max_aperture)), rng.uniform(0.08, 0.15))
    if kind == "box":
        return tuple(rng.uniform(0.015, min(0.04, 0.45 * max_aperture), size=3))
    raise ValueError(f"no random object for kind {kind!r}")


def make_episode(kind: str, seed: int, dims=None, noisy: bool = False, path: str = "line",
                 wrist: WristModel | None = None, settings: PipelineSettings | None = None,
                 hidden_scale: float | None = None, standoff: float = 0.005,
                 intrinsics: CameraIntrinsics | None = None, label: str | None = None) -> EpisodeSpec:
    rng = np.random.default_rng(seed)
    wrist = wrist or WristModel()
    settings = settings or PipelineSettings(grasp_seed=seed, sample_seed=seed)
    K = intrinsics or CameraIntrinsics()
    if dims is None:
        dims = random_object(kind, rng, wrist.max_aperture)

    # local layout: start camera near the origin looking down +z
    center = np.array([rng.uniform(-0.04, 0.04), rng.uniform(-0.04, 0.04), rng.uniform(0.3, 0.4)])
    obj = Primitive(kind, Pose(random_rotation(rng), center), dims, name=kind)
    wall = Primitive("plane", Pose(np.eye(3), [0.0, 0.0, center[2] + rng.uniform(0.3, 0.6)]), (),
                     name="wall")
    start_pos = rng.uniform(-0.02, 0.02, size=3)
    roll = exp_axisangle([0.0, 0.0, rng.uniform(-0.3, 0.3)])
    start = Pose(look_at(start_pos, center) @ roll, start_pos)

    # random placement of the whole setup in the world
    world = Pose(random_rotation(rng), rng.uniform(-1.0, 1.0, size=3))
    scene = Scene((obj, wall), K).transformed(world)
    start = world @ start

    grasps = sample_grasps(scene, start, wrist.max_aperture, settings.per_object,
                           settings.grasp_seed)
    mids = grasps.midpoints()
    aim = int(np.argmin(np.linalg.norm(mids, axis=1)))
    g_aim = grasps[aim]
    goal_c0 = gripper_midpoint(g_aim) - standoff * g_aim.approach
    goal = start.apply(goal_c0)
    speed = rng.uniform(0.1, 0.25)
    bulge = None
    if path == "arc":
        side = np.cross(goal - start.translation, start.rotation[:, 1])
        bulge = 0.05 * side / np.linalg.norm(side)

    def build(end_rotation=None, settle=None):
        if path == "arc":
            return arc(start, goal, speed, bulge, end_rotation=end_rotation, settle_index=settle)
        return straight_line(start, goal, speed, end_rotation=end_rotation, settle_index=settle)

    # positions do not depend on orientation: scan them to find what the
    # selector will pick and when
    traj = build()
    rel = [start.rotation.T @ (p.translation - start.translation) for _, p in traj]
    sel = settle = None
    for i in range(1, len(rel)):
        pick = select_nearest(grasps, TrajectoryFrame(i, Pose(np.eye(3), rel[i])),
                              settings.threshold)
        if settle is None and pick.distance <= 2 * settings.threshold:
            settle = i
        if pick.triggered:
            sel = pick.index
            break
    if sel is None:
        sel = aim
    settle = settle or len(traj) - 1

    # orientation that leaves the wrist a reachable target q*
    lo, hi = 0.5 * wrist.lower, 0.5 * wrist.upper
    q_star = rng.uniform(lo, hi)
    R_target = grasp_rotation(grasps[sel]) @ wrist.home_offset()
    R_rel = R_target @ camera_rotation(q_star, wrist).T @ camera_rotation(np.zeros(2), wrist)
    traj = build(start.rotation @ R_rel, settle)

    if hidden_scale is None:
        hidden_scale = float(np.exp(rng.uniform(np.log(0.2), np.log(5.0))))
    vo = SimulatedVOConfig(
        hidden_scale=hidden_scale,
        translation_sigma=NOISY_TRANSLATION if noisy else 0.0,
        patch_depth_sigma=NOISY_PATCH_DEPTH if noisy else 0.0,
        seed=seed,
    )
    noise = DepthNoiseModel(NOISY_DEPTH if noisy else 0.0, seed)
    return EpisodeSpec(scene, tuple(traj), traj[0][0], vo, noise, settings, wrist,
                       label=label or kind, name=f"{label or kind}-{seed:04d}")


def mug_episode(seed: int, radius: float = 0.06, height: float = 0.12, **kw) -> EpisodeSpec:
    """A cylinder wider than the hand can open."""
    return make_episode("cylinder", seed, dims=(radius, height), label="mug", **kw)


def standard_batch(n_per_kind: int = 20, noisy: bool = False, seed: int = 0, **kw) -> list:
    specs = []
    for k, kind in enumerate(OBJECT_KINDS):
        for i in range(n_per_kind):
            specs.append(make_episode(kind, seed + 1000 * k + i, noisy=noisy, **kw))
    return specs


def true_relative_positions(spec: EpisodeSpec) -> np.ndarray:
    """Ground-truth camera positions relative to the trigger camera."""
    i0 = spec.trigger_index()
    inv0 = inverse(spec.poses[i0])
    return np.array([(inv0 @ p).translation for p in spec.poses[i0:]])

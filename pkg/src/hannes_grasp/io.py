"""File formats: JSON scenes/episodes, JSONL grasps, PLY, PGM, CSV."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .cloud import PointCloud
from .geom import CameraIntrinsics, Pose, axisangle
from .grasp import GraspCandidate, GraspSet
from .hannes_map import IKSettings, WristModel
from .odom import SimulatedVOConfig, TrajectoryFrame
from .pipeline import EpisodeOutcome, EpisodeSpec, MetricsReport, PipelineSettings, SuccessCriteria
from .scene import DepthMap, DepthNoiseModel, Primitive, Scene


def _floats(v):
    return [float(x) for x in np.asarray(v).ravel()]


def pose_to_dict(p: Pose) -> dict:
    return {"position": _floats(p.translation), "rotation": _floats(axisangle(p.rotation))}


def pose_from_dict(d: dict) -> Pose:
    return Pose.from_axisangle(d.get("position", [0, 0, 0]), d.get("rotation", [0, 0, 0]))


# --- scenes -----------------------------------------------------------------

def scene_from_dict(d: dict) -> Scene:
    cam = CameraIntrinsics(**d.get("camera", {}))
    prims = []
    for o in d["objects"]:
        prims.append(Primitive(o["kind"], pose_from_dict(o), tuple(o.get("dimensions", ())),
                               o.get("name", "")))
    return Scene(tuple(prims), cam)


def scene_to_dict(scene: Scene) -> dict:
    K = scene.intrinsics
    return {
        "camera": {"fx": K.fx, "fy": K.fy, "cx": K.cx, "cy": K.cy,
                   "width": K.width, "height": K.height},
        "objects": [{"kind": p.kind, "name": p.name, **pose_to_dict(p.pose),
                     "dimensions": list(p.dimensions)} for p in scene.primitives],
    }


def wrist_from_dict(d: dict | None) -> WristModel:
    if not d:
        return WristModel()
    kw = {}
    for key in ("wps_axis", "wfe_axis", "finger_close_dir"):
        if key in d:
            kw[key] = tuple(d[key])
    limits = d.get("limits", {})
    if "wps" in limits:
        kw["wps_limits"] = tuple(limits["wps"])
    if "wfe" in limits:
        kw["wfe_limits"] = tuple(limits["wfe"])
    if "camera_in_palm" in d:
        kw["camera_in_palm"] = pose_from_dict(d["camera_in_palm"])
    for key in ("gamma", "beta", "max_aperture"):
        if key in d:
            kw[key] = float(d[key])
    return WristModel(**kw)


def wrist_to_dict(m: WristModel) -> dict:
    return {
        "wps_axis": list(m.wps_axis), "wfe_axis": list(m.wfe_axis),
        "limits": {"wps": list(m.wps_limits), "wfe": list(m.wfe_limits)},
        "camera_in_palm": pose_to_dict(m.camera_in_palm),
        "finger_close_dir": list(m.finger_close_dir),
        "gamma": m.gamma, "beta": m.beta, "max_aperture": m.max_aperture,
    }


def load_json(path) -> dict:
    with open(path) as f:
        return json.load(f)


def load_scene(path) -> tuple[Scene, WristModel]:
    """Scene plus the wrist model stored under its ``hannes`` key."""
    d = load_json(path)
    return scene_from_dict(d), wrist_from_dict(d.get("hannes"))


# --- depth and clouds -------------------------------------------------------

def write_pgm(path, depth: DepthMap):
    """16-bit binary PGM in millimetres; no-hit pixels are 0."""
    mm = np.where(depth.hit, np.rint(np.nan_to_num(depth.values) * 1000.0), 0.0)
    mm = np.clip(mm, 0, 65535).astype(">u2")
    with open(path, "wb") as f:
        f.write(f"P5\n{depth.width} {depth.height}\n65535\n".encode("ascii"))
        f.write(mm.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while data[pos:pos + 1].isspace():
            pos += 1
        start = pos
        while not data[pos:pos + 1].isspace():
            pos += 1
        fields.append(data[start:pos])
    if fields[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    dtype = ">u2" if maxval > 255 else "u1"
    return np.frombuffer(data[pos + 1:], dtype=dtype, count=w * h).reshape(h, w)


def write_ply(path, cloud: PointCloud):
    with open(path, "w") as f:
        f.write("ply\nformat ascii 1.0\n")
        f.write(f"element vertex {len(cloud)}\n")
        f.write("property double x\nproperty double y\nproperty double z\nend_header\n")
        for x, y, z in cloud.points.tolist():
            f.write(f"{x!r} {y!r} {z!r}\n")


def read_ply(path) -> np.ndarray:
    with open(path) as f:
        lines = f.read().splitlines()
    n = next(int(l.split()[2]) for l in lines if l.startswith("element vertex"))
    body = lines[lines.index("end_header") + 1:][:n]
    return np.array([[float(x) for x in l.split()] for l in body]).reshape(-1, 3)


# --- grasps -----------------------------------------------------------------

def grasp_to_dict(g: GraspCandidate) -> dict:
    return {"c": _floats(g.contact), "a": _floats(g.approach), "b": _floats(g.baseline),
            "w": g.width, "feasible": g.feasible, "object": g.object_index}


def grasp_from_dict(d: dict) -> GraspCandidate:
    return GraspCandidate(d["c"], d["a"], d["b"], d["w"], bool(d.get("feasible", True)),
                          int(d.get("object", -1)))


def write_grasps_jsonl(path, grasps: GraspSet):
    with open(path, "w") as f:
        for g in grasps:
            f.write(json.dumps(grasp_to_dict(g)) + "\n")


def read_grasps_jsonl(path) -> GraspSet:
    with open(path) as f:
        return GraspSet([grasp_from_dict(json.loads(l)) for l in f if l.strip()])


# --- trajectories -----------------------------------------------------------

TRAJECTORY_COLUMNS = ("index", "tx", "ty", "tz", "rx", "ry", "rz")


def write_trajectory_csv(path, frames):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(TRAJECTORY_COLUMNS)
        for fr in frames:
            w.writerow([fr.index, *map(repr, _floats(fr.pose.translation)),
                        *map(repr, _floats(axisangle(fr.pose.rotation)))])


def read_trajectory_csv(path) -> list:
    frames = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            t = [float(row[k]) for k in ("tx", "ty", "tz")]
            r = [float(row[k]) for k in ("rx", "ry", "rz")]
            frames.append(TrajectoryFrame(int(row["index"]), Pose.from_axisangle(t, r)))
    return frames


# --- episodes ---------------------------------------------------------------

def _sub(cls, d):
    return cls(**d) if d else cls()


def episode_from_dict(d: dict, base_dir=None) -> EpisodeSpec:
    if "scene_file" in d:
        sd = load_json(Path(base_dir or ".") / d["scene_file"])
    else:
        sd = d["scene"]
    scene = scene_from_dict(sd)
    wrist = wrist_from_dict(d.get("hannes", sd.get("hannes")))
    traj = tuple((float(f["t"]), pose_from_dict(f)) for f in d["trajectory"])
    s = dict(d.get("settings", {}))
    s["ik"] = _sub(IKSettings, s.get("ik"))
    s["success"] = _sub(SuccessCriteria, s.get("success"))
    return EpisodeSpec(
        scene=scene,
        trajectory=traj,
        trigger_time=float(d.get("trigger_time", traj[0][0])),
        vo=_sub(SimulatedVOConfig, d.get("vo")),
        depth_noise=DepthNoiseModel(**d.get("depth_noise", {"sigma": 0.0})),
        settings=PipelineSettings(**s),
        wrist=wrist,
        label=d.get("label", ""),
        name=d.get("name", ""),
    )


def episode_to_dict(spec: EpisodeSpec) -> dict:
    s = spec.settings
    vo = spec.vo
    return {
        "name": spec.name,
        "label": spec.label,
        "scene": scene_to_dict(spec.scene),
        "hannes": wrist_to_dict(spec.wrist),
        "trajectory": [{"t": t, **pose_to_dict(p)} for t, p in spec.trajectory],
        "trigger_time": spec.trigger_time,
        "vo": {"hidden_scale": vo.hidden_scale, "patch_count": vo.patch_count,
               "patch_size": vo.patch_size, "translation_sigma": vo.translation_sigma,
               "rotation_sigma": vo.rotation_sigma, "patch_depth_sigma": vo.patch_depth_sigma,
               "seed": vo.seed, "noise_model": vo.noise_model},
        "depth_noise": {"sigma": spec.depth_noise.sigma, "seed": spec.depth_noise.seed},
        "settings": {
            "threshold": s.threshold, "t_grasp": s.t_grasp, "n_points": s.n_points,
            "per_object": s.per_object, "grasp_seed": s.grasp_seed, "sample_seed": s.sample_seed,
            "ik": {"gain": s.ik.gain, "max_steps": s.ik.max_steps,
                   "error_threshold": s.ik.error_threshold, "damping": s.ik.damping},
            "success": {"axis_tol": s.success.axis_tol, "lf_tol": s.success.lf_tol},
        },
    }


def load_episode(path) -> EpisodeSpec:
    return episode_from_dict(load_json(path), Path(path).parent)


def save_episode(path, spec: EpisodeSpec):
    with open(path, "w") as f:
        json.dump(episode_to_dict(spec), f, indent=1)


OUTCOME_COLUMNS = ("name", "label", "success", "failure_reason", "grasp_time", "selected",
                   "width", "feasible", "wps", "wfe", "lf", "ik_converged", "ik_steps",
                   "ik_error", "misalignment", "scale", "trigger_frame")


def _fmt(x):
    if isinstance(x, np.generic):
        x = x.item()
    if x is None:
        return ""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def outcome_fields(o: EpisodeOutcome) -> dict:
    g, p, ik = o.candidate, o.preshape, o.ik
    return {
        "name": o.name, "label": o.label, "success": o.success,
        "failure_reason": o.failure_reason, "grasp_time": o.grasp_time,
        "selected": o.selected,
        "width": g.width if g else None, "feasible": g.feasible if g else None,
        "wps": p.wps if p else None, "wfe": p.wfe if p else None, "lf": p.lf if p else None,
        "ik_converged": ik.converged if ik else None, "ik_steps": ik.steps if ik else None,
        "ik_error": float(np.linalg.norm(ik.error)) if ik else None,
        "misalignment": o.misalignment, "scale": o.scale, "trigger_frame": o.trigger_frame,
    }


def outcome_row(o: EpisodeOutcome) -> dict:
    return {k: _fmt(v) for k, v in outcome_fields(o).items()}


def write_outcomes_csv(path, outcomes):
    with open(path, "w", newline="") as f:
        w = csv.DictWriter(f, fieldnames=OUTCOME_COLUMNS, lineterminator="\n")
        w.writeheader()
        for o in outcomes:
            w.writerow(outcome_row(o))


def _clean(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, np.generic):
        return _clean(x.item())
    return x


def report_to_dict(r: MetricsReport) -> dict:
    return _clean({"gsr": r.gsr, "agt_mean": r.agt_mean, "agt_std": r.agt_std, "n": r.n,
                   "per_object": r.per_object})


def write_summary_json(path, r: MetricsReport):
    with open(path, "w") as f:
        json.dump(report_to_dict(r), f, indent=2, sort_keys=True)
        f.write("\n")


def outcome_to_dict(o: EpisodeOutcome) -> dict:
    d = _clean(outcome_fields(o))
    d["phases"] = [ph.name.lower() for ph in o.phases]
    return d

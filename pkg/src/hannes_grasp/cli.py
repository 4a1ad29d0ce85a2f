"""Command-line entry point.

Exit status is 0 whenever the requested run completed, including episodes
whose grasp failed; 2 for bad arguments or unreadable inputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from . import io
from .cloud import build_cloud, depth_weights, downsample
from .geom import Pose
from .grasp import DEFAULT_PER_OBJECT, sample_grasps
from .pipeline import run_batch, run_episode
from .scenarios import OBJECT_KINDS, make_episode, mug_episode
from .scene import DepthNoiseModel, perturb_depth, render_depth

DEFAULT_SEED = 0


class UsageError(Exception):
    pass


def _pose(text: str | None) -> Pose:
    if not text:
        return Pose()
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad pose {text!r}") from None
    if len(vals) != 6:
        raise UsageError("pose needs six comma-separated numbers: x,y,z,rx,ry,rz")
    return Pose.from_axisangle(vals[:3], vals[3:])


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _apply_overrides(spec, args):
    wrist = spec.wrist
    if args.max_aperture_m is not None:
        wrist = dataclasses.replace(wrist, max_aperture=args.max_aperture_m)
    settings = spec.settings
    if args.threshold_m is not None:
        settings = dataclasses.replace(settings, threshold=args.threshold_m)
    if args.tgrasp_s is not None:
        settings = dataclasses.replace(settings, t_grasp=args.tgrasp_s)
    noise, vo = spec.depth_noise, spec.vo
    if args.depth_noise is not None:
        noise = dataclasses.replace(noise, sigma=args.depth_noise)
    if args.seed is not None:
        noise = dataclasses.replace(noise, seed=args.seed)
        vo = dataclasses.replace(vo, seed=args.seed)
        settings = dataclasses.replace(settings, grasp_seed=args.seed, sample_seed=args.seed)
    return dataclasses.replace(spec, wrist=wrist, settings=settings, depth_noise=noise, vo=vo)


def cmd_render(args):
    scene, _ = io.load_scene(args.scene)
    depth = render_depth(scene, _pose(args.pose))
    seed = DEFAULT_SEED if args.seed is None else args.seed
    if args.depth_noise:
        depth = perturb_depth(depth, DepthNoiseModel(args.depth_noise, seed))
    out = _out_dir(args)
    io.write_pgm(out / "depth.pgm", depth)
    cloud = build_cloud(depth, scene.intrinsics)
    io.write_ply(out / "cloud.ply", cloud)
    msg = f"{int(depth.hit.sum())} hit pixels"
    if args.downsample and len(cloud):
        sub = downsample(cloud, depth_weights(depth), args.downsample, seed)
        io.write_ply(out / "cloud_down.ply", sub)
        msg += f", {len(sub)} sampled"
    print(msg)


def cmd_grasps(args):
    scene, wrist = io.load_scene(args.scene)
    aperture = wrist.max_aperture if args.max_aperture_m is None else args.max_aperture_m
    seed = DEFAULT_SEED if args.seed is None else args.seed
    grasps = sample_grasps(scene, _pose(args.pose), aperture, args.per_object, seed)
    out = _out_dir(args)
    io.write_grasps_jsonl(out / "grasps.jsonl", grasps)
    print(f"{len(grasps)} candidates")


def cmd_episode(args):
    spec = _apply_overrides(io.load_episode(args.spec), args)
    outcome = run_episode(spec)
    out = _out_dir(args)
    io.write_outcomes_csv(out / "episodes.csv", [outcome])
    with open(out / "outcome.json", "w") as f:
        json.dump(io.outcome_to_dict(outcome), f, indent=2, sort_keys=True)
        f.write("\n")
    print("success" if outcome.success else f"failed: {outcome.failure_reason}")


def cmd_batch(args):
    files = sorted(Path(args.dir).glob("*.json"))
    if not files:
        raise UsageError(f"no episode files in {args.dir}")
    specs = [_apply_overrides(io.load_episode(p), args) for p in files]
    report = run_batch(specs, jobs=args.jobs)
    out = _out_dir(args)
    io.write_outcomes_csv(out / "episodes.csv", report.outcomes)
    io.write_summary_json(out / "summary.json", report)
    print(f"GSR {report.gsr:.3f}  AGT {report.agt_mean:.3f} +- {report.agt_std:.3f} s  (n={report.n})")


def cmd_generate(args):
    out = _out_dir(args)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    n = 0
    for k, kind in enumerate(OBJECT_KINDS):
        for i in range(args.n_per_kind):
            spec = make_episode(kind, seed + 1000 * k + i, noisy=args.noisy, path=args.path)
            io.save_episode(out / f"{spec.name}.json", spec)
            n += 1
    for i in range(args.mug):
        spec = mug_episode(seed + 9000 + i, noisy=args.noisy, path=args.path)
        io.save_episode(out / f"{spec.name}.json", spec)
        n += 1
    print(f"wrote {n} episode files")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--threshold-m", type=float, default=None)
    common.add_argument("--max-aperture-m", type=float, default=None)
    common.add_argument("--depth-noise", type=float, default=None,
                        help="multiplicative depth noise sigma")
    common.add_argument("--tgrasp-s", type=float, default=None)

    p = argparse.ArgumentParser(prog="hannes-grasp", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("render", parents=[common], help="depth PGM and point-cloud PLY")
    r.add_argument("scene")
    r.add_argument("--pose", help="camera pose x,y,z,rx,ry,rz (axis-angle)")
    r.add_argument("--downsample", type=int, default=0, help="also write an N-point sample")
    r.set_defaults(func=cmd_render)

    g = sub.add_parser("grasps", parents=[common], help="grasp candidates as JSON lines")
    g.add_argument("scene")
    g.add_argument("--pose")
    g.add_argument("--per-object", type=int, default=DEFAULT_PER_OBJECT)
    g.set_defaults(func=cmd_grasps)

    e = sub.add_parser("episode", parents=[common], help="run one episode spec")
    e.add_argument("spec")
    e.set_defaults(func=cmd_episode)

    b = sub.add_parser("batch", parents=[common], help="run every *.json spec in a directory")
    b.add_argument("dir")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_batch)

    gen = sub.add_parser("generate", parents=[common], help="write synthetic episode specs")
    gen.add_argument("--n-per-kind", type=int, default=20)
    gen.add_argument("--mug", type=int, default=0, help="number of over-aperture episodes")
    gen.add_argument("--noisy", action="store_true")
    gen.add_argument("--path", choices=("line", "arc"), default="line")
    gen.set_defaults(func=cmd_generate)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

import dataclasses
import math

import numpy as np
import pytest

from hannes_grasp.geom import Pose, rot_y, rot_z
from hannes_grasp.grasp import GraspCandidate, grasp_rotation
from hannes_grasp.hannes_map import IKResult, PreshapeConfig, WristModel
from hannes_grasp.pipeline import (MISALIGNED, NEVER_TRIGGERED, NOT_CONVERGED, OVER_APERTURE,
                                   WIDTH_MISMATCH, EpisodeOutcome, EpisodeSpec, Phase,
                                   PipelineState, evaluate_success, graspable_width, run_batch,
                                   run_episode, summarize)
from hannes_grasp.scenarios import make_episode, mug_episode, standard_batch
from hannes_grasp.scene import Primitive, Scene

MODEL = WristModel()
H = rot_z(-math.pi / 2) @ rot_y(-math.pi / 4)
G = GraspCandidate([0, 0, 0.4], [0, 0, 1], [1, 0, 0], 0.06)
PRE = PreshapeConfig(0.0, 0.0, 0.06 / 0.09)
IK_OK = IKResult(np.zeros(2), np.zeros(2), 3, True)


def test_state_machine_order():
    s = PipelineState()
    for ph in (Phase.TRIGGERED, Phase.APPROACHING, Phase.GRASPING, Phase.DONE):
        s.advance(ph)
    assert s.history == list(Phase)
    s = PipelineState()
    with pytest.raises(RuntimeError):
        s.advance(Phase.APPROACHING)
    s.advance(Phase.TRIGGERED)
    with pytest.raises(RuntimeError):
        s.advance(Phase.IDLE)
    s.advance(Phase.DONE)
    with pytest.raises(RuntimeError):
        s.advance(Phase.DONE)


def test_success_all_conditions():
    ok, reason, mis = evaluate_success(G, PRE, IK_OK, 0.06, grasp_rotation(G) @ H, MODEL)
    assert ok and reason is None and mis < 1e-7


def test_success_not_converged():
    ik = IKResult(np.zeros(2), np.array([0.1, 0]), 100, False)
    assert evaluate_success(G, PRE, ik, 0.06, grasp_rotation(G) @ H, MODEL)[:2] == (False, NOT_CONVERGED)


def test_success_misaligned():
    R = rot_y(0.2) @ grasp_rotation(G) @ H
    ok, reason, mis = evaluate_success(G, PRE, IK_OK, 0.06, R, MODEL)
    assert (ok, reason) == (False, MISALIGNED)
    assert mis == pytest.approx(0.2, abs=1e-12)


def test_success_over_aperture_and_width():
    wide = GraspCandidate([0, 0, 0.4], [0, 0, 1], [1, 0, 0], 0.12, feasible=False)
    pre = PreshapeConfig(0, 0, 1.0, True)
    assert evaluate_success(wide, pre, IK_OK, 0.12, grasp_rotation(G) @ H, MODEL)[1] == OVER_APERTURE
    assert evaluate_success(G, PRE, IK_OK, 0.03, grasp_rotation(G) @ H, MODEL)[1] == WIDTH_MISMATCH


def test_graspable_width_sphere():
    s = Scene((Primitive("sphere", Pose(np.eye(3), [0, 0, 0.4]), (0.03,)),))
    g = GraspCandidate([-0.03, 0, 0.4], [0, 0, 1], [1, 0, 0], 0.06, object_index=0)
    assert graspable_width(s, g) == pytest.approx(0.06, abs=1e-12)


def outcome(label, success, t):
    return EpisodeOutcome(success, None if success else "x", t, label=label)


def test_batch_arithmetic():
    times = [3.1, 2.4, 5.0, 2.2, 4.4, 3.9]
    outs = [outcome("a" if i < 3 else "b", i % 2 == 0, t) for i, t in enumerate(times)]
    r = summarize(outs)
    assert r.gsr == 0.5 and r.n == 6
    mean = sum(times) / 6
    var = sum((t - mean) ** 2 for t in times) / 5
    assert r.agt_mean == pytest.approx(mean, abs=1e-12)
    assert r.agt_std == pytest.approx(math.sqrt(var), abs=1e-12)
    assert r.per_object["a"]["gsr"] == pytest.approx(2 / 3)
    assert r.per_object["b"]["n"] == 3
    assert summarize([outcome("a", True, 1.0)] * 4).gsr == 1.0
    with pytest.raises(ValueError):
        summarize([])


def test_agt_skips_untriggered():
    r = summarize([outcome("a", True, 2.5), EpisodeOutcome(False, NEVER_TRIGGERED)])
    assert r.agt_mean == 2.5 and r.agt_std == 0.0 and r.gsr == 0.5


def test_spec_validation():
    scene = Scene((Primitive("plane", Pose()),))
    with pytest.raises(ValueError):
        EpisodeSpec(scene, ((0.0, Pose()), (0.0, Pose())))
    with pytest.raises(ValueError):
        EpisodeSpec(scene, ((0.0, Pose()), (1.0, Pose())), trigger_time=2.0)
    with pytest.raises(ValueError):
        EpisodeSpec(scene, ())


def test_sphere_episode_succeeds():
    spec = make_episode("sphere", 7, dims=(0.03,))
    out = run_episode(spec)
    assert out.success, out.failure_reason
    assert out.candidate.width == pytest.approx(0.06, abs=1e-12)
    assert out.grasp_time == spec.times[out.trigger_frame] - spec.trigger_time + 2.0
    assert out.phases == tuple(Phase)
    assert abs(out.scale - spec.vo.hidden_scale) / spec.vo.hidden_scale < 1e-9


def test_mug_over_aperture():
    out = run_episode(mug_episode(3))
    assert not out.success and out.failure_reason == OVER_APERTURE
    assert out.preshape.lf == 1.0 and out.preshape.over_aperture


def test_never_triggered():
    spec = make_episode("box", 5)
    # stop the approach halfway
    half = spec.trajectory[: len(spec.trajectory) // 2]
    out = run_episode(dataclasses.replace(spec, trajectory=half))
    assert not out.success and out.failure_reason == NEVER_TRIGGERED
    assert out.grasp_time is None
    assert out.phases[-1] == Phase.DONE and Phase.GRASPING not in out.phases


def test_no_objects_reports_reason():
    spec = make_episode("sphere", 2)
    wall_only = Scene(spec.scene.primitives[1:], spec.scene.intrinsics)
    out = run_episode(dataclasses.replace(spec, scene=wall_only))
    assert out.failure_reason == "no-candidates"


def test_run_episode_deterministic():
    spec = make_episode("cylinder", 11, noisy=True)
    a, b = run_episode(spec), run_episode(spec)
    assert a.success == b.success and a.grasp_time == b.grasp_time
    assert np.array_equal(a.ik.q, b.ik.q) and a.scale == b.scale


def test_batch_parallel_matches_serial():
    specs = standard_batch(2)
    a, b = run_batch(specs), run_batch(specs, jobs=2)
    assert a.gsr == b.gsr and a.agt_mean == b.agt_mean
    assert [o.grasp_time for o in a.outcomes] == [o.grasp_time for o in b.outcomes]


def test_arc_paths_succeed():
    specs = [make_episode(k, 50 + i, path="arc") for i, k in enumerate(("sphere", "cylinder", "box"))]
    assert run_batch(specs).gsr == 1.0

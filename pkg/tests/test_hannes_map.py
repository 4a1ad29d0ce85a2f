import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hannes_grasp.errors import JointLimitError
from hannes_grasp.geom import Pose, axisangle, exp_axisangle, rot_x, rot_y, rot_z
from hannes_grasp.grasp import GraspCandidate, grasp_rotation
from hannes_grasp.hannes_map import (IKSettings, WristModel, adjoint, camera_frame_jacobian,
                                     camera_rotation, desired_camera_rotation, hand_approach_axis,
                                     map_candidate, palm_jacobian, solve_wrist, width_to_lf, wrist_fk)
from hannes_grasp.scenarios import random_rotation

MODEL = WristModel()
H = rot_z(-math.pi / 2) @ rot_y(-math.pi / 4)


def random_q(rng, model=MODEL):
    return rng.uniform(model.lower, model.upper)


def fd_jacobian(q, model, h=1e-6):
    """Central differences of the camera-frame rotation, x and z rows."""
    J = np.zeros((2, 2))
    R = camera_rotation(q, model)
    for i in range(2):
        dq = np.zeros(2)
        dq[i] = h
        plus = axisangle(R.T @ camera_rotation(q + dq, model))
        minus = axisangle(R.T @ camera_rotation(q - dq, model))
        J[:, i] = ((plus - minus) / (2 * h))[[0, 2]]
    return J


def tilted_model(rng):
    ext = Pose(random_rotation(rng), rng.uniform(-0.05, 0.05, 3))
    return WristModel(camera_in_palm=ext)


@pytest.mark.parametrize("w,ap,lf,over", [(0.0, 0.09, 0.0, False), (0.0, 0.2, 0.0, False),
                                          (0.045, 0.09, 0.5, False), (0.09, 0.09, 1.0, False),
                                          (0.12, 0.09, 1.0, True)])
def test_width_to_lf(w, ap, lf, over):
    assert width_to_lf(w, ap) == (pytest.approx(lf, abs=1e-15), over)


def test_width_to_lf_negative():
    with pytest.raises(ValueError):
        width_to_lf(-0.01)


def test_home_offset_entries():
    h = math.sqrt(0.5)
    # product written out by hand
    expected = np.array([[0.0, 1.0, 0.0], [-h, 0.0, h], [h, 0.0, h]])
    R = desired_camera_rotation(np.eye(3), np.eye(3), MODEL)
    assert np.allclose(R, expected, atol=1e-15)
    assert np.allclose(MODEL.home_offset(), H, atol=1e-15)


def test_desired_fixed_point(rng):
    for _ in range(100):
        Rg = random_rotation(rng)
        R = desired_camera_rotation(Rg, Rg @ H, MODEL)
        assert np.allclose(R, np.eye(3), atol=1e-9)


def test_desired_closure(rng):
    for _ in range(1000):
        R = desired_camera_rotation(random_rotation(rng), random_rotation(rng), MODEL)
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)
        assert abs(np.linalg.det(R) - 1) < 1e-12


def test_fk_examples():
    assert wrist_fk([0, 0], MODEL) == MODEL.camera_in_palm
    T = wrist_fk([math.pi / 2, 0], MODEL)
    assert np.allclose(T.rotation, rot_z(math.pi / 2), atol=1e-15)
    assert np.allclose(wrist_fk([0, 0.3], MODEL).rotation, rot_x(0.3), atol=1e-15)
    with pytest.raises(JointLimitError):
        wrist_fk([0, 1.0], MODEL)


def test_model_validation():
    with pytest.raises(ValueError):
        WristModel(wps_axis=(0, 0, 2))
    with pytest.raises(ValueError):
        WristModel(wfe_limits=(0.5, -0.5))
    with pytest.raises(ValueError):
        IKSettings(gain=0)
    with pytest.raises(ValueError):
        IKSettings(max_steps=0)


def test_jacobian_home_column():
    J = camera_frame_jacobian(np.zeros(2), MODEL)
    assert np.allclose(J[:, 0], [0, 1], atol=1e-15)
    assert np.allclose(J[:, 1], [1, 0], atol=1e-15)


def test_adjoint_identity():
    assert np.array_equal(adjoint(Pose()), np.eye(6))
    assert np.array_equal(palm_jacobian(np.zeros(2), MODEL)[:3], np.zeros((3, 2)))


def test_jacobian_finite_differences(rng):
    for model in (MODEL, tilted_model(rng), tilted_model(rng)):
        for _ in range(100):
            q = random_q(rng, model)
            err = np.max(np.abs(camera_frame_jacobian(q, model) - fd_jacobian(q, model)))
            assert err < 1e-5


def test_ik_aligned_zero_steps(rng):
    Rg = random_rotation(rng)
    r = solve_wrist(Rg, Rg @ H, MODEL)
    assert r.converged and r.steps == 0 and np.array_equal(r.q, [0, 0])
    q0 = np.array([0.2, -0.1])
    Rc = Rg @ H
    r = solve_wrist(Rg, Rc, MODEL, q0=q0)
    assert r.converged and r.steps == 0 and np.array_equal(r.q, q0)


def test_ik_single_axis():
    Rg = rot_z(0.3) @ H.T
    r = solve_wrist(Rg, np.eye(3), MODEL)
    assert r.converged
    assert np.allclose(r.q, [0.3, 0.0], atol=1e-3)


def test_ik_roll_only_target_needs_no_motion():
    # a residual about camera y is invisible to the error, so nothing moves
    Rg = rot_y(0.4) @ H.T
    r = solve_wrist(Rg, np.eye(3), MODEL)
    assert r.converged and r.steps == 0


def test_ik_out_of_limits_not_converged():
    Rg = rot_x(1.2) @ H.T  # flexion beyond pi/4
    r = solve_wrist(Rg, np.eye(3), MODEL)
    assert not r.converged and r.steps == IKSettings().max_steps
    assert MODEL.within_limits(r.q)
    assert r.q[1] == pytest.approx(math.pi / 4)


def test_ik_rejects_bad_q0():
    with pytest.raises(JointLimitError):
        solve_wrist(np.eye(3), np.eye(3), MODEL, q0=[2.0, 0])


def reachable_target(rng, model, shrink=0.9):
    q_star = rng.uniform(shrink * model.lower, shrink * model.upper)
    Rc_last = random_rotation(rng)
    # the candidate rotation that the camera would realize at q_star
    Rg = Rc_last @ camera_rotation(np.zeros(2), model).T @ camera_rotation(q_star, model) @ H.T
    return Rg, Rc_last, q_star


def test_ik_reachable_and_residual(rng):
    for _ in range(50):
        Rg, Rc_last, q_star = reachable_target(rng, MODEL)
        r = solve_wrist(Rg, Rc_last, MODEL)
        assert r.converged
        Rc = Rc_last @ camera_rotation(r.q, MODEL)
        res = axisangle(desired_camera_rotation(Rg, Rc, MODEL))
        assert abs(res[0]) < 1e-3 and abs(res[2]) < 1e-3


def test_ik_deterministic(rng):
    Rg, Rc_last, _ = reachable_target(rng, MODEL)
    a, b = solve_wrist(Rg, Rc_last, MODEL), solve_wrist(Rg, Rc_last, MODEL)
    assert np.array_equal(a.q, b.q) and a.steps == b.steps


def test_map_candidate_aligned():
    g = GraspCandidate([0, 0, 0.4], [0, 0, 1], [1, 0, 0], 0.045)
    pre, ik = map_candidate(g, grasp_rotation(g) @ H, MODEL)
    assert (pre.wps, pre.wfe, pre.lf, pre.over_aperture) == (0.0, 0.0, pytest.approx(0.5), False)
    assert ik.steps == 0


def test_map_candidate_over_aperture():
    g = GraspCandidate([0, 0, 0.4], [0, 0, 1], [1, 0, 0], 0.12)
    pre, _ = map_candidate(g, grasp_rotation(g) @ H, MODEL)
    assert pre.lf == 1.0 and pre.over_aperture


def test_map_candidate_hand_axis_matches_approach(rng):
    # a tight stop threshold isolates the frame convention from the
    # convergence tolerance
    tight = IKSettings(error_threshold=1e-7, max_steps=200)
    assert np.allclose(MODEL.home_offset().T @ [1.0, 0, 0], MODEL.finger_close_dir, atol=1e-15)
    for _ in range(50):
        Rg, Rc_last, _ = reachable_target(rng, MODEL)
        g = GraspCandidate(np.zeros(3), Rg[:, 2], Rg[:, 0], 0.05)
        pre, ik = map_candidate(g, Rc_last, MODEL, tight)
        assert ik.converged
        R_cam = Rc_last @ camera_rotation(pre.q, MODEL)
        assert hand_approach_axis(R_cam, MODEL) @ g.approach > math.cos(1e-3)
        # the fingers close along the baseline
        f = R_cam @ np.asarray(MODEL.finger_close_dir)
        assert f @ g.baseline > math.cos(1e-3)


def test_default_threshold_axis_deviation_bounded(rng):
    # the stop test bounds only two of the three residual components, so the
    # approach axis can sit slightly beyond the stop threshold
    for _ in range(200):
        Rg, Rc_last, _ = reachable_target(rng, MODEL)
        g = GraspCandidate(np.zeros(3), Rg[:, 2], Rg[:, 0], 0.05)
        pre, ik = map_candidate(g, Rc_last, MODEL)
        assert ik.converged
        ax = hand_approach_axis(Rc_last @ camera_rotation(pre.q, MODEL), MODEL)
        assert ax @ g.approach > math.cos(2e-3)


@given(st.floats(-1.5, 1.5), st.floats(-0.75, 0.75))
def test_camera_rotation_is_rotation(a, b):
    R = camera_rotation(np.array([a, b]), MODEL)
    assert np.allclose(R.T @ R, np.eye(3), atol=1e-12)

"""Nearest-candidate selection and the distance trigger."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NoCandidatesError
from .grasp import GraspSet
from .odom import TrajectoryFrame

DEFAULT_THRESHOLD = 0.05
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class SelectionResult:
    index: int
    distance: float
    triggered: bool


def select_nearest(grasps: GraspSet, camera: TrajectoryFrame,
                   threshold: float = DEFAULT_THRESHOLD) -> SelectionResult:
    """Pick the candidate whose gripper midpoint is closest to the camera.

    The camera pose must be metric and expressed in the same frame as the
    grasps. The trigger boundary is inclusive; ties go to the lowest index.
    Infeasible candidates take part like any other.
    """
    if len(grasps) == 0:
        raise NoCandidatesError("no grasp candidates to select from")
    dist = np.linalg.norm(grasps.midpoints() - camera.pose.translation, axis=1)
    # distances equal up to rounding count as ties (e.g. every sphere
    # candidate shares the center as midpoint)
    i = int(np.argmax(dist <= dist.min() * (1 + TIE_RTOL) + 1e-12))
    return SelectionResult(i, float(dist[i]), bool(dist[i] <= threshold))

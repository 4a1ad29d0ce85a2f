"""Eye-in-hand grasp pipeline for a prosthetic hand, with analytic stand-ins
for depth estimation, grasp generation and visual odometry."""

from .geom import CameraIntrinsics, Pose, axisangle, compose, exp_axisangle, inverse, project, unproject
from .scene import DepthMap, DepthNoiseModel, Primitive, Scene, perturb_depth, render_depth
from .cloud import PointCloud, SamplingWeights, build_cloud, depth_weights, downsample
from .grasp import GraspCandidate, GraspSet, grasp_rotation, gripper_midpoint, sample_grasps
from .odom import (Patch, ScaleEstimate, SimulatedVOConfig, TrajectoryFrame, apply_scale,
                   estimate_scale, simulate_vo)
from .select import SelectionResult, select_nearest
from .hannes_map import (IKResult, IKSettings, PreshapeConfig, WristModel, camera_frame_jacobian,
                         desired_camera_rotation, map_candidate, solve_wrist, width_to_lf, wrist_fk)
from .pipeline import (EpisodeOutcome, EpisodeSpec, MetricsReport, PipelineSettings,
                       evaluate_success, run_batch, run_episode)

__version__ = "0.1.0"

"""Deterministic simulator of a handheld tangible-volume display."""

from .interaction import GraspState, Phase, apply_grasp, candidate, step_grasp
from .projection import FaceCamera, ScreenQuad, face_basis, off_axis_camera, volume_cameras
from .scene import Scene, TangibleVolume, TargetSpec, VirtualObject, load_scene, save_scene
from .sensors import Calibration, Envelope, PressureFrame, emulate_stream, encode_frame, parse_frame
from .session import InputEvent, Session, SessionConfig, StateSnapshot, TimelineEntry, state_hash
from .spatial import Pose, compose, invert, transform_point
from .study import HINTS, RunMetrics, TaskScript, check_target, recall_score, run_scenario

__version__ = "0.1.0"

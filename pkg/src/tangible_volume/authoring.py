"""Builders for scripted input traces: smooth cube trajectories and press/
release pressure envelopes for pick-and-place runs of the study tasks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import Scene
from .sensors import Envelope
from .session import InputEvent

PRESS_LEVEL = 0.8
GRASP_FACE = 4  # +Z face; any face works, the threshold is on the max
LIFT = 0.15
EVENT_STEP = 0.02  # pose keyframe spacing in the trace


@dataclass
class PickMove:
    object_id: str
    destination: tuple[float, float]  # (x, z) on the ground
    start: float
    approach: float = 1.0  # move cube onto the object
    press: float = 0.4  # squeeze ramp
    carry: float = 1.5  # grasped travel
    release: float = 0.4  # pressure decay

    @property
    def press_done(self) -> float:
        return self.start + self.approach + self.press

    @property
    def carry_done(self) -> float:
        return self.press_done + 0.2 + self.carry

    @property
    def end(self) -> float:
        return self.carry_done + 0.2 + self.release


def _lerp(a: np.ndarray, b: np.ndarray, s: float) -> np.ndarray:
    return a + (b - a) * s


def _pose_events(trace: list[InputEvent], t0: float, t1: float, p0, p1) -> None:
    p0 = np.asarray(p0, dtype=np.float64)
    p1 = np.asarray(p1, dtype=np.float64)
    n = max(1, int(round((t1 - t0) / EVENT_STEP)))
    for i in range(n + 1):
        s = i / n
        # Smoothstep keeps the start/end velocities near zero.
        s = s * s * (3 - 2 * s)
        trace.append(
            InputEvent(
                t=t0 + (t1 - t0) * i / n,
                kind="pose",
                data={
                    "position": [float(v) for v in _lerp(p0, p1, s)],
                    "rotation": [1.0, 0.0, 0.0, 0.0],
                },
            )
        )


def build_pick_and_place(
    scene: Scene,
    moves: list[PickMove],
    start_pose=(0.0, 0.3, 0.3),
) -> tuple[list[InputEvent], Envelope]:
    """A trace that grasps each object in turn and carries it to its
    destination, resting it exactly on the ground so it settles in place."""
    trace: list[InputEvent] = []
    env_points: list[tuple[float, float]] = [(0.0, 0.0)]
    cube_at = np.asarray(start_pose, dtype=np.float64)

    for mv in sorted(moves, key=lambda m: m.start):
        obj = scene.get(mv.object_id)
        pick = obj.pose.translation.copy()
        drop = np.array(
            [mv.destination[0], scene.ground_y + obj.radius, mv.destination[1]]
        )

        # Approach: cube onto the object so it becomes the candidate.
        _pose_events(trace, mv.start, mv.start + mv.approach, cube_at, pick)
        # Squeeze past the grasp threshold, hold while carrying.
        env_points.append((mv.start + mv.approach + 0.05, 0.0))
        env_points.append((mv.press_done, PRESS_LEVEL))
        # Carry: up, across, and down to the exact rest position.
        t_up = mv.press_done + 0.2
        high_a = pick + np.array([0.0, LIFT, 0.0])
        high_b = drop + np.array([0.0, LIFT, 0.0])
        leg = mv.carry / 3.0
        _pose_events(trace, t_up, t_up + leg, pick, high_a)
        _pose_events(trace, t_up + leg, t_up + 2 * leg, high_a, high_b)
        _pose_events(trace, t_up + 2 * leg, t_up + 3 * leg, high_b, drop)
        # Let go.
        env_points.append((mv.carry_done + 0.2, PRESS_LEVEL))
        env_points.append((mv.carry_done + 0.2 + mv.release, 0.0))
        cube_at = drop

    envelope = Envelope({GRASP_FACE: env_points})
    return trace, envelope

"""Grasp-by-pressure interaction: candidate selection, the grasp state
machine with hysteresis, and rigid attachment of the grasped object."""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .scene import Scene, TangibleVolume, local_point
from .spatial import Pose, compose, invert

DEFAULT_THETA_ON = 0.5
DEFAULT_THETA_OFF = 0.4

# Faces paired by opposite outward normals (+X/-X, +Y/-Y, +Z/-Z).
OPPOSITE_FACE_PAIRS = ((0, 1), (2, 3), (4, 5))


class Phase(Enum):
    NO_CANDIDATE = "no_candidate"
    CANDIDATE = "candidate"
    GRASPED = "grasped"


class PressureRangeError(ValueError):
    """Pressure outside [0,1]: calibration fault upstream."""


class GraspConsistencyError(RuntimeError):
    """Grasped object vanished from the scene."""


@dataclass(frozen=True)
class GraspState:
    phase: Phase = Phase.NO_CANDIDATE
    object_id: str | None = None  # candidate or grasped id, per phase
    relative: Pose | None = None  # object pose in volume-local frame, grasp onset
    bimanual: bool = False
    theta_on: float = DEFAULT_THETA_ON
    theta_off: float = DEFAULT_THETA_OFF

    def __post_init__(self):
        if not (0 < self.theta_off < self.theta_on <= 1):
            raise ValueError(
                f"need 0 < theta_off < theta_on <= 1, got "
                f"on={self.theta_on}, off={self.theta_off}"
            )

    @property
    def grasped_id(self) -> str | None:
        return self.object_id if self.phase is Phase.GRASPED else None


def candidate(scene: Scene, volume: TangibleVolume) -> str | None:
    """Object inside the cube and closest to its center; ties go to the
    lexicographically smallest id."""
    best_id = None
    best_key = None
    h = volume.half_extent
    for obj in scene.objects:
        p = local_point(volume, obj.pose.translation)
        if np.all(np.abs(p) <= h):
            # Squared distance, fixed summation order: ordering (and thus
            # tie-breaking) is bit-reproducible across platforms.
            key = (float(p[0]) ** 2 + float(p[1]) ** 2 + float(p[2]) ** 2, obj.id)
            if best_key is None or key < best_key:
                best_key = key
                best_id = obj.id
    return best_id


def _phase_for(candidate_id: str | None) -> Phase:
    return Phase.CANDIDATE if candidate_id is not None else Phase.NO_CANDIDATE


def step_grasp(
    state: GraspState,
    pressures,
    scene: Scene,
    volume: TangibleVolume,
) -> GraspState:
    """Advance the state machine one step given six normalized face pressures.

    Grasp begins when the max face pressure reaches theta_on and a candidate
    exists; it ends when it drops below theta_off. In between the grasped id
    is sticky regardless of what else drifts into the volume.
    """
    pressures = list(pressures)
    if len(pressures) != 6:
        raise PressureRangeError(f"expected 6 face pressures, got {len(pressures)}")
    for v in pressures:
        if not (0.0 <= v <= 1.0):
            raise PressureRangeError(f"pressure {v} outside [0, 1]")
    p = max(pressures)

    if state.phase is Phase.GRASPED:
        if p < state.theta_off:
            c = candidate(scene, volume)
            return replace(state, phase=_phase_for(c), object_id=c, relative=None, bimanual=False)
        bimanual = any(
            pressures[a] >= state.theta_on and pressures[b] >= state.theta_on
            for a, b in OPPOSITE_FACE_PAIRS
        )
        return replace(state, bimanual=bimanual)

    c = candidate(scene, volume)
    if p >= state.theta_on and c is not None:
        rel = compose(invert(volume.pose), scene.get(c).pose)
        return replace(state, phase=Phase.GRASPED, object_id=c, relative=rel, bimanual=False)
    return replace(state, phase=_phase_for(c), object_id=c, relative=None, bimanual=False)


def apply_grasp(state: GraspState, scene: Scene, volume: TangibleVolume) -> None:
    """Carry the grasped object along with the volume (rigid attachment)."""
    if state.phase is not Phase.GRASPED:
        raise ValueError("apply_grasp requires the Grasped phase")
    try:
        obj = scene.get(state.object_id)
    except KeyError:
        raise GraspConsistencyError(
            f"grasped object {state.object_id!r} is no longer in the scene"
        ) from None
    obj.pose = compose(volume.pose, state.relative)

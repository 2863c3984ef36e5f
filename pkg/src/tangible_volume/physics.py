"""Minimal rigid-body step for released objects: gravity, ground plane,
sphere-sphere and sphere-ground contacts, sleep. Spheres only, no spin,
no friction; resolution order is fixed so replays are bit-identical."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scene import Scene
from .spatial import Pose

DEFAULT_DT = 1.0 / 120.0
DEFAULT_RESTITUTION = 0.0
SLEEP_SPEED = 0.01  # m/s
SLEEP_TIME = 0.5  # s below the speed threshold before sleeping


@dataclass
class BodyState:
    object_id: str
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(3))
    asleep: bool = False
    low_speed_time: float = 0.0


def make_bodies(scene: Scene) -> dict[str, BodyState]:
    return {o.id: BodyState(o.id) for o in scene.objects if o.dynamic}


def on_release(object_id: str, bodies: dict[str, BodyState]) -> None:
    """Reactivate a just-released object with zero velocity (no throw)."""
    bodies[object_id] = BodyState(object_id)


def _wake(body: BodyState) -> None:
    body.asleep = False
    body.low_speed_time = 0.0


def step_physics(
    scene: Scene,
    bodies: dict[str, BodyState],
    dt: float = DEFAULT_DT,
    restitution: float = DEFAULT_RESTITUTION,
    grasped_id: str | None = None,
) -> None:
    """One fixed-timestep update in place.

    Grasped objects are kinematic: never integrated, but they act as
    immovable obstacles to everything else.
    """
    if not (dt > 0):
        raise ValueError("dt must be > 0")
    if not scene.gravity_enabled:
        return

    g = scene.gravity
    active = [o for o in scene.objects if o.dynamic and o.id != grasped_id and o.id in bodies]

    # Semi-implicit Euler for awake bodies.
    for obj in active:
        body = bodies[obj.id]
        if body.asleep:
            continue
        body.velocity[1] -= g * dt
        obj.pose = Pose(obj.pose.translation + body.velocity * dt, obj.pose.rotation)

    # Ground contacts first, then sphere pairs in id order, then a final
    # ground clamp so a pair push can never leave a body below the floor.
    _ground_pass(scene, active, bodies, restitution)

    supported = {
        o.id for o in active if o.pose.translation[1] - o.radius <= scene.ground_y + 1e-9
    }
    movable = sorted(active, key=lambda o: o.id)
    obstacles = [o for o in scene.objects if o.id == grasped_id or o.id not in bodies]
    for i, a in enumerate(movable):
        # Immovable obstacles push the movable sphere out by the full depth.
        for obs in obstacles:
            _resolve_pair(a, obs, bodies, restitution, movable_b=False)
        for b in movable[i + 1 :]:
            # A grounded sphere acts immovable toward an airborne one, so
            # impacts from above cannot drive it through the floor.
            if a.id in supported and b.id not in supported:
                _resolve_pair(b, a, bodies, restitution, movable_b=False)
            elif b.id in supported and a.id not in supported:
                _resolve_pair(a, b, bodies, restitution, movable_b=False)
            else:
                _resolve_pair(a, b, bodies, restitution, movable_b=True)

    _ground_pass(scene, active, bodies, restitution)

    # Sleep bookkeeping.
    for obj in active:
        body = bodies[obj.id]
        if body.asleep:
            continue
        if float(np.linalg.norm(body.velocity)) < SLEEP_SPEED:
            body.low_speed_time += dt
            if body.low_speed_time >= SLEEP_TIME:
                body.asleep = True
                body.velocity = np.zeros(3)
        else:
            body.low_speed_time = 0.0


def _ground_pass(scene, active, bodies, restitution) -> None:
    for obj in active:
        body = bodies[obj.id]
        floor = scene.ground_y + obj.radius
        if obj.pose.translation[1] < floor:
            t = obj.pose.translation.copy()
            t[1] = floor
            obj.pose = Pose(t, obj.pose.rotation)
            if body.asleep:
                _wake(body)
            if body.velocity[1] < 0:
                body.velocity[1] = -restitution * body.velocity[1]


def _resolve_pair(a, b, bodies, restitution, movable_b: bool) -> None:
    delta = a.pose.translation - b.pose.translation
    dist = float(np.linalg.norm(delta))
    depth = a.radius + b.radius - dist
    if depth <= 0:
        return
    if dist > 1e-12:
        normal = delta / dist
    else:
        normal = np.array([0.0, 1.0, 0.0])  # coincident centers: push up

    body_a = bodies[a.id]
    if body_a.asleep:
        _wake(body_a)
    if movable_b:
        body_b = bodies[b.id]
        if body_b.asleep:
            _wake(body_b)
        shift = 0.5 * depth * normal
        a.pose = Pose(a.pose.translation + shift, a.pose.rotation)
        b.pose = Pose(b.pose.translation - shift, b.pose.rotation)
        rel = float(np.dot(body_a.velocity - body_b.velocity, normal))
        if rel < 0:
            impulse = -(1 + restitution) * rel / 2.0
            body_a.velocity = body_a.velocity + impulse * normal
            body_b.velocity = body_b.velocity - impulse * normal
    else:
        a.pose = Pose(a.pose.translation + depth * normal, a.pose.rotation)
        vn = float(np.dot(body_a.velocity, normal))
        if vn < 0:
            body_a.velocity = body_a.velocity - (1 + restitution) * vn * normal


def settled(bodies: dict[str, BodyState], object_id: str) -> bool:
    """True when the object has no live body or its body is asleep."""
    body = bodies.get(object_id)
    return body is None or body.asleep

"""Deterministic session loop: folds timestamped inputs into the fixed-step
pipeline (sensors -> grasp -> attachment -> physics -> targets -> cameras),
with input recording/replay and a stable 64-bit state hash."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import physics
from .interaction import (
    DEFAULT_THETA_OFF,
    DEFAULT_THETA_ON,
    GraspState,
    Phase,
    apply_grasp,
    step_grasp,
)
from .projection import DEFAULT_FAR, DEFAULT_NEAR, FaceCamera, volume_cameras
from .scene import Scene, TangibleVolume, scene_from_dict, scene_to_dict
from .sensors import DEFAULT_CALIBRATION, Calibration, PressureFrame, normalize
from .spatial import Pose

PROTOCOL_VERSION = 1
MAX_HINTS = 3
DEFAULT_HEAD = (0.0, 0.4, 0.6)


@dataclass
class TimelineEntry:
    """One target appearance: index into scene.targets, shown `delay` seconds
    after the previous target's completion (the first: after session start)."""

    target_index: int
    delay: float = 0.0


@dataclass
class SessionConfig:
    dt: float = physics.DEFAULT_DT
    theta_on: float = DEFAULT_THETA_ON
    theta_off: float = DEFAULT_THETA_OFF
    restitution: float = physics.DEFAULT_RESTITUTION
    gravity_enabled: bool | None = None  # None: take the scene's flag
    gravity: float | None = None
    fov_condition: str = "narrow"
    headless: bool = True
    half_extent: float = 0.05
    bezel_fraction: float = 0.05
    near: float = DEFAULT_NEAR
    far: float = DEFAULT_FAR
    end_delay: float | None = None  # stop this long after the last completion
    seed: int = 0

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be > 0")
        if self.fov_condition not in ("narrow", "wide"):
            raise ValueError(f"fov_condition must be narrow or wide, got {self.fov_condition!r}")

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "theta_on": self.theta_on,
            "theta_off": self.theta_off,
            "restitution": self.restitution,
            "gravity_enabled": self.gravity_enabled,
            "gravity": self.gravity,
            "fov_condition": self.fov_condition,
            "headless": self.headless,
            "half_extent": self.half_extent,
            "bezel_fraction": self.bezel_fraction,
            "near": self.near,
            "far": self.far,
            "end_delay": self.end_delay,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class InputEvent:
    t: float
    kind: str  # pose | head | pressures | pressure | hint | fov
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, **self.data}

    @classmethod
    def from_dict(cls, d: dict) -> "InputEvent":
        d = dict(d)
        t = float(d.pop("t"))
        kind = d.pop("kind")
        return cls(t=t, kind=kind, data=d)


@dataclass
class TargetState:
    target_index: int
    appeared_at: float
    completed_at: float | None = None


@dataclass
class StateSnapshot:
    tick: int
    time: float
    volume_pose: Pose
    head: np.ndarray
    object_poses: dict[str, Pose]
    phase: Phase
    candidate_id: str | None
    grasped_id: str | None
    bimanual: bool
    pressures: list[float]
    active_targets: list[TargetState]
    hints_revealed: int
    fov_condition: str
    cameras: list[FaceCamera]
    events: list[dict]  # grasp/release/target transitions emitted this tick


def state_hash(snapshot: StateSnapshot) -> int:
    """Stable 64-bit hash of the simulation state (FNV-1a over a canonical
    little-endian serialization, floats quantized to a 1e-9 grid).

    Cameras, fov condition, and the per-tick event list are presentation
    and are deliberately excluded: headless/serving and narrow/wide runs
    of the same inputs must collide. The tick counter is also excluded so
    an idle session is a fixed point (constant hash across ticks).
    """
    h = 0xCBF29CE484222325
    prime = 0x100000001B3
    mask = 0xFFFFFFFFFFFFFFFF

    def mix(data: bytes):
        nonlocal h
        for byte in data:
            h = ((h ^ byte) * prime) & mask

    def mix_floats(values):
        for v in values:
            mix(struct.pack("<q", int(round(float(v) * 1e9))))

    mix_floats(snapshot.volume_pose.translation)
    mix_floats(snapshot.volume_pose.rotation)
    mix_floats(snapshot.head)
    for oid in sorted(snapshot.object_poses):
        mix(oid.encode("utf-8") + b"\x00")
        pose = snapshot.object_poses[oid]
        mix_floats(pose.translation)
        mix_floats(pose.rotation)
    mix(bytes([list(Phase).index(snapshot.phase)]))
    mix((snapshot.candidate_id or "").encode("utf-8") + b"\x00")
    mix((snapshot.grasped_id or "").encode("utf-8") + b"\x00")
    mix(bytes([1 if snapshot.bimanual else 0]))
    mix_floats(snapshot.pressures)
    for ts in snapshot.active_targets:
        mix(struct.pack("<q", ts.target_index))
        mix_floats([ts.appeared_at])
        mix_floats([ts.completed_at if ts.completed_at is not None else -1.0])
    mix(bytes([snapshot.hints_revealed]))
    return h


class Session:
    """Owns the single mutable simulation state; stepped one tick at a time."""

    def __init__(
        self,
        scene: Scene,
        config: SessionConfig | None = None,
        timeline: list[TimelineEntry] | None = None,
        calibration: Calibration = DEFAULT_CALIBRATION,
    ):
        self.config = config or SessionConfig()
        self.scene = scene.copy()
        if self.config.gravity_enabled is not None:
            self.scene.gravity_enabled = self.config.gravity_enabled
        if self.config.gravity is not None:
            self.scene.gravity = self.config.gravity
        self.volume = TangibleVolume(
            pose=Pose(),
            half_extent=self.config.half_extent,
            bezel_fraction=self.config.bezel_fraction,
        )
        self.head = np.array(DEFAULT_HEAD)
        self.grasp = GraspState(theta_on=self.config.theta_on, theta_off=self.config.theta_off)
        self.bodies = physics.make_bodies(self.scene)
        self.calibration = calibration
        self._raw = list(calibration.baseline)
        self.pressures = [0.0] * 6
        self.fov_condition = self.config.fov_condition
        self.hints_revealed = 0
        self.grasp_count = 0
        self.release_count = 0
        self.tick_index = 0
        self.end_time: float | None = None

        # Default timeline: every scene target appears at t = 0.
        if timeline is None:
            timeline = [TimelineEntry(i, 0.0) for i in range(len(self.scene.targets))]
        for entry in timeline:
            if not (0 <= entry.target_index < len(self.scene.targets)):
                raise ValueError(f"timeline references unknown target {entry.target_index}")
        self.timeline = timeline
        self.targets: list[TargetState] = []
        self._next_timeline = 0
        self._next_appearance = timeline[0].delay if timeline else None

        self._pending: list[tuple[float, int, InputEvent]] = []
        self._event_seq = 0
        self._recorded: list[InputEvent] = []

    # -- input ingestion -------------------------------------------------

    def submit(self, event: InputEvent) -> None:
        """Queue a timestamped input; applied at the first tick whose time
        reaches it. Ties are broken by arrival order."""
        self._validate(event)
        self._pending.append((event.t, self._event_seq, event))
        self._event_seq += 1
        self._pending.sort(key=lambda item: (item[0], item[1]))
        self._recorded.append(event)

    def submit_frame(self, frame: PressureFrame) -> None:
        """Ingest one wire frame as a pressures event at its stream time."""
        self.submit(
            InputEvent(t=frame.t / 1000.0, kind="pressures", data={"raw": list(frame.raw)})
        )

    def _refresh_pressures(self) -> None:
        frame = PressureFrame(seq=0, t=0, raw=tuple(self._raw))
        self.pressures = normalize(frame, self.calibration)

    def _validate(self, event: InputEvent) -> None:
        if event.kind == "pose":
            Pose(np.array(event.data["position"]), np.array(event.data["rotation"]))
        elif event.kind == "head":
            if len(event.data["position"]) != 3:
                raise ValueError("head position needs 3 components")
        elif event.kind == "pressures":
            raw = event.data["raw"]
            if len(raw) != 6 or any(not (0 <= v <= 1023) for v in raw):
                raise ValueError(f"bad raw pressures {raw}")
        elif event.kind == "pressure":
            face, value = event.data["face"], event.data["value"]
            if not (0 <= face <= 5) or not (0 <= value <= 1023):
                raise ValueError(f"bad pressure event face={face} value={value}")
        elif event.kind == "fov":
            if event.data["value"] not in ("narrow", "wide"):
                raise ValueError(f"bad fov value {event.data['value']!r}")
        elif event.kind != "hint":
            raise ValueError(f"unknown input kind {event.kind!r}")

    def _apply_event(self, event: InputEvent) -> None:
        if event.kind == "pose":
            self.volume.pose = Pose(
                np.array(event.data["position"], dtype=np.float64),
                np.array(event.data["rotation"], dtype=np.float64),
            )
        elif event.kind == "head":
            self.head = np.array(event.data["position"], dtype=np.float64)
        elif event.kind == "pressures":
            self._raw = [int(v) for v in event.data["raw"]]
            self._refresh_pressures()
        elif event.kind == "pressure":
            self._raw[int(event.data["face"])] = int(event.data["value"])
            self._refresh_pressures()
        elif event.kind == "hint":
            if self.hints_revealed < MAX_HINTS:
                self.hints_revealed += 1
        elif event.kind == "fov":
            self.fov_condition = event.data["value"]

    # -- stepping --------------------------------------------------------

    @property
    def time(self) -> float:
        return self.tick_index * self.config.dt

    def tick(self) -> StateSnapshot:
        """Advance one fixed step and return the resulting snapshot."""
        self.tick_index += 1
        now = self.time
        events_out: list[dict] = []

        while self._pending and self._pending[0][0] <= now + 1e-12:
            _, _, ev = self._pending.pop(0)
            before_hints = self.hints_revealed
            self._apply_event(ev)
            if ev.kind == "hint" and self.hints_revealed != before_hints:
                events_out.append({"event": "hint", "index": self.hints_revealed})

        prev = self.grasp
        self.grasp = step_grasp(self.grasp, self.pressures, self.scene, self.volume)
        released_id = None
        if prev.phase is Phase.GRASPED and self.grasp.phase is not Phase.GRASPED:
            released_id = prev.object_id
            self.release_count += 1
            physics.on_release(released_id, self.bodies)
            events_out.append({"event": "release", "object": released_id})
        if prev.phase is not Phase.GRASPED and self.grasp.phase is Phase.GRASPED:
            self.grasp_count += 1
            events_out.append({"event": "grasp", "object": self.grasp.object_id})

        if self.grasp.phase is Phase.GRASPED:
            apply_grasp(self.grasp, self.scene, self.volume)

        # A just-released object keeps its pose this tick; gravity starts
        # on the next one.
        exempt = self.grasp.grasped_id or released_id
        physics.step_physics(
            self.scene,
            self.bodies,
            dt=self.config.dt,
            restitution=self.config.restitution,
            grasped_id=exempt,
        )

        self._step_targets(now, events_out)

        cameras: list[FaceCamera] = []
        if not self.config.headless:
            cameras = volume_cameras(self.volume, self.head, self.config.near, self.config.far)

        return self.snapshot(cameras=cameras, events=events_out)

    def _step_targets(self, now: float, events_out: list[dict]) -> None:
        if self._next_appearance is not None and now >= self._next_appearance - 1e-12:
            entry = self.timeline[self._next_timeline]
            self.targets.append(TargetState(entry.target_index, appeared_at=now))
            events_out.append({"event": "target-appeared", "target": entry.target_index})
            self._next_timeline += 1
            self._next_appearance = None

        for ts in self.targets:
            if ts.completed_at is not None:
                continue
            spec = self.scene.targets[ts.target_index]
            obj = self.scene.get(spec.required_object)
            from .study import check_target  # local import avoids a cycle

            if check_target(
                obj,
                spec,
                grasped=self.grasp.grasped_id == obj.id,
                asleep=physics.settled(self.bodies, obj.id),
            ):
                ts.completed_at = now
                events_out.append({"event": "target-complete", "target": ts.target_index})
                if self._next_timeline < len(self.timeline):
                    self._next_appearance = now + self.timeline[self._next_timeline].delay
                elif self.config.end_delay is not None:
                    self.end_time = now + self.config.end_delay

    def snapshot(self, cameras: list[FaceCamera] | None = None, events=None) -> StateSnapshot:
        grasped = self.grasp.grasped_id
        return StateSnapshot(
            tick=self.tick_index,
            time=self.time,
            volume_pose=self.volume.pose,
            head=self.head.copy(),
            object_poses={o.id: o.pose for o in self.scene.objects},
            phase=self.grasp.phase,
            candidate_id=self.grasp.object_id if self.grasp.phase is Phase.CANDIDATE else None,
            grasped_id=grasped,
            bimanual=self.grasp.bimanual,
            pressures=list(self.pressures),
            active_targets=[replace(ts) for ts in self.targets],
            hints_revealed=self.hints_revealed,
            fov_condition=self.fov_condition,
            cameras=cameras or [],
            events=list(events or []),
        )

    def run(self, duration: float) -> StateSnapshot:
        """Tick until `duration` seconds of simulated time (or the scheduled
        end time, if one is set earlier by the target timeline)."""
        last = self.snapshot()
        while self.time + 1e-12 < duration:
            last = self.tick()
            if self.end_time is not None and self.time >= self.end_time - 1e-12:
                break
        return last

    def done(self) -> bool:
        return self.end_time is not None and self.time >= self.end_time - 1e-12


# -- record / replay -----------------------------------------------------


def write_recording(
    path,
    scene: Scene,
    config: SessionConfig,
    events: list[InputEvent],
    ticks: int,
    timeline: list[TimelineEntry] | None = None,
) -> None:
    """Raw-input recording: a header with the full setup, one line per input
    event, and the tick count to replay to."""
    with open(path, "w") as f:
        header = {
            "v": PROTOCOL_VERSION,
            "kind": "header",
            "scene": scene_to_dict(scene),
            "config": config.to_dict(),
            "timeline": [
                {"target_index": e.target_index, "delay": e.delay} for e in (timeline or [])
            ]
            if timeline is not None
            else None,
        }
        f.write(json.dumps(header) + "\n")
        for ev in events:
            f.write(json.dumps({"kind": "event", "data": ev.to_dict()}) + "\n")
        f.write(json.dumps({"kind": "end", "ticks": ticks}) + "\n")


def load_recording(path) -> tuple[Scene, SessionConfig, list[TimelineEntry] | None, list[InputEvent], int]:
    scene = None
    config = None
    timeline = None
    events: list[InputEvent] = []
    ticks = 0
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            doc = json.loads(line)
            kind = doc.get("kind")
            if kind == "header":
                if doc.get("v") != PROTOCOL_VERSION:
                    raise ValueError(f"unsupported recording version {doc.get('v')}")
                scene = scene_from_dict(doc["scene"])
                config = SessionConfig(**doc["config"])
                if doc.get("timeline") is not None:
                    timeline = [
                        TimelineEntry(e["target_index"], e["delay"]) for e in doc["timeline"]
                    ]
            elif kind == "event":
                events.append(InputEvent.from_dict(doc["data"]))
            elif kind == "end":
                ticks = int(doc["ticks"])
    if scene is None or config is None:
        raise ValueError("recording has no header line")
    return scene, config, timeline, events, ticks


def replay(path, headless: bool = True) -> list[int]:
    """Re-run a recording; returns the per-tick state hashes."""
    scene, config, timeline, events, ticks = load_recording(path)
    config = replace(config, headless=headless)
    session = Session(scene, config, timeline=timeline)
    for ev in events:
        session.submit(ev)
    return [state_hash(session.tick()) for _ in range(ticks)]

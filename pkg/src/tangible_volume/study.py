"""Scripted study scenarios: target completion, recall scoring, and the
deterministic replay of a task script into run metrics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .scene import Scene, TargetSpec, VirtualObject, load_scene_file, scene_from_dict
from .sensors import Envelope, LineReassembler, emulate_stream, encode_frame
from .session import InputEvent, Session, SessionConfig, TimelineEntry

HINTS = (
    "Put the cube onto the apple",
    "Press the cube to grab the apple",
    "Move the cube while maintaining the pressure",
)


@dataclass
class RunMetrics:
    completion_times: list[float | None]  # per timeline target; None = timeout
    hints_used: int
    grasp_count: int
    release_count: int
    recall_score: float | None = None
    appearance_times: list[float] = field(default_factory=list)
    end_time: float = 0.0
    timed_out: bool = False

    def to_dict(self) -> dict:
        return {
            "completion_times": self.completion_times,
            "appearance_times": self.appearance_times,
            "hints_used": self.hints_used,
            "grasp_count": self.grasp_count,
            "release_count": self.release_count,
            "recall_score": self.recall_score,
            "end_time": self.end_time,
            "timed_out": self.timed_out,
        }

    def csv_header(self) -> str:
        cols = ["end_time", "timed_out", "hints_used", "grasp_count", "release_count", "recall_score"]
        cols += [f"completion_time_{i}" for i in range(len(self.completion_times))]
        return ",".join(cols)

    def csv_row(self) -> str:
        vals = [
            f"{self.end_time:.6f}",
            str(int(self.timed_out)),
            str(self.hints_used),
            str(self.grasp_count),
            str(self.release_count),
            "" if self.recall_score is None else f"{self.recall_score:.6f}",
        ]
        vals += ["" if t is None else f"{t:.6f}" for t in self.completion_times]
        return ",".join(vals)


def check_target(obj: VirtualObject, target: TargetSpec, *, grasped: bool, asleep: bool) -> bool:
    """Complete when the object rests inside the circle: horizontal distance
    within the radius, not held, and settled."""
    if obj.id != target.required_object:
        raise ValueError(f"target requires {target.required_object!r}, got {obj.id!r}")
    if grasped or not asleep:
        return False
    d = obj.pose.translation - target.center
    return float(np.hypot(d[0], d[2])) <= target.radius


def recall_score(
    reported: dict[str, np.ndarray],
    actual: dict[str, np.ndarray],
    norm_distance: float,
) -> float:
    """Mean per-object positional correspondence in [0, 1]; 1 = perfect.

    Each object contributes max(0, 1 - error/norm_distance). A stand-in
    with the usual range and orientation of published recall metrics.
    """
    if set(reported) != set(actual):
        raise ValueError(
            f"reported/actual id sets differ: {sorted(set(reported) ^ set(actual))}"
        )
    if not (norm_distance > 0):
        raise ValueError("norm_distance must be > 0")
    if not reported:
        raise ValueError("no objects to score")
    total = 0.0
    for oid in sorted(reported):
        err = float(np.linalg.norm(np.asarray(reported[oid]) - np.asarray(actual[oid])))
        total += max(0.0, 1.0 - err / norm_distance)
    return total / len(reported)


def scene_diagonal(scene: Scene) -> float:
    """Bounding-box diagonal of the object positions (recall normalization)."""
    pts = np.array([o.pose.translation for o in scene.objects])
    if len(pts) == 0:
        return 1.0
    diag = float(np.linalg.norm(pts.max(axis=0) - pts.min(axis=0)))
    return diag if diag > 0 else 1.0


@dataclass
class TaskScript:
    scene: Scene
    duration: float
    timeline: list[TimelineEntry]
    trace: list[InputEvent]
    envelope: Envelope
    fov_condition: str = "narrow"
    end_delay: float | None = None
    theta_on: float | None = None
    theta_off: float | None = None
    recall_reported: dict[str, np.ndarray] | None = None
    norm_distance: float | None = None

    def __post_init__(self):
        times = [ev.t for ev in self.trace]
        if times != sorted(times):
            raise ValueError("trace timestamps must be monotone")
        known = {o.id for o in self.scene.objects}
        if self.recall_reported is not None:
            unknown = set(self.recall_reported) - known
            if unknown:
                raise ValueError(f"recall report references unknown objects {sorted(unknown)}")

    @classmethod
    def from_dict(cls, doc: dict, base_dir=None) -> "TaskScript":
        if "scene" in doc:
            scene = scene_from_dict(doc["scene"])
        else:
            path = doc["scene_path"]
            if base_dir is not None:
                import os

                path = os.path.join(base_dir, path)
            scene = load_scene_file(path)
        return cls(
            scene=scene,
            duration=float(doc["duration"]),
            timeline=[
                TimelineEntry(int(e["target_index"]), float(e.get("delay", 0.0)))
                for e in doc.get("timeline", [])
            ],
            trace=[InputEvent.from_dict(e) for e in doc.get("trace", [])],
            envelope=Envelope.from_dict(doc.get("envelope", {})),
            fov_condition=doc.get("fov_condition", "narrow"),
            end_delay=doc.get("end_delay"),
            theta_on=doc.get("theta_on"),
            theta_off=doc.get("theta_off"),
            recall_reported={
                k: np.array(v, dtype=np.float64) for k, v in doc["recall_reported"].items()
            }
            if doc.get("recall_reported")
            else None,
            norm_distance=doc.get("norm_distance"),
        )

    @classmethod
    def load(cls, path) -> "TaskScript":
        import os

        with open(path) as f:
            doc = json.load(f)
        return cls.from_dict(doc, base_dir=os.path.dirname(os.fspath(path)))


def build_session(script: TaskScript, fov_condition: str | None = None) -> Session:
    """Session wired for a script run, with the full sensor wire exercised:
    the envelope is emulated to 10 Hz frames, encoded, re-parsed, and fed."""
    config = SessionConfig(
        fov_condition=fov_condition or script.fov_condition,
        end_delay=script.end_delay,
        headless=True,
        theta_on=script.theta_on if script.theta_on is not None else SessionConfig.theta_on,
        theta_off=script.theta_off if script.theta_off is not None else SessionConfig.theta_off,
    )
    session = Session(script.scene, config, timeline=list(script.timeline))

    wire = b"".join(encode_frame(f) for f in emulate_stream(script.envelope, script.duration))
    frames, errors = LineReassembler().feed(wire)
    if errors:
        raise RuntimeError(f"emulated stream produced parse errors: {errors}")
    for frame in frames:
        session.submit_frame(frame)
    for ev in script.trace:
        session.submit(ev)
    return session


def run_scenario(script: TaskScript, fov_condition: str | None = None) -> RunMetrics:
    """Deterministically replay a task script and measure it."""
    session = build_session(script, fov_condition)
    session.run(script.duration)

    by_index = {ts.target_index: ts for ts in session.targets}
    completion = []
    appearance = []
    for entry in script.timeline:
        ts = by_index.get(entry.target_index)
        if ts is None:
            completion.append(None)
            continue
        appearance.append(ts.appeared_at)
        completion.append(
            None if ts.completed_at is None else ts.completed_at - ts.appeared_at
        )

    score = None
    if script.recall_reported is not None:
        actual = {oid: session.scene.get(oid).pose.translation for oid in script.recall_reported}
        norm = script.norm_distance or scene_diagonal(script.scene)
        score = recall_score(script.recall_reported, actual, norm)

    return RunMetrics(
        completion_times=completion,
        appearance_times=appearance,
        hints_used=session.hints_revealed,
        grasp_count=session.grasp_count,
        release_count=session.release_count,
        recall_score=score,
        end_time=session.time,
        timed_out=any(c is None for c in completion),
    )

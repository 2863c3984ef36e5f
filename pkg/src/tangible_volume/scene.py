"""World-anchored scene state and the JSON scene document format."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .spatial import Pose, invert, transform_point


class SceneFormatError(ValueError):
    """Malformed scene document; message names the offending field."""


@dataclass
class VirtualObject:
    id: str
    pose: Pose
    radius: float
    label: str = ""
    dynamic: bool = True

    def __post_init__(self):
        if not self.id:
            raise SceneFormatError("object id must be a non-empty string")
        if not (self.radius > 0):
            raise SceneFormatError(f"object {self.id!r}: radius must be > 0, got {self.radius}")


@dataclass
class TangibleVolume:
    """The handheld cube: pose in world frame, half side length, bezel inset."""

    pose: Pose = field(default_factory=Pose)
    half_extent: float = 0.05
    bezel_fraction: float = 0.05

    def __post_init__(self):
        if not (self.half_extent > 0):
            raise ValueError("half_extent must be > 0")
        if not (0 <= self.bezel_fraction < 0.4):
            raise ValueError("bezel_fraction must be in [0, 0.4)")


@dataclass
class TargetSpec:
    """A drop target: circle on the ground labeled with an object silhouette."""

    center: np.ndarray
    radius: float
    required_object: str
    silhouette_label: str = ""

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=np.float64)
        if not (self.radius > 0):
            raise SceneFormatError(f"target for {self.required_object!r}: radius must be > 0")


@dataclass
class Scene:
    objects: list[VirtualObject] = field(default_factory=list)
    gravity_enabled: bool = True
    gravity: float = 9.81
    ground_y: float = 0.0
    targets: list[TargetSpec] = field(default_factory=list)

    def __post_init__(self):
        ids = [o.id for o in self.objects]
        dup = {i for i in ids if ids.count(i) > 1}
        if dup:
            raise SceneFormatError(f"duplicate object ids: {sorted(dup)}")
        if self.gravity < 0:
            raise SceneFormatError("gravity must be >= 0")

    def get(self, object_id: str) -> VirtualObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(object_id)

    def copy(self) -> "Scene":
        return Scene(
            objects=[replace(o, pose=o.pose) for o in self.objects],
            gravity_enabled=self.gravity_enabled,
            gravity=self.gravity,
            ground_y=self.ground_y,
            targets=list(self.targets),
        )


_OBJECT_KEYS = {"id", "label", "position", "rotation", "radius", "dynamic"}
_SCENE_KEYS = {"objects", "gravity_enabled", "gravity", "ground_y", "targets"}
_TARGET_KEYS = {"center", "radius", "required_object", "silhouette_label"}


def _check_keys(d: dict, allowed: set, where: str):
    unknown = set(d) - allowed
    if unknown:
        raise SceneFormatError(f"{where}: unknown keys {sorted(unknown)}")


def _parse_object(entry: dict, index: int) -> VirtualObject:
    where = f"objects[{index}]"
    if not isinstance(entry, dict):
        raise SceneFormatError(f"{where}: expected an object record")
    _check_keys(entry, _OBJECT_KEYS, where)
    try:
        pos = entry.get("position", [0, 0, 0])
        rot = entry.get("rotation", [1, 0, 0, 0])
        if len(pos) != 3:
            raise SceneFormatError(f"{where}.position: expected 3 components")
        if len(rot) != 4:
            raise SceneFormatError(f"{where}.rotation: expected 4 components (w,x,y,z)")
        return VirtualObject(
            id=entry["id"],
            pose=Pose(np.array(pos, dtype=np.float64), np.array(rot, dtype=np.float64)),
            radius=float(entry["radius"]),
            label=entry.get("label", ""),
            dynamic=bool(entry.get("dynamic", True)),
        )
    except KeyError as e:
        raise SceneFormatError(f"{where}: missing required key {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, SceneFormatError):
            raise
        raise SceneFormatError(f"{where}: {e}") from None


def _parse_target(entry: dict, index: int) -> TargetSpec:
    where = f"targets[{index}]"
    if not isinstance(entry, dict):
        raise SceneFormatError(f"{where}: expected a target record")
    _check_keys(entry, _TARGET_KEYS, where)
    try:
        center = entry["center"]
        if len(center) != 3:
            raise SceneFormatError(f"{where}.center: expected 3 components")
        return TargetSpec(
            center=np.array(center, dtype=np.float64),
            radius=float(entry["radius"]),
            required_object=entry["required_object"],
            silhouette_label=entry.get("silhouette_label", ""),
        )
    except KeyError as e:
        raise SceneFormatError(f"{where}: missing required key {e.args[0]!r}") from None


def scene_from_dict(doc: dict) -> Scene:
    if not isinstance(doc, dict):
        raise SceneFormatError("scene document must be a JSON object")
    _check_keys(doc, _SCENE_KEYS, "scene")
    objects = [_parse_object(e, i) for i, e in enumerate(doc.get("objects", []))]
    targets = [_parse_target(e, i) for i, e in enumerate(doc.get("targets", []))]
    scene = Scene(
        objects=objects,
        gravity_enabled=bool(doc.get("gravity_enabled", True)),
        gravity=float(doc.get("gravity", 9.81)),
        ground_y=float(doc.get("ground_y", 0.0)),
        targets=targets,
    )
    known = {o.id for o in scene.objects}
    for t in scene.targets:
        if t.required_object not in known:
            raise SceneFormatError(f"target references unknown object {t.required_object!r}")
        if abs(t.center[1] - scene.ground_y) > 1e-9:
            raise SceneFormatError(
                f"target for {t.required_object!r}: center.y must equal ground_y"
            )
    return scene


def load_scene(text: str) -> Scene:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SceneFormatError(f"invalid JSON: {e}") from None
    return scene_from_dict(doc)


def load_scene_file(path) -> Scene:
    with open(path) as f:
        return load_scene(f.read())


def scene_to_dict(scene: Scene) -> dict:
    return {
        "objects": [
            {
                "id": o.id,
                "label": o.label,
                "position": [float(v) for v in o.pose.translation],
                "rotation": [float(v) for v in o.pose.rotation],
                "radius": o.radius,
                "dynamic": o.dynamic,
            }
            for o in scene.objects
        ],
        "gravity_enabled": scene.gravity_enabled,
        "gravity": scene.gravity,
        "ground_y": scene.ground_y,
        "targets": [
            {
                "center": [float(v) for v in t.center],
                "radius": t.radius,
                "required_object": t.required_object,
                "silhouette_label": t.silhouette_label,
            }
            for t in scene.targets
        ],
    }


def save_scene(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), indent=2)


def local_point(volume: TangibleVolume, world: np.ndarray) -> np.ndarray:
    """World point expressed in the volume's local frame."""
    return transform_point(invert(volume.pose), world)


def contains(volume: TangibleVolume, world: np.ndarray) -> bool:
    p = local_point(volume, world)
    return bool(np.all(np.abs(p) <= volume.half_extent))

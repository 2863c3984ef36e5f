#!/usr/bin/env python3
"""Regenerate the committed scenario files in scenarios/.

The traces are authored with tangible_volume.authoring and verified by the
test suite (tests/test_study.py replays them and checks the outcomes).
"""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from tangible_volume.authoring import PickMove, build_pick_and_place
from tangible_volume.scene import load_scene, save_scene

OUT = os.path.join(os.path.dirname(__file__), "..", "scenarios")

STUDY1_SCENE = {
    "objects": [
        {
            "id": "apple",
            "label": "apple",
            "position": [0.25, 0.04, 0.0],
            "rotation": [1, 0, 0, 0],
            "radius": 0.04,
            "dynamic": True,
        }
    ],
    "gravity_enabled": True,
    "gravity": 9.81,
    "ground_y": 0.0,
    "targets": [
        {
            "center": [0.55, 0.0, 0.1],
            "radius": 0.08,
            "required_object": "apple",
            "silhouette_label": "apple",
        }
    ],
}

STUDY2_OBJECTS = [
    ("apple", [0.25, 0.04, 0.00]),
    ("banana", [-0.30, 0.04, 0.15]),
    ("cup", [0.10, 0.04, -0.35]),
    ("die", [-0.15, 0.04, -0.20]),
    ("key", [0.40, 0.04, 0.30]),
    ("teapot", [-0.05, 0.04, 0.40]),
]

STUDY2_SCENE = {
    "objects": [
        {
            "id": oid,
            "label": oid,
            "position": pos,
            "rotation": [1, 0, 0, 0],
            "radius": 0.04,
            "dynamic": True,
        }
        for oid, pos in STUDY2_OBJECTS
    ],
    "gravity_enabled": True,
    "gravity": 9.81,
    "ground_y": 0.0,
    "targets": [
        {"center": [0.55, 0.0, -0.10], "radius": 0.08, "required_object": "apple", "silhouette_label": "apple"},
        {"center": [-0.55, 0.0, -0.05], "radius": 0.08, "required_object": "banana", "silhouette_label": "banana"},
        {"center": [0.30, 0.0, 0.55], "radius": 0.08, "required_object": "cup", "silhouette_label": "cup"},
    ],
}


def envelope_doc(envelope):
    return {str(k): [[t, v] for t, v in pts] for k, pts in envelope.faces.items()}


def study1_perfect():
    scene = load_scene(json.dumps(STUDY1_SCENE))
    trace, envelope = build_pick_and_place(
        scene, [PickMove("apple", (0.55, 0.1), start=1.0)]
    )
    return {
        "v": 1,
        "scene": STUDY1_SCENE,
        "duration": 12.0,
        "fov_condition": "narrow",
        "timeline": [{"target_index": 0, "delay": 0.0}],
        "trace": [ev.to_dict() for ev in trace],
        "envelope": envelope_doc(envelope),
    }


def study2_run():
    scene = load_scene(json.dumps(STUDY2_SCENE))
    # Target cadence: first at 15 s, then 10 s and 12 s after the previous
    # completion, 20 s tail after the third. Move starts leave margin for
    # the appearance times established by replaying the script.
    moves = [
        PickMove("apple", (0.55, -0.10), start=16.0),
        PickMove("banana", (-0.55, -0.05), start=32.0),
        PickMove("cup", (0.30, 0.55), start=50.0),
    ]
    trace, envelope = build_pick_and_place(scene, moves)
    # Reported-from-memory positions: three exact, three slightly off.
    reported = {
        "apple": [0.55, 0.04, -0.10],
        "banana": [-0.55, 0.04, -0.05],
        "cup": [0.30, 0.04, 0.55],
        "die": [-0.12, 0.04, -0.24],
        "key": [0.36, 0.04, 0.33],
        "teapot": [-0.02, 0.04, 0.44],
    }
    return {
        "v": 1,
        "scene": STUDY2_SCENE,
        "duration": 120.0,
        "fov_condition": "narrow",
        "timeline": [
            {"target_index": 0, "delay": 15.0},
            {"target_index": 1, "delay": 10.0},
            {"target_index": 2, "delay": 12.0},
        ],
        "end_delay": 20.0,
        "trace": [ev.to_dict() for ev in trace],
        "envelope": envelope_doc(envelope),
        "recall_reported": reported,
    }


def main():
    os.makedirs(OUT, exist_ok=True)
    with open(os.path.join(OUT, "study1_scene.json"), "w") as f:
        f.write(save_scene(load_scene(json.dumps(STUDY1_SCENE))))
    with open(os.path.join(OUT, "study2_scene.json"), "w") as f:
        f.write(save_scene(load_scene(json.dumps(STUDY2_SCENE))))
    with open(os.path.join(OUT, "study1_perfect.json"), "w") as f:
        json.dump(study1_perfect(), f)
    with open(os.path.join(OUT, "study2_run.json"), "w") as f:
        json.dump(study2_run(), f)
    print(f"wrote scenario files to {os.path.abspath(OUT)}")


if __name__ == "__main__":
    main()

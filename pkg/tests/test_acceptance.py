"""Exit-gate suite: one test per headline requirement, each printing a single
PASS line with the measured margin (run with -s or -rP to see them). Every
tolerance here is the contract value, not a loosened one."""

import os
import time

import numpy as np

from tangible_volume.interaction import Phase, candidate
from tangible_volume.physics import make_bodies, step_physics
from tangible_volume.projection import off_axis_camera, volume_cameras
from tangible_volume.scene import Scene, TangibleVolume, VirtualObject, load_scene_file
from tangible_volume.sensors import Envelope, LineReassembler, PressureFrame, emulate_stream, encode_frame, parse_frame
from tangible_volume.service import SessionService
from tangible_volume.session import (
    InputEvent,
    Session,
    SessionConfig,
    replay,
    state_hash,
    write_recording,
)
from tangible_volume.spatial import Pose, compose, invert, transform_point
from tangible_volume.study import TaskScript, build_session, recall_score, run_scenario

from conftest import random_pose, random_quat
from test_interaction import brute_force_candidate
from test_projection import eye_in_front, random_quad
from test_sensors import MALFORMED
from test_session import random_events

HERE = os.path.dirname(__file__)
SCENARIOS = os.path.join(HERE, "..", "scenarios")

FACE_NORMALS = [
    np.array(v, dtype=np.float64)
    for v in [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
]
ADJACENT_PAIRS = [
    (i, j)
    for i in range(6)
    for j in range(i + 1, 6)
    if not np.allclose(FACE_NORMALS[i], -FACE_NORMALS[j])
]


def report(name, detail):
    print(f"PASS {name}: {detail}")


def test_projection_corner_mapping():
    rng = np.random.default_rng(1)
    expected = np.array([[-1, -1], [1, -1], [-1, 1], [1, 1]], dtype=float)
    worst = 0.0
    t0 = time.perf_counter()
    for _ in range(1000):
        quad = random_quad(rng)
        eye = eye_in_front(rng, quad)
        cam = off_axis_camera(eye, quad, near=rng.uniform(0.01, 0.2), far=rng.uniform(10, 100))
        ndc = np.array([cam.to_ndc(c)[:2] for c in quad.corners()])
        worst = max(worst, float(np.max(np.abs(ndc - expected))))
    elapsed = time.perf_counter() - t0
    assert worst < 1e-6
    assert elapsed < 5.0
    report(
        "projection corner mapping",
        f"1000 random frusta, max |NDC - corner| = {worst:.2e} (tol 1e-6), {elapsed:.2f}s",
    )


def test_seam_consistency():
    rng = np.random.default_rng(2)
    worst = 0.0
    checked = 0
    while checked < 1000:
        vol = TangibleVolume(pose=random_pose(rng), half_extent=0.05, bezel_fraction=0.0)
        h = vol.half_extent
        fa, fb = ADJACENT_PAIRS[rng.integers(len(ADJACENT_PAIRS))]
        na, nb = FACE_NORMALS[fa], FACE_NORMALS[fb]
        axis = np.cross(na, nb)
        e0 = h * (na + nb) - h * axis
        e1 = h * (na + nb) + h * axis
        s = float(rng.uniform(0.0, 1.0))
        point = transform_point(vol.pose, e0 + s * (e1 - e0))
        head_local = (na + nb) * rng.uniform(0.5, 2.0) + axis * rng.uniform(-0.3, 0.3)
        cams = {c.face_index: c for c in volume_cameras(vol, transform_point(vol.pose, head_local))}
        if fa not in cams or fb not in cams:
            continue
        for face in (fa, fb):
            cam = cams[face]
            n0 = cam.to_ndc(transform_point(vol.pose, e0))[:2]
            n1 = cam.to_ndc(transform_point(vol.pose, e1))[:2]
            np_ = cam.to_ndc(point)[:2]
            # Edge parameter recovered from the NDC positions of the edge.
            s_face = float(np.dot(np_ - n0, n1 - n0) / np.dot(n1 - n0, n1 - n0))
            worst = max(worst, abs(s_face - s))
        checked += 1
    assert worst < 1e-6
    report(
        "seam consistency",
        f"1000 shared-edge points across adjacent faces, max parameter error = {worst:.2e} (tol 1e-6)",
    )


def test_selection_matches_brute_force():
    rng = np.random.default_rng(3)
    ties = 0
    for _ in range(1000):
        vol = TangibleVolume(pose=random_pose(rng, scale=0.3), half_extent=0.15)
        objects = []
        for i in range(int(rng.integers(0, 21))):
            if rng.random() < 0.3:
                p_local = rng.uniform(-0.2, 0.2, size=3)
                objects.append(
                    VirtualObject(id=f"t{i}a", pose=Pose(transform_point(vol.pose, p_local)), radius=0.02)
                )
                objects.append(
                    VirtualObject(id=f"t{i}b", pose=Pose(transform_point(vol.pose, -p_local)), radius=0.02)
                )
                ties += 1
            else:
                objects.append(
                    VirtualObject(id=f"o{i}", pose=Pose(rng.uniform(-0.4, 0.4, size=3)), radius=0.02)
                )
        scene = Scene(objects=objects)
        assert candidate(scene, vol) == brute_force_candidate(scene, vol)
    report(
        "selection oracle",
        f"1000 random scenes (incl. {ties} constructed distance ties) match brute force exactly",
    )


def test_grasp_rigidity_over_long_randomized_trace():
    rng = np.random.default_rng(4)
    scene = Scene(
        objects=[VirtualObject(id="apple", pose=Pose(np.array([0.0, 0.04, 0.0])), radius=0.04)]
    )
    config = SessionConfig()
    session = Session(scene, config)
    dt = config.dt
    cycle_ticks = 500
    cycles = 20
    grab = np.array([0.0, 0.04, 0.0])
    for k in range(cycles):
        t0 = k * cycle_ticks * dt
        session.submit(
            InputEvent(t=t0 + 0.1, kind="pose", data={"position": list(grab), "rotation": [1, 0, 0, 0]})
        )
        session.submit(InputEvent(t=t0 + 0.3, kind="pressures", data={"raw": [800, 0, 0, 0, 0, 0]}))
        for j in range(5):
            q = random_quat(rng)
            session.submit(
                InputEvent(
                    t=t0 + 0.5 + 0.4 * j,
                    kind="pose",
                    data={
                        "position": [
                            float(rng.uniform(-0.4, 0.4)),
                            float(rng.uniform(0.1, 0.4)),
                            float(rng.uniform(-0.4, 0.4)),
                        ],
                        "rotation": [float(v) for v in q],
                    },
                )
            )
        drop = np.array([rng.uniform(-0.4, 0.4), 0.25, rng.uniform(-0.4, 0.4)])
        session.submit(
            InputEvent(t=t0 + 2.6, kind="pose", data={"position": list(drop), "rotation": [1, 0, 0, 0]})
        )
        session.submit(InputEvent(t=t0 + 2.8, kind="pressures", data={"raw": [0] * 6}))
        grab = np.array([drop[0], 0.04, drop[2]])

    worst_dev = 0.0
    prev_grasped = False
    releases_checked = 0
    for _ in range(cycles * cycle_ticks):
        before = session.scene.get("apple").pose
        snap = session.tick()
        grasped = snap.grasped_id == "apple"
        if grasped:
            rel = compose(invert(session.volume.pose), session.scene.get("apple").pose)
            dev = max(
                float(np.max(np.abs(rel.translation - session.grasp.relative.translation))),
                float(
                    min(
                        np.max(np.abs(rel.rotation - session.grasp.relative.rotation)),
                        np.max(np.abs(rel.rotation + session.grasp.relative.rotation)),
                    )
                ),
            )
            worst_dev = max(worst_dev, dev)
        if prev_grasped and not grasped:
            # Detach leaves the world pose exactly as it was at release.
            now = session.scene.get("apple").pose
            assert np.array_equal(now.translation, before.translation)
            assert np.array_equal(now.rotation, before.rotation)
            releases_checked += 1
        prev_grasped = grasped
    assert session.grasp_count >= 20 and session.release_count >= 20
    assert releases_checked >= 20
    assert worst_dev < 1e-9
    report(
        "grasp rigidity",
        f"{cycles * cycle_ticks} ticks, {session.grasp_count} grasp/release cycles, "
        f"max volume-local deviation = {worst_dev:.2e} (tol 1e-9), "
        f"{releases_checked} in-place detaches",
    )


def _feed_envelope(session, envelope, duration):
    reasm = LineReassembler()
    for frame in emulate_stream(envelope, duration):
        frames, errors = reasm.feed(encode_frame(frame))
        assert not errors
        for f in frames:
            session.submit_frame(f)


def test_pressure_hysteresis_and_latency():
    scene = Scene(
        objects=[VirtualObject(id="apple", pose=Pose(np.array([0.0, 0.04, 0.0])), radius=0.04)],
        gravity_enabled=False,
    )
    on_pose = InputEvent(
        t=0.001, kind="pose", data={"position": [0.0, 0.04, 0.0], "rotation": [1, 0, 0, 0]}
    )

    # Oscillation strictly inside (theta_off, theta_on) never transitions.
    band = [(0.2 * i, 0.42 if i % 2 == 0 else 0.48) for i in range(51)]
    idle = Session(scene, SessionConfig())
    idle.submit(on_pose)
    _feed_envelope(idle, Envelope({4: band}), 10.0)
    idle.run(10.0)
    assert idle.grasp_count == 0 and idle.release_count == 0

    held = Session(scene, SessionConfig())
    held.submit(on_pose)
    held.submit(InputEvent(t=0.05, kind="pressures", data={"raw": [0, 0, 0, 0, 818, 0]}))
    shifted = [(1.0 + t, v) for t, v in band]
    _feed_envelope(held, Envelope({4: [(0.0, 0.8), (0.999, 0.8)] + shifted}), 11.0)
    held.run(11.0)
    assert held.grasp_count == 1 and held.release_count == 0
    assert held.grasp.phase is Phase.GRASPED

    # A crossing of theta_on shows up within one 100 ms sensor sample.
    t_cross = 1.234
    latency_session = Session(scene, SessionConfig())
    latency_session.submit(on_pose)
    env = Envelope({4: [(0.0, 0.0), (t_cross, 0.0), (t_cross + 1e-4, 0.8)]})
    _feed_envelope(latency_session, env, 3.0)
    grasp_time = None
    while latency_session.time < 3.0 and grasp_time is None:
        snap = latency_session.tick()
        if any(ev.get("event") == "grasp" for ev in snap.events):
            grasp_time = snap.time
    assert grasp_time is not None
    latency = grasp_time - t_cross
    assert latency <= 0.1 + 2 * latency_session.config.dt
    report(
        "pressure hysteresis",
        f"10 s in-band oscillation: 0 transitions (idle and held); "
        f"engage latency after threshold crossing = {latency * 1000:.1f} ms (<= one 100 ms sample)",
    )


def test_physics_settling():
    scene = Scene(
        objects=[VirtualObject(id="ball", pose=Pose(np.array([0.0, 1.0, 0.0])), radius=0.05)]
    )
    bodies = make_bodies(scene)
    dt = 1.0 / 120.0
    ball = scene.get("ball")
    energy = scene.gravity * ball.pose.translation[1]
    max_energy_gain = -np.inf
    max_penetration = 0.0
    for _ in range(120):
        step_physics(scene, bodies, dt=dt, restitution=0.0)
        y = float(ball.pose.translation[1])
        v = bodies["ball"].velocity
        e = scene.gravity * y + 0.5 * float(np.dot(v, v))
        max_energy_gain = max(max_energy_gain, e - energy)
        energy = e
        max_penetration = max(max_penetration, scene.ground_y + ball.radius - y)
    final_y = float(ball.pose.translation[1])
    assert abs(final_y - 0.05) <= 1e-3
    assert max_energy_gain <= 1e-6
    assert max_penetration <= 1e-4
    report(
        "physics settling",
        f"rest height {final_y:.6f} m (target 0.05 +/- 1e-3) at t=1.0 s, "
        f"max per-step energy gain = {max_energy_gain:.2e} (tol 1e-6), "
        f"max penetration = {max_penetration:.2e} (tol 1e-4)",
    )


def test_protocol_round_trip_and_resync():
    import random

    rnd = random.Random(42)
    for _ in range(100_000):
        frame = PressureFrame(
            seq=rnd.randrange(2**32),
            t=rnd.randrange(10**8),
            raw=tuple(rnd.randrange(1024) for _ in range(6)),
        )
        assert parse_frame(encode_frame(frame)) == frame

    malformed = MALFORMED[:-1]
    assert len(malformed) >= 10
    reasm = LineReassembler()
    valid = b"P 1 100 1 2 3 4 5 6\n"
    for bad in malformed:
        frames, errors = reasm.feed(bad + valid)
        assert len(errors) == 1, bad
        assert len(frames) == 1 and frames[0].raw == (1, 2, 3, 4, 5, 6)
    report(
        "wire protocol",
        f"100000-frame encode/parse round trip exact; {len(malformed)} malformed lines "
        f"each rejected with resync on the next frame",
    )


def test_determinism_record_replay_and_serving(tmp_path):
    scene = load_scene_file(os.path.join(SCENARIOS, "study1_scene.json"))
    config = SessionConfig()
    events = random_events(np.random.default_rng(2026), 60.0)
    live = Session(scene, config)
    for ev in events:
        live.submit(ev)
    ticks = int(round(60.0 / config.dt))
    live_hashes = [state_hash(live.tick()) for _ in range(ticks)]

    path = tmp_path / "acceptance.rec"
    write_recording(path, scene, config, events, ticks)
    first = replay(path)
    second = replay(path)
    assert first == live_hashes
    assert first == second

    script = TaskScript.load(os.path.join(SCENARIOS, "study1_perfect.json"))
    headless = build_session(script)
    n = int(round(script.duration / headless.config.dt))
    headless_hashes = [state_hash(headless.tick()) for _ in range(n)]
    service = SessionService(build_session(script), port=0, pace=False, max_ticks=n)
    assert service.run() == headless_hashes
    report(
        "determinism",
        f"60 s recorded session ({ticks} ticks, {len(events)} inputs) replays hash-identical "
        f"twice and matches the live run; headless and serving loops agree on all {n} ticks",
    )


def test_study_harness():
    study1 = run_scenario(TaskScript.load(os.path.join(SCENARIOS, "study1_perfect.json")))
    assert not study1.timed_out and study1.hints_used == 0

    script2 = TaskScript.load(os.path.join(SCENARIOS, "study2_run.json"))
    study2 = run_scenario(script2)
    tol = 2 / 120
    a, c = study2.appearance_times, study2.completion_times
    assert abs(a[0] - 15.0) < tol
    assert abs(a[1] - (a[0] + c[0] + 10.0)) < tol
    assert abs(a[2] - (a[1] + c[1] + 12.0)) < tol
    assert abs(study2.end_time - (a[2] + c[2] + 20.0)) < tol

    actual = {o.id: o.pose.translation.copy() for o in script2.scene.objects}
    assert recall_score(actual, actual, norm_distance=1.0) == 1.0
    scores = []
    for err in (0.0, 0.05, 0.15, 0.4, 1.5):
        reported = {k: v + np.array([err, 0.0, 0.0]) for k, v in actual.items()}
        scores.append(recall_score(reported, actual, norm_distance=1.0))
    assert all(b < a or (a == b == 0.0) for a, b in zip(scores, scores[1:]))

    narrow = build_session(script2, fov_condition="narrow")
    wide = build_session(script2, fov_condition="wide")
    compared = 0
    while not narrow.done():
        assert state_hash(narrow.tick()) == state_hash(wide.tick())
        compared += 1
    report(
        "study harness",
        f"scripted single-target run: 0 hints, completed in {study1.completion_times[0]:.2f} s; "
        f"multi-target cadence 15/+10/+12 s with +20 s tail holds; recall score is 1.0 on exact "
        f"recall and strictly decreasing under injected error; narrow and wide field-of-view "
        f"runs hash-identical across {compared} ticks",
    )

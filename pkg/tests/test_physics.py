import numpy as np

from tangible_volume.physics import (
    DEFAULT_DT,
    SLEEP_TIME,
    BodyState,
    make_bodies,
    on_release,
    settled,
    step_physics,
)
from tangible_volume.scene import Scene, VirtualObject
from tangible_volume.spatial import Pose

G = 9.81


def sphere(oid, pos, radius=0.05, dynamic=True):
    return VirtualObject(id=oid, pose=Pose(np.array(pos, dtype=np.float64)), radius=radius, dynamic=dynamic)


def run(scene, bodies, seconds, dt=DEFAULT_DT, grasped_id=None, restitution=0.0):
    for _ in range(int(round(seconds / dt))):
        step_physics(scene, bodies, dt=dt, restitution=restitution, grasped_id=grasped_id)


def energy(scene, bodies, oid):
    obj = scene.get(oid)
    v = bodies[oid].velocity
    return G * float(obj.pose.translation[1]) + 0.5 * float(v @ v)


def test_gravity_disabled_freezes_everything():
    scene = Scene(objects=[sphere("a", [0, 1.0, 0])], gravity_enabled=False)
    bodies = make_bodies(scene)
    before = scene.get("a").pose.matrix().copy()
    run(scene, bodies, 2.0)
    assert np.array_equal(scene.get("a").pose.matrix(), before)


def test_drop_settles_at_contact_height():
    scene = Scene(objects=[sphere("a", [0, 1.0, 0])])
    bodies = make_bodies(scene)
    # Closed-form free-fall: contact at sqrt(2*0.95/g) ~ 0.44 s; with e = 0
    # the sphere should be at rest well before 1 s.
    run(scene, bodies, 1.0)
    assert abs(scene.get("a").pose.translation[1] - 0.05) < 1e-3
    assert bodies["a"].asleep


def test_free_fall_matches_closed_form_before_contact():
    scene = Scene(objects=[sphere("a", [0, 1.0, 0])])
    bodies = make_bodies(scene)
    dt = DEFAULT_DT
    n = 30
    run(scene, bodies, n * dt)
    # Semi-implicit Euler closed form: y = y0 - g dt^2 * n(n+1)/2.
    want = 1.0 - G * dt * dt * n * (n + 1) / 2
    assert abs(scene.get("a").pose.translation[1] - want) < 1e-12


def test_energy_non_increasing_with_zero_restitution():
    scene = Scene(objects=[sphere("a", [0, 1.0, 0])])
    bodies = make_bodies(scene)
    prev = energy(scene, bodies, "a")
    for _ in range(240):
        step_physics(scene, bodies, dt=DEFAULT_DT)
        now = energy(scene, bodies, "a")
        assert now <= prev + 1e-6
        prev = now


def test_penetration_bounded():
    scene = Scene(objects=[sphere("a", [0, 0.6, 0]), sphere("b", [0.001, 0.2, 0.0])])
    bodies = make_bodies(scene)
    for _ in range(480):
        step_physics(scene, bodies, dt=DEFAULT_DT)
        for o in scene.objects:
            assert o.pose.translation[1] - o.radius >= scene.ground_y - 1e-4
        d = np.linalg.norm(scene.get("a").pose.translation - scene.get("b").pose.translation)
        assert d >= scene.get("a").radius + scene.get("b").radius - 1e-4


def test_overlapping_spheres_separate_in_one_pass():
    scene = Scene(objects=[sphere("a", [0, 0.5, 0]), sphere("b", [0.09, 0.5, 0])])
    bodies = make_bodies(scene)
    step_physics(scene, bodies, dt=DEFAULT_DT)
    d = np.linalg.norm(scene.get("a").pose.translation - scene.get("b").pose.translation)
    assert d >= 0.1 - 1e-4


def test_grasped_object_is_kinematic_and_obstacle():
    scene = Scene(objects=[sphere("held", [0, 0.2, 0]), sphere("free", [0.02, 0.4, 0])])
    bodies = make_bodies(scene)
    held_before = scene.get("held").pose.matrix().copy()
    run(scene, bodies, 1.5, grasped_id="held")
    assert np.array_equal(scene.get("held").pose.matrix(), held_before)
    # The free sphere fell onto the held one and cannot penetrate it.
    d = np.linalg.norm(scene.get("free").pose.translation - scene.get("held").pose.translation)
    assert d >= 0.1 - 1e-4


def test_release_starts_fall_next_step():
    scene = Scene(objects=[sphere("a", [0, 0.5, 0])])
    bodies = {}
    on_release("a", bodies)
    y0 = scene.get("a").pose.translation[1]
    assert np.allclose(bodies["a"].velocity, 0.0)
    step_physics(scene, bodies, dt=DEFAULT_DT)
    assert scene.get("a").pose.translation[1] < y0


def test_release_with_gravity_off_floats():
    scene = Scene(objects=[sphere("a", [0, 0.5, 0])], gravity_enabled=False)
    bodies = {}
    on_release("a", bodies)
    before = scene.get("a").pose.matrix().copy()
    run(scene, bodies, 3.0)
    assert np.array_equal(scene.get("a").pose.matrix(), before)


def test_release_resting_on_ground_sleeps_within_half_second():
    scene = Scene(objects=[sphere("a", [0, 0.05, 0])])
    bodies = {}
    on_release("a", bodies)
    elapsed = 0.0
    while not bodies["a"].asleep:
        step_physics(scene, bodies, dt=DEFAULT_DT)
        elapsed += DEFAULT_DT
        assert elapsed <= SLEEP_TIME + 3 * DEFAULT_DT
    # No drift while settling.
    assert abs(scene.get("a").pose.translation[1] - 0.05) < 1e-9
    assert settled(bodies, "a")


def test_static_objects_never_move():
    scene = Scene(objects=[sphere("rock", [0, 0.5, 0], dynamic=False)])
    bodies = make_bodies(scene)
    assert "rock" not in bodies
    run(scene, bodies, 1.0)
    assert scene.get("rock").pose.translation[1] == 0.5


def test_determinism_bit_identical():
    def simulate():
        scene = Scene(
            objects=[sphere("a", [0, 1.0, 0]), sphere("b", [0.03, 0.7, 0.01]), sphere("c", [-0.02, 0.3, 0])]
        )
        bodies = make_bodies(scene)
        run(scene, bodies, 2.0)
        return [(o.id, o.pose.translation.tobytes()) for o in scene.objects]

    assert simulate() == simulate()


def test_falling_sphere_never_penetrates_a_sleeping_one():
    scene = Scene(objects=[sphere("low", [0, 0.05, 0]), sphere("high", [0.08, 3.0, 0.0])])
    bodies = make_bodies(scene)
    run(scene, bodies, 0.6)
    assert bodies["low"].asleep
    for _ in range(int(2.0 / DEFAULT_DT)):
        step_physics(scene, bodies, dt=DEFAULT_DT)
        d = np.linalg.norm(scene.get("low").pose.translation - scene.get("high").pose.translation)
        assert d >= 0.1 - 1e-4
        for o in scene.objects:
            assert o.pose.translation[1] - o.radius >= scene.ground_y - 1e-4

"""Rigid-body math: vectors, unit quaternions, poses.

Conventions used everywhere in this package: right-handed coordinates,
Y up, ground plane at y = 0, lengths in meters. Quaternions are stored
as (w, x, y, z) and renormalized after every composition so long replay
chains do not drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

UNIT_TOL = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    """A 3-vector as a float64 array. Components must be finite."""
    v = np.array([x, y, z], dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise ValueError(f"non-finite vector components: {v}")
    return v


def quat_identity() -> np.ndarray:
    return np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    n = float(np.linalg.norm(q))
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("cannot normalize zero or non-finite quaternion")
    return q / n


def quat_from_axis_angle(axis, angle: float) -> np.ndarray:
    axis = np.asarray(axis, dtype=np.float64)
    n = float(np.linalg.norm(axis))
    if n == 0.0:
        raise ValueError("zero rotation axis")
    half = 0.5 * angle
    return np.concatenate(([np.cos(half)], np.sin(half) * axis / n))


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by unit quaternion q."""
    w = q[0]
    u = q[1:]
    # v' = v + 2w (u x v) + 2 (u x (u x v))
    uv = np.cross(u, v)
    return v + 2.0 * w * uv + 2.0 * np.cross(u, uv)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (unit quaternion) then translation."""

    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))
    rotation: np.ndarray = field(default_factory=quat_identity)

    def __post_init__(self):
        t = np.asarray(self.translation, dtype=np.float64)
        q = np.asarray(self.rotation, dtype=np.float64)
        if t.shape != (3,) or q.shape != (4,):
            raise ValueError("pose needs a 3-vector translation and 4-component rotation")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(q))):
            raise ValueError("non-finite pose components")
        if abs(float(np.linalg.norm(q)) - 1.0) > 1e-6:
            q = quat_normalize(q)
        object.__setattr__(self, "translation", t)
        object.__setattr__(self, "rotation", q)

    def matrix(self) -> np.ndarray:
        """Homogeneous 4x4 form."""
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.rotation)
        m[:3, 3] = self.translation
        return m


IDENTITY = Pose()


def compose(a: Pose, b: Pose) -> Pose:
    """Transform that applies b first, then a."""
    q = quat_normalize(quat_multiply(a.rotation, b.rotation))
    t = a.translation + quat_rotate(a.rotation, b.translation)
    return Pose(t, q)


def invert(p: Pose) -> Pose:
    qi = quat_conjugate(p.rotation)
    return Pose(-quat_rotate(qi, p.translation), qi)


def transform_point(p: Pose, point: np.ndarray) -> np.ndarray:
    return p.translation + quat_rotate(p.rotation, np.asarray(point, dtype=np.float64))


def transform_direction(p: Pose, d: np.ndarray) -> np.ndarray:
    return quat_rotate(p.rotation, np.asarray(d, dtype=np.float64))


def pose_from_matrix(m: np.ndarray) -> Pose:
    """Recover a Pose from a rigid homogeneous matrix (Shepperd's method)."""
    r = m[:3, :3]
    t = m[:3, 3].copy()
    tr = np.trace(r)
    if tr > 0:
        s = np.sqrt(tr + 1.0) * 2
        q = np.array(
            [0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diag(r)))
        if i == 0:
            s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2
            q = np.array(
                [(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s]
            )
        elif i == 1:
            s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2
            q = np.array(
                [(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s]
            )
        else:
            s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2
            q = np.array(
                [(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s]
            )
    return Pose(t, quat_normalize(q))


def poses_close(a: Pose, b: Pose, tol: float = UNIT_TOL) -> bool:
    """Equality up to the quaternion double cover."""
    if np.max(np.abs(a.translation - b.translation)) > tol:
        return False
    d = min(
        float(np.max(np.abs(a.rotation - b.rotation))),
        float(np.max(np.abs(a.rotation + b.rotation))),
    )
    return d <= tol

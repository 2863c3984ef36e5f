"""Head-coupled off-axis cameras for the six cube faces.

Each visible face of the tangible volume gets a generalized perspective
camera built from the eye point and the face's screen rectangle, so the
scene appears through the cube with no cracks along shared edges.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .scene import TangibleVolume
from .spatial import transform_direction, transform_point

DEFAULT_NEAR = 0.01
DEFAULT_FAR = 100.0

# Local-frame (right, up) axes per face, chosen so right x up = outward normal.
# Face order: 0:+X 1:-X 2:+Y 3:-Y 4:+Z 5:-Z.
FACE_AXES = (
    (np.array([0.0, 0.0, -1.0]), np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0])),
    (np.array([0.0, 0.0, 1.0]), np.array([0.0, 1.0, 0.0]), np.array([-1.0, 0.0, 0.0])),
    (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, -1.0]), np.array([0.0, 1.0, 0.0])),
    (np.array([1.0, 0.0, 0.0]), np.array([0.0, 0.0, 1.0]), np.array([0.0, -1.0, 0.0])),
    (np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])),
    (np.array([-1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, -1.0])),
)


class DegenerateQuadError(ValueError):
    pass


class EyeBehindScreenError(ValueError):
    """Eye on or behind the screen plane: that face cannot be seen."""


@dataclass(frozen=True)
class ScreenQuad:
    """One face's visible screen rectangle: lower-left, lower-right, upper-left."""

    pa: np.ndarray
    pb: np.ndarray
    pc: np.ndarray

    def corners(self) -> np.ndarray:
        """pa, pb, pc and the derived upper-right corner pd."""
        return np.stack([self.pa, self.pb, self.pc, self.pb + self.pc - self.pa])


@dataclass(frozen=True)
class FaceCamera:
    view: np.ndarray
    projection: np.ndarray
    face_index: int

    def view_projection(self) -> np.ndarray:
        return self.projection @ self.view

    def to_ndc(self, world_point: np.ndarray) -> np.ndarray:
        """Project a world point to normalized device coordinates."""
        clip = self.view_projection() @ np.append(world_point, 1.0)
        if clip[3] == 0:
            raise ValueError("point at the eye plane")
        return clip[:3] / clip[3]


def face_basis(quad: ScreenQuad) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Orthonormal (right, up, normal) of the screen; normal faces the eye side."""
    er = quad.pb - quad.pa
    eu = quad.pc - quad.pa
    wr = float(np.linalg.norm(er))
    wu = float(np.linalg.norm(eu))
    if wr < 1e-12 or wu < 1e-12:
        raise DegenerateQuadError("zero-length screen edge")
    vr = er / wr
    vu = eu / wu
    if abs(float(np.dot(vr, vu))) > 1e-9:
        raise DegenerateQuadError("screen edges are not orthogonal")
    vn = np.cross(vr, vu)
    return vr, vu, vn


def off_axis_camera(
    eye: np.ndarray,
    quad: ScreenQuad,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
    face_index: int = 0,
) -> FaceCamera:
    """Generalized perspective camera whose frustum passes through the quad.

    The screen corners land exactly on NDC (+-1, +-1); anything drawn with
    this camera therefore fills the face viewport as seen from the eye.
    """
    if not (0 < near < far):
        raise ValueError(f"need 0 < near < far, got near={near}, far={far}")
    vr, vu, vn = face_basis(quad)
    eye = np.asarray(eye, dtype=np.float64)

    va = quad.pa - eye
    vb = quad.pb - eye
    vc = quad.pc - eye
    d = -float(np.dot(va, vn))
    if d <= 0:
        raise EyeBehindScreenError("eye is on or behind the screen plane")

    nd = near / d
    left = float(np.dot(vr, va)) * nd
    right = float(np.dot(vr, vb)) * nd
    bottom = float(np.dot(vu, va)) * nd
    top = float(np.dot(vu, vc)) * nd

    projection = _frustum(left, right, bottom, top, near, far)

    view = np.eye(4)
    view[0, :3] = vr
    view[1, :3] = vu
    view[2, :3] = vn
    view[:3, 3] = -view[:3, :3] @ eye
    return FaceCamera(view=view, projection=projection, face_index=face_index)


def _frustum(l: float, r: float, b: float, t: float, n: float, f: float) -> np.ndarray:
    m = np.zeros((4, 4))
    m[0, 0] = 2 * n / (r - l)
    m[0, 2] = (r + l) / (r - l)
    m[1, 1] = 2 * n / (t - b)
    m[1, 2] = (t + b) / (t - b)
    m[2, 2] = -(f + n) / (f - n)
    m[2, 3] = -2 * f * n / (f - n)
    m[3, 2] = -1.0
    return m


def face_quad(volume: TangibleVolume, face_index: int) -> ScreenQuad:
    """World-space screen rectangle of one face, bezel inset applied."""
    vr, vu, vn = FACE_AXES[face_index]
    h = volume.half_extent
    s = h * (1.0 - 2.0 * volume.bezel_fraction)  # bezel eats each edge
    center = vn * h
    corners_local = (
        center - s * vr - s * vu,
        center + s * vr - s * vu,
        center - s * vr + s * vu,
    )
    pa, pb, pc = (transform_point(volume.pose, c) for c in corners_local)
    return ScreenQuad(pa, pb, pc)


def visible_faces(volume: TangibleVolume, head_world: np.ndarray) -> list[int]:
    """Faces whose outward normal points toward the head."""
    head_world = np.asarray(head_world, dtype=np.float64)
    out = []
    for i in range(6):
        vn_world = transform_direction(volume.pose, FACE_AXES[i][2])
        center_world = transform_point(volume.pose, FACE_AXES[i][2] * volume.half_extent)
        if float(np.dot(vn_world, head_world - center_world)) > 0:
            out.append(i)
    return out


def volume_cameras(
    volume: TangibleVolume,
    head_world: np.ndarray,
    near: float = DEFAULT_NEAR,
    far: float = DEFAULT_FAR,
) -> list[FaceCamera]:
    """One camera per face visible from the head; empty when none are.

    The head inside the volume sees no face front-on, which yields an
    empty list; presentation of that case is the viewer's concern.
    """
    cameras = []
    for i in visible_faces(volume, head_world):
        quad = face_quad(volume, i)
        try:
            cameras.append(off_axis_camera(head_world, quad, near, far, face_index=i))
        except EyeBehindScreenError:
            # Grazing head position: the face center test passed but the
            # eye sits in the screen plane itself. Skip the face.
            continue
    return cameras

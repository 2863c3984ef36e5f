/**
 * Pure input-shaping logic, kept free of DOM and three.js so it can be unit
 * tested: pressure key ramps, drag unprojection, send-rate limiting, and the
 * inside-the-cube predicate used by the narrow field-of-view mode.
 */
import type { Quat, Vec3 } from "./protocol";

export const ATTACK_MS = 200; // press/release ramp to full scale
export const MAX_SEND_HZ = 60;
export const RAW_MAX = 1023;

/** Move a normalized pressure toward its target at the 200 ms ramp rate. */
export function stepPressure(current: number, target: number, dtMs: number): number {
  const step = dtMs / ATTACK_MS;
  if (current < target) return Math.min(target, current + step);
  return Math.max(target, current - step);
}

export function toRaw(value: number): number {
  return Math.round(Math.min(1, Math.max(0, value)) * RAW_MAX);
}

/** Per-face pressure state driven by key held/released edges. */
export class PressureKeys {
  readonly values = [0, 0, 0, 0, 0, 0];
  private held = [false, false, false, false, false, false];

  setHeld(face: number, held: boolean): void {
    this.held[face] = held;
  }

  /** Advance all ramps; returns raw counts if anything changed, else null. */
  advance(dtMs: number): number[] | null {
    let changed = false;
    for (let i = 0; i < 6; i++) {
      const next = stepPressure(this.values[i], this.held[i] ? 1 : 0, dtMs);
      if (next !== this.values[i]) changed = true;
      this.values[i] = next;
    }
    return changed ? this.values.map(toRaw) : null;
  }
}

/**
 * Latest-wins rate limiter: continuous streams (drags, ramps) are coalesced
 * so the client never emits more than MAX_SEND_HZ messages per second per
 * limiter. Discrete actions (hint clicks) bypass this and are sent directly.
 */
export class RateLimiter<T> {
  private pending: T | null = null;
  private lastEmit = -Infinity;

  constructor(private readonly minIntervalMs = 1000 / MAX_SEND_HZ) {}

  push(value: T): void {
    this.pending = value;
  }

  take(nowMs: number): T | null {
    if (this.pending === null || nowMs - this.lastEmit < this.minIntervalMs) return null;
    this.lastEmit = nowMs;
    const out = this.pending;
    this.pending = null;
    return out;
  }
}

/**
 * Screen-space drag to camera-plane translation. For a perspective camera
 * with vertical FoV `fovYDeg` looking at a point `distance` away, one pixel
 * spans `2 * distance * tan(fov/2) / viewportHeightPx` meters in the plane
 * through that point, so the returned delta keeps the dragged point under
 * the cursor. `right` and `up` are the camera's world-space basis vectors.
 */
export function dragTranslation(
  dxPx: number,
  dyPx: number,
  viewportHeightPx: number,
  fovYDeg: number,
  distance: number,
  right: Vec3,
  up: Vec3,
): Vec3 {
  const metersPerPixel = (2 * distance * Math.tan((fovYDeg * Math.PI) / 360)) / viewportHeightPx;
  const sx = dxPx * metersPerPixel;
  const sy = -dyPx * metersPerPixel; // screen y grows downward
  return [
    right[0] * sx + up[0] * sy,
    right[1] * sx + up[1] * sy,
    right[2] * sx + up[2] * sy,
  ];
}

export function quatConjugate(q: Quat): Quat {
  return [q[0], -q[1], -q[2], -q[3]];
}

export function quatRotate(q: Quat, v: Vec3): Vec3 {
  const [w, x, y, z] = q;
  // v + 2 * cross(q.xyz, cross(q.xyz, v) + w * v)
  const cx = y * v[2] - z * v[1] + w * v[0];
  const cy = z * v[0] - x * v[2] + w * v[1];
  const cz = x * v[1] - y * v[0] + w * v[2];
  return [
    v[0] + 2 * (y * cz - z * cy),
    v[1] + 2 * (z * cx - x * cz),
    v[2] + 2 * (x * cy - y * cx),
  ];
}

export function quatMultiply(a: Quat, b: Quat): Quat {
  return [
    a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
    a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
    a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
    a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
  ];
}

export function quatFromAxisAngle(axis: Vec3, angle: number): Quat {
  const n = Math.hypot(axis[0], axis[1], axis[2]);
  const s = Math.sin(angle / 2) / n;
  return [Math.cos(angle / 2), axis[0] * s, axis[1] * s, axis[2] * s];
}

/** True when a world point lies inside the (rotated) cube volume. */
export function insideVolume(
  point: Vec3,
  volumePosition: Vec3,
  volumeRotation: Quat,
  halfExtent: number,
): boolean {
  const rel: Vec3 = [
    point[0] - volumePosition[0],
    point[1] - volumePosition[1],
    point[2] - volumePosition[2],
  ];
  const local = quatRotate(quatConjugate(volumeRotation), rel);
  return (
    Math.abs(local[0]) <= halfExtent &&
    Math.abs(local[1]) <= halfExtent &&
    Math.abs(local[2]) <= halfExtent
  );
}

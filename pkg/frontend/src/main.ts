/**
 * Viewer entry point: wires the WebSocket client, the pure control logic,
 * and the renderer together on a single requestAnimationFrame loop.
 *
 * Controls:
 *   drag           move the cube in the camera plane (R toggles rotate mode)
 *   shift+drag     orbit the god view
 *   keys 1..6      squeeze faces +X -X +Y -Y +Z -Z (200 ms ramp)
 *   H              request a hint
 *   F              toggle narrow/wide field of view
 *   W/A/S/D/Q/E    nudge the head position
 */
import * as THREE from "three";
import {
  PressureKeys,
  RateLimiter,
  dragTranslation,
  quatFromAxisAngle,
  quatMultiply,
} from "./controls";
import { Client } from "./net";
import { type InputMessage, type Quat, type Vec3, input } from "./protocol";
import { Viewer } from "./render";

const params = new URLSearchParams(location.search);
const url = params.get("server") ?? "ws://127.0.0.1:8765";

const canvas = document.getElementById("view") as HTMLCanvasElement;
const banner = document.getElementById("banner")!;
const hintsEl = document.getElementById("hints")!;
const statusEl = document.getElementById("status")!;
const hintButton = document.getElementById("hint-button")!;
const fovButton = document.getElementById("fov-button")!;

const client = new Client(url);
const viewer = new Viewer(canvas);
const keys = new PressureKeys();
const poseLimiter = new RateLimiter<InputMessage>();
const pressureLimiter = new RateLimiter<InputMessage>();
const headLimiter = new RateLimiter<InputMessage>();

let cubePosition: Vec3 = [0, 0, 0];
let cubeRotation: Quat = [1, 0, 0, 0];
let headPosition: Vec3 = [0, 0.4, 0.6];
let synced = false;
let rotateMode = false;
let fov: "narrow" | "wide" = "narrow";

const FACE_KEYS: Record<string, number> = {
  "1": 0,
  "2": 1,
  "3": 2,
  "4": 3,
  "5": 4,
  "6": 5,
};

window.addEventListener("keydown", (ev) => {
  if (ev.repeat) return;
  const face = FACE_KEYS[ev.key];
  if (face !== undefined) keys.setHeld(face, true);
  if (ev.key === "r" || ev.key === "R") rotateMode = !rotateMode;
  if (ev.key === "h" || ev.key === "H") client.send(input.hint());
  if (ev.key === "f" || ev.key === "F") toggleFov();
  const headStep: Record<string, Vec3> = {
    a: [-0.02, 0, 0],
    d: [0.02, 0, 0],
    q: [0, -0.02, 0],
    e: [0, 0.02, 0],
    w: [0, 0, -0.02],
    s: [0, 0, 0.02],
  };
  const step = headStep[ev.key.toLowerCase()];
  if (step) {
    headPosition = [
      headPosition[0] + step[0],
      headPosition[1] + step[1],
      headPosition[2] + step[2],
    ];
    headLimiter.push(input.head(headPosition));
  }
});

window.addEventListener("keyup", (ev) => {
  const face = FACE_KEYS[ev.key];
  if (face !== undefined) keys.setHeld(face, false);
});

let dragging = false;
let orbiting = false;
let lastX = 0;
let lastY = 0;

canvas.addEventListener("pointerdown", (ev) => {
  canvas.setPointerCapture(ev.pointerId);
  dragging = !ev.shiftKey;
  orbiting = ev.shiftKey;
  lastX = ev.clientX;
  lastY = ev.clientY;
});

canvas.addEventListener("pointerup", () => {
  dragging = false;
  orbiting = false;
});

canvas.addEventListener("pointermove", (ev) => {
  const dx = ev.clientX - lastX;
  const dy = ev.clientY - lastY;
  lastX = ev.clientX;
  lastY = ev.clientY;
  if (orbiting) {
    viewer.orbit.yaw -= dx * 0.01;
    viewer.orbit.pitch = Math.min(1.4, Math.max(0.05, viewer.orbit.pitch + dy * 0.01));
    return;
  }
  if (!dragging) return;
  if (rotateMode) {
    const yawQ = quatFromAxisAngle([0, 1, 0], -dx * 0.01);
    const pitchQ = quatFromAxisAngle([1, 0, 0], -dy * 0.01);
    cubeRotation = quatMultiply(quatMultiply(yawQ, pitchQ), cubeRotation);
  } else {
    const cam = viewer.godCamera;
    const right = new THREE.Vector3().setFromMatrixColumn(cam.matrixWorld, 0);
    const up = new THREE.Vector3().setFromMatrixColumn(cam.matrixWorld, 1);
    const distance = cam.position.distanceTo(new THREE.Vector3(...cubePosition));
    const delta = dragTranslation(
      dx,
      dy,
      canvas.clientHeight,
      cam.fov,
      distance,
      [right.x, right.y, right.z],
      [up.x, up.y, up.z],
    );
    cubePosition = [
      cubePosition[0] + delta[0],
      cubePosition[1] + delta[1],
      cubePosition[2] + delta[2],
    ];
  }
  poseLimiter.push(input.pose(cubePosition, cubeRotation));
});

canvas.addEventListener("wheel", (ev) => {
  viewer.orbit.radius = Math.min(5, Math.max(0.3, viewer.orbit.radius * (1 + ev.deltaY * 0.001)));
});

hintButton.addEventListener("click", () => client.send(input.hint()));
fovButton.addEventListener("click", toggleFov);

function toggleFov(): void {
  fov = fov === "narrow" ? "wide" : "narrow";
  client.send(input.fov(fov)); // rendering-only: server state hash is unchanged
}

let lastFrame = performance.now();

function frame(now: number): void {
  const dtMs = now - lastFrame;
  lastFrame = now;

  const raw = keys.advance(dtMs);
  if (raw) pressureLimiter.push(input.pressures(raw));
  for (const limiter of [poseLimiter, pressureLimiter, headLimiter]) {
    const msg = limiter.take(now);
    if (msg) client.send(msg);
  }

  const snap = client.latest;
  if (snap) {
    if (!synced) {
      // Adopt the server's pose once so the first drag does not teleport.
      cubePosition = [...snap.volume.position];
      cubeRotation = [...snap.volume.rotation];
      headPosition = [...snap.head];
      fov = snap.fov;
      synced = true;
    }
    viewer.render(snap);
    statusEl.textContent =
      `t=${snap.time.toFixed(2)}s  phase=${snap.phase}` +
      (snap.grasped ? ` holding ${snap.grasped}` : "") +
      (snap.bimanual ? " (bimanual)" : "") +
      `  fov=${snap.fov}  hash=${snap.hash}`;
    hintsEl.innerHTML = client.hints.map((h) => `<li>${h}</li>`).join("");
  }
  banner.style.display = client.status === "connected" ? "none" : "block";
  banner.textContent =
    client.status === "connecting" ? `connecting to ${url}...` : "disconnected: state is stale";

  requestAnimationFrame(frame);
}

requestAnimationFrame(frame);

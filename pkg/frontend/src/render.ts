/**
 * three.js rendering: a god-view of the whole scene on the left and the six
 * cube-face viewports (drawn with the server-provided cameras, framed by
 * bezels) stacked on the right. Purely a projection of the latest snapshot;
 * no simulation happens here.
 */
import * as THREE from "three";
import { insideVolume } from "./controls";
import type { Snapshot } from "./protocol";

const FACE_LABELS = ["+X", "-X", "+Y", "-Y", "+Z", "-Z"];
const BEZEL_PX = 6;

export class Viewer {
  readonly renderer: THREE.WebGLRenderer;
  readonly godCamera: THREE.PerspectiveCamera;
  orbit = { yaw: 0.6, pitch: 0.45, radius: 1.6, target: new THREE.Vector3(0, 0.1, 0) };

  private scene = new THREE.Scene();
  private objectMeshes = new Map<string, THREE.Mesh>();
  private targetGroups = new Map<number, THREE.Group>();
  private cube: THREE.LineSegments;
  private outline: THREE.Mesh;
  private headMarker: THREE.Mesh;
  private faceCameras: THREE.Camera[] = [];

  constructor(readonly canvas: HTMLCanvasElement) {
    this.renderer = new THREE.WebGLRenderer({ canvas, antialias: true });
    this.renderer.setScissorTest(true);
    this.godCamera = new THREE.PerspectiveCamera(50, 1, 0.01, 100);

    this.scene.background = new THREE.Color(0x10141a);
    this.scene.add(new THREE.AmbientLight(0xffffff, 0.7));
    const sun = new THREE.DirectionalLight(0xffffff, 1.2);
    sun.position.set(1, 2, 1);
    this.scene.add(sun);
    this.scene.add(new THREE.GridHelper(2, 20, 0x3a4a5a, 0x263040));

    this.cube = new THREE.LineSegments(
      new THREE.EdgesGeometry(new THREE.BoxGeometry(1, 1, 1)),
      new THREE.LineBasicMaterial({ color: 0x9fd6ff }),
    );
    this.scene.add(this.cube);

    this.outline = new THREE.Mesh(
      new THREE.SphereGeometry(1, 24, 16),
      new THREE.MeshBasicMaterial({ color: 0xffe16b, wireframe: true }),
    );
    this.outline.visible = false;
    this.scene.add(this.outline);

    this.headMarker = new THREE.Mesh(
      new THREE.SphereGeometry(0.02, 12, 8),
      new THREE.MeshBasicMaterial({ color: 0xff6b9f }),
    );
    this.scene.add(this.headMarker);
  }

  /** Rebuild scene content from the snapshot, then draw all viewports. */
  render(snap: Snapshot): void {
    this.syncObjects(snap);
    this.syncTargets(snap);
    this.syncCube(snap);
    this.syncFaceCameras(snap);
    this.headMarker.position.fromArray(snap.head);

    const w = this.canvas.clientWidth;
    const h = this.canvas.clientHeight;
    if (this.canvas.width !== w || this.canvas.height !== h) {
      this.renderer.setSize(w, h, false);
    }
    const panel = Math.floor(w * 0.25);
    const godW = w - panel;

    this.updateGodCamera(godW / h);
    this.setFovVisibility(snap, true);
    this.renderer.setViewport(0, 0, godW, h);
    this.renderer.setScissor(0, 0, godW, h);
    this.renderer.render(this.scene, this.godCamera);

    // Face viewports: the through-the-cube view always shows everything
    // inside the volume regardless of the FoV condition.
    this.setFovVisibility(snap, false);
    const cell = Math.floor(h / 6);
    for (let slot = 0; slot < 6; slot++) {
      const x = godW + BEZEL_PX;
      const y = h - (slot + 1) * cell + BEZEL_PX;
      const vw = panel - 2 * BEZEL_PX;
      const vh = cell - 2 * BEZEL_PX;
      this.renderer.setViewport(x, y, vw, vh);
      this.renderer.setScissor(x, y, vw, vh);
      const cam = this.faceCameras[slot];
      if (cam) {
        this.renderer.render(this.scene, cam);
      } else {
        // Face not visible from the head: bezel-colored blank.
        this.renderer.setClearColor(0x000000);
        this.renderer.clear();
      }
    }
  }

  faceLabel(slot: number): string {
    return FACE_LABELS[slot];
  }

  private updateGodCamera(aspect: number): void {
    const { yaw, pitch, radius, target } = this.orbit;
    this.godCamera.aspect = aspect;
    this.godCamera.position.set(
      target.x + radius * Math.cos(pitch) * Math.sin(yaw),
      target.y + radius * Math.sin(pitch),
      target.z + radius * Math.cos(pitch) * Math.cos(yaw),
    );
    this.godCamera.lookAt(target);
    this.godCamera.updateProjectionMatrix();
    this.godCamera.updateMatrixWorld();
  }

  private syncObjects(snap: Snapshot): void {
    const seen = new Set<string>();
    for (const obj of snap.objects) {
      seen.add(obj.id);
      let mesh = this.objectMeshes.get(obj.id);
      if (!mesh) {
        mesh = new THREE.Mesh(
          new THREE.SphereGeometry(1, 24, 16),
          new THREE.MeshStandardMaterial({ color: colorFor(obj.id) }),
        );
        this.objectMeshes.set(obj.id, mesh);
        this.scene.add(mesh);
      }
      mesh.position.fromArray(obj.position);
      mesh.quaternion.set(obj.rotation[1], obj.rotation[2], obj.rotation[3], obj.rotation[0]);
      mesh.scale.setScalar(obj.radius);
    }
    for (const [id, mesh] of this.objectMeshes) {
      if (!seen.has(id)) {
        this.scene.remove(mesh);
        this.objectMeshes.delete(id);
      }
    }

    const cand = snap.grasped ?? snap.candidate;
    const target = cand ? this.objectMeshes.get(cand) : undefined;
    this.outline.visible = !!target;
    if (target) {
      this.outline.position.copy(target.position);
      this.outline.scale.copy(target.scale).multiplyScalar(1.15);
      (this.outline.material as THREE.MeshBasicMaterial).color.set(
        snap.grasped ? 0x7bff8f : 0xffe16b,
      );
    }
  }

  private syncTargets(snap: Snapshot): void {
    const seen = new Set<number>();
    for (const t of snap.targets) {
      seen.add(t.index);
      let group = this.targetGroups.get(t.index);
      if (!group) {
        group = new THREE.Group();
        const ring = new THREE.Mesh(
          new THREE.RingGeometry(0.85, 1, 48),
          new THREE.MeshBasicMaterial({ color: 0x6bd6a8, side: THREE.DoubleSide }),
        );
        ring.rotation.x = -Math.PI / 2;
        group.add(ring);
        if (t.label) group.add(labelSprite(t.label));
        this.targetGroups.set(t.index, group);
        this.scene.add(group);
      }
      group.position.set(t.center[0], t.center[1] + 0.001, t.center[2]);
      group.scale.setScalar(t.radius);
      const ringMesh = group.children[0] as THREE.Mesh;
      (ringMesh.material as THREE.MeshBasicMaterial).color.set(
        t.completed_at !== null ? 0x4a6a5a : 0x6bd6a8,
      );
    }
    for (const [index, group] of this.targetGroups) {
      if (!seen.has(index)) {
        this.scene.remove(group);
        this.targetGroups.delete(index);
      }
    }
  }

  private syncCube(snap: Snapshot): void {
    const v = snap.volume;
    this.cube.position.fromArray(v.position);
    this.cube.quaternion.set(v.rotation[1], v.rotation[2], v.rotation[3], v.rotation[0]);
    this.cube.scale.setScalar(2 * v.half_extent);
  }

  private syncFaceCameras(snap: Snapshot): void {
    this.faceCameras = [];
    for (const cam of snap.cameras) {
      const three = new THREE.Camera();
      three.matrixAutoUpdate = false;
      three.projectionMatrix.fromArray(cam.projection);
      three.projectionMatrixInverse.copy(three.projectionMatrix).invert();
      three.matrixWorldInverse.fromArray(cam.view);
      three.matrixWorld.copy(three.matrixWorldInverse).invert();
      this.faceCameras[cam.face] = three;
    }
  }

  /** Narrow FoV hides virtual objects outside the cube in the god view. */
  private setFovVisibility(snap: Snapshot, godView: boolean): void {
    const narrow = godView && snap.fov === "narrow";
    for (const obj of snap.objects) {
      const mesh = this.objectMeshes.get(obj.id);
      if (!mesh) continue;
      mesh.visible =
        !narrow ||
        insideVolume(
          obj.position,
          snap.volume.position,
          snap.volume.rotation,
          snap.volume.half_extent,
        );
    }
    for (const group of this.targetGroups.values()) group.visible = !narrow;
    this.outline.visible =
      this.outline.visible && (!narrow || !!(snap.grasped ?? snap.candidate));
  }
}

function colorFor(id: string): number {
  let h = 0;
  for (const ch of id) h = (h * 31 + ch.charCodeAt(0)) >>> 0;
  const color = new THREE.Color();
  color.setHSL((h % 360) / 360, 0.55, 0.55);
  return color.getHex();
}

function labelSprite(text: string): THREE.Sprite {
  const canvas = document.createElement("canvas");
  canvas.width = 256;
  canvas.height = 64;
  const ctx = canvas.getContext("2d")!;
  ctx.font = "40px sans-serif";
  ctx.fillStyle = "#d8e8f0";
  ctx.textAlign = "center";
  ctx.fillText(text, 128, 46);
  const sprite = new THREE.Sprite(
    new THREE.SpriteMaterial({ map: new THREE.CanvasTexture(canvas), depthTest: false }),
  );
  sprite.position.set(0, 0.25, 0);
  sprite.scale.set(1.0, 0.25, 1);
  return sprite;
}

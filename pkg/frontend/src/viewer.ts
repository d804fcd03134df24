// Scene-graph side of the 3D review screen: GLB parsing, object isolation by
// node path, and camera framing/reset. Rendering and controls stay in the DOM
// shell — everything here works headless, which is how the tests run it.

import * as THREE from "three";
import { GLTFLoader } from "three/examples/jsm/loaders/GLTFLoader.js";

export class GlbParseError extends Error {
  constructor(detail: string) {
    super(`could not read scene file: ${detail}`);
    this.name = "GlbParseError";
  }
}

export async function parseGlb(data: ArrayBuffer): Promise<THREE.Group> {
  const loader = new GLTFLoader();
  try {
    const gltf = await loader.parseAsync(data, "");
    return gltf.scene;
  } catch (err) {
    const detail = err instanceof Error ? err.message : String(err);
    throw new GlbParseError(detail);
  }
}

export interface CameraPose {
  position: THREE.Vector3;
  target: THREE.Vector3;
}

export class SceneViewer {
  readonly root = new THREE.Group();
  private isolatedPath: string | null = null;
  private initialPose: CameraPose | null = null;

  setContent(content: THREE.Object3D): void {
    this.root.clear();
    this.root.add(content);
    this.isolatedPath = null;
  }

  isolated(): string | null {
    return this.isolatedPath;
  }

  // Show only the named node's subtree (plus its ancestors, so the chain
  // stays renderable). Unknown paths throw — the object list and the GLB
  // disagree, and that is worth surfacing, not hiding.
  isolate(nodePath: string): void {
    const target = this.root.getObjectByName(nodePath);
    if (!target) {
      throw new GlbParseError(`no node named ${JSON.stringify(nodePath)} in the scene`);
    }
    this.root.traverse((o) => {
      o.visible = false;
    });
    target.traverse((o) => {
      o.visible = true;
    });
    for (let o: THREE.Object3D | null = target; o; o = o.parent) {
      o.visible = true;
      if (o === this.root) break;
    }
    this.isolatedPath = nodePath;
  }

  clearIsolation(): void {
    this.root.traverse((o) => {
      o.visible = true;
    });
    this.isolatedPath = null;
  }

  // Names of nodes actually visible right now (self and every ancestor).
  visibleNodeNames(): string[] {
    const names: string[] = [];
    const walk = (o: THREE.Object3D) => {
      if (!o.visible) return;
      if (o.name) names.push(o.name);
      for (const child of o.children) walk(child);
    };
    walk(this.root);
    return names;
  }

  // Pull the camera back along a diagonal until the whole scene fits.
  frame(camera: THREE.PerspectiveCamera): CameraPose {
    const box = new THREE.Box3().setFromObject(this.root);
    const center = box.isEmpty() ? new THREE.Vector3() : box.getCenter(new THREE.Vector3());
    const size = box.isEmpty() ? new THREE.Vector3(1, 1, 1) : box.getSize(new THREE.Vector3());
    const radius = Math.max(size.x, size.y, size.z, 0.1);
    const distance = radius / Math.tan((camera.fov * Math.PI) / 360);
    const position = center
      .clone()
      .add(new THREE.Vector3(1, 0.8, 1).normalize().multiplyScalar(distance));
    camera.position.copy(position);
    camera.lookAt(center);
    camera.updateProjectionMatrix();
    const pose = { position: position.clone(), target: center.clone() };
    if (!this.initialPose) this.initialPose = { position: position.clone(), target: center.clone() };
    return pose;
  }

  // Restore the framing captured on first load.
  resetCamera(camera: THREE.PerspectiveCamera): CameraPose | null {
    const pose = this.initialPose;
    if (!pose) return null;
    camera.position.copy(pose.position);
    camera.lookAt(pose.target);
    camera.updateProjectionMatrix();
    return { position: pose.position.clone(), target: pose.target.clone() };
  }

  initialFraming(): CameraPose | null {
    return this.initialPose;
  }
}

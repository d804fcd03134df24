// Point markers over the 2D image. Coordinates are percent of the rendered
// image box, canonicalized to two decimals at capture time so the label the
// annotator sees is exactly the value the server stores.
//
// The service's point list is append-only, so markers live locally first:
// they stay draggable until pushed, then freeze.

import { canonicalCoord, formatCoord } from "./format";
import { QC } from "./policy";
import type { PointDict } from "./types";

export interface Rect {
  left: number;
  top: number;
  width: number;
  height: number;
}

export interface Marker {
  name: string;
  x: number; // percent, canonical two-decimal value
  y: number;
  order: number;
  saved: boolean;
}

export function percentFromClick(
  rect: Rect,
  clientX: number,
  clientY: number,
): { x: number; y: number } {
  if (rect.width <= 0 || rect.height <= 0) {
    throw new Error("image box has no extent yet");
  }
  const px = ((clientX - rect.left) / rect.width) * 100;
  const py = ((clientY - rect.top) / rect.height) * 100;
  return { x: canonicalCoord(clamp(px)), y: canonicalCoord(clamp(py)) };
}

function clamp(v: number): number {
  return Math.min(100, Math.max(0, v));
}

export class PointingBoard {
  private markers: Marker[] = [];

  add(name: string, x: number, y: number): Marker {
    const marker: Marker = {
      name,
      x: canonicalCoord(x),
      y: canonicalCoord(y),
      order: this.markers.length,
      saved: false,
    };
    this.markers.push(marker);
    return marker;
  }

  // Dragging an unsaved marker re-canonicalizes its position; saved points
  // are immutable on the server, so those markers refuse to move.
  moveTo(order: number, x: number, y: number): Marker {
    const marker = this.markers[order];
    if (!marker) throw new Error(`no marker with order ${order}`);
    if (marker.saved) throw new Error("saved points cannot be moved");
    marker.x = canonicalCoord(x);
    marker.y = canonicalCoord(y);
    return marker;
  }

  markSaved(order: number): void {
    const marker = this.markers[order];
    if (marker) marker.saved = true;
  }

  unsaved(): Marker[] {
    return this.markers.filter((m) => !m.saved);
  }

  // Server refresh wins: replace everything with the stored points.
  replaceFrom(points: PointDict[]): void {
    this.markers = points.map((p) => ({
      name: p.name,
      x: p.x,
      y: p.y,
      order: p.order,
      saved: true,
    }));
  }

  // Refresh saved markers from the server but keep local unsaved ones on top.
  reconcile(points: PointDict[]): void {
    const unsaved = this.unsaved();
    this.replaceFrom(points);
    for (const m of unsaved) {
      m.order = this.markers.length;
      this.markers.push(m);
    }
  }

  all(): readonly Marker[] {
    return this.markers;
  }

  count(): number {
    return this.markers.length;
  }

  // Counter keeps counting past the minimum — extra points are welcome.
  progressLabel(): string {
    const n = this.markers.length;
    if (n < QC.minPoints2d) return `${n} of ${QC.minPoints2d} required points`;
    return `${n} points (minimum met)`;
  }

  labelFor(marker: Marker): string {
    return `${marker.name} (${formatCoord(marker.x)}, ${formatCoord(marker.y)})`;
  }
}

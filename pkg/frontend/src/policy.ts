// Client-side mirror of the service's quality gates. The UI uses these to
// keep controls disabled while the request would bounce; the server stays
// authoritative and its failures are surfaced verbatim when they disagree.

import type { Asset, Recording, SceneObject, Session } from "./types";
import { SCENE_TARGET } from "./types";

export const QC = {
  minPoints2d: 5,
  minObjectRecordingS: 20,
  minSceneOrImageRecordingS: 60,
  maxRecordingS: 180,
} as const;

export function minimumFor(target: string): number {
  return target === SCENE_TARGET ? QC.minSceneOrImageRecordingS : QC.minObjectRecordingS;
}

// A target is satisfied by its single longest recording, not a running sum.
export function longestFor(recordings: Recording[], target: string): number {
  let best = 0;
  for (const r of recordings) {
    if (r.target === target && r.duration_s > best) best = r.duration_s;
  }
  return best;
}

export function objectComplete(recordings: Recording[], objectId: string): boolean {
  return longestFor(recordings, objectId) >= QC.minObjectRecordingS;
}

export function missingObjects(asset: Asset, recordings: Recording[]): SceneObject[] {
  return asset.objects.filter((o) => !objectComplete(recordings, o.object_id));
}

export function sceneNarrated(recordings: Recording[]): boolean {
  return longestFor(recordings, SCENE_TARGET) >= QC.minSceneOrImageRecordingS;
}

// May the unlock button be pressed right now?
export function sceneStageReady(asset: Asset, session: Session): boolean {
  return session.stage === "OBJECTS" && missingObjects(asset, session.recordings).length === 0;
}

// May a recording for this target start right now? (stage gating only — the
// recorder itself enforces durations)
export function canRecord(session: Session, target: string): boolean {
  if (session.stage === "SUBMITTED") return false;
  return target === SCENE_TARGET ? session.stage === "SCENE" : session.stage === "OBJECTS";
}

export interface GateCheck {
  code: string;
  detail: string;
}

// Everything that would make submit come back 422, in the server's order.
export function submitBlockers(asset: Asset, session: Session): GateCheck[] {
  const out: GateCheck[] = [];
  if (session.stage === "SUBMITTED") {
    return [{ code: "SESSION_IMMUTABLE", detail: "session already submitted" }];
  }
  if (asset.kind === "IMAGE_2D") {
    if (session.points.length < QC.minPoints2d) {
      out.push({
        code: "MIN_POINTS",
        detail: `${session.points.length} of ${QC.minPoints2d} required points placed`,
      });
    }
    if (!sceneNarrated(session.recordings)) {
      out.push({
        code: "MIN_DURATION",
        detail: `image narration under ${QC.minSceneOrImageRecordingS} s`,
      });
    }
  } else {
    const missing = missingObjects(asset, session.recordings);
    if (session.stage !== "SCENE" || missing.length > 0) {
      out.push({
        code: "OBJECTS_INCOMPLETE",
        detail: missing.length
          ? `objects below ${QC.minObjectRecordingS} s: ${missing.map((o) => o.name).join(", ")}`
          : "scene stage not unlocked",
      });
    }
    if (!sceneNarrated(session.recordings)) {
      out.push({
        code: "MIN_DURATION",
        detail: `scene narration under ${QC.minSceneOrImageRecordingS} s`,
      });
    }
  }
  return out;
}

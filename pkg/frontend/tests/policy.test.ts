import { describe, expect, it } from "vitest";

import {
  QC,
  canRecord,
  longestFor,
  minimumFor,
  missingObjects,
  objectComplete,
  sceneNarrated,
  sceneStageReady,
  submitBlockers,
} from "../src/policy";
import { SCENE_TARGET, type Asset, type Recording, type Session, type Stage } from "../src/types";

let recCounter = 0;

function rec(target: string, durationS: number): Recording {
  recCounter += 1;
  return {
    recording_id: `rec-${recCounter}`,
    target,
    audio_ref: `blob-${recCounter}`,
    duration_s: durationS,
    auto_transcript: null,
    edited_transcript: null,
    discrepancy: null,
  };
}

function sceneAsset(objectIds: string[] = ["obj-1", "obj-2", "obj-3"]): Asset {
  return {
    asset_id: "asset-1",
    kind: "SCENE_3D",
    media_ref: "blob-glb",
    scene_meta: { category: "Residential", subcategory: "Kitchen", site: "INDOOR" },
    objects: objectIds.map((id, i) => ({
      object_id: id,
      name: `object ${i + 1}`,
      node_path: `node-${i + 1}`,
    })),
    org_id: "org-a",
  };
}

function imageAsset(): Asset {
  return {
    asset_id: "asset-2",
    kind: "IMAGE_2D",
    media_ref: "blob-png",
    scene_meta: null,
    objects: [],
    org_id: "org-a",
  };
}

function session(stage: Stage, recordings: Recording[], points = 0): Session {
  return {
    session_id: "sess-1",
    task_id: "task-1",
    asset_id: "asset-1",
    annotator_id: "anno-1",
    language: "en",
    stage,
    points: Array.from({ length: points }, (_, i) => ({
      name: `p${i}`,
      x: i,
      y: i,
      order: i,
    })),
    recordings,
    version: 1,
    org_id: "org-a",
    native_speaker: false,
  };
}

describe("duration minimums", () => {
  it("objects need 20 s, the scene or image needs 60 s", () => {
    expect(minimumFor("obj-1")).toBe(20);
    expect(minimumFor(SCENE_TARGET)).toBe(60);
  });

  it("19.9 s does not satisfy an object; 20.0 s exactly does", () => {
    expect(objectComplete([rec("obj-1", 19.9)], "obj-1")).toBe(false);
    expect(objectComplete([rec("obj-1", 20.0)], "obj-1")).toBe(true);
  });

  it("the single longest take counts — durations never sum", () => {
    expect(objectComplete([rec("obj-1", 15), rec("obj-1", 15)], "obj-1")).toBe(false);
    expect(objectComplete([rec("obj-1", 10), rec("obj-1", 21)], "obj-1")).toBe(true);
    expect(longestFor([rec("obj-1", 10), rec("obj-1", 21)], "obj-1")).toBe(21);
  });

  it("scene narration: 59.9 s short, 60 s enough", () => {
    expect(sceneNarrated([rec(SCENE_TARGET, 59.9)])).toBe(false);
    expect(sceneNarrated([rec(SCENE_TARGET, 60)])).toBe(true);
  });
});

describe("scene stage gating", () => {
  it("stays locked until every object has its 20 s", () => {
    const asset = sceneAsset();
    const partial = [rec("obj-1", 25), rec("obj-2", 25), rec("obj-3", 19.9)];
    expect(sceneStageReady(asset, session("OBJECTS", partial))).toBe(false);
    expect(missingObjects(asset, partial).map((o) => o.object_id)).toEqual(["obj-3"]);

    const complete = [...partial, rec("obj-3", 20)];
    expect(sceneStageReady(asset, session("OBJECTS", complete))).toBe(true);
    expect(missingObjects(asset, complete)).toEqual([]);
  });

  it("unlock is only offered from the OBJECTS stage", () => {
    const asset = sceneAsset();
    const complete = asset.objects.map((o) => rec(o.object_id, 30));
    expect(sceneStageReady(asset, session("SCENE", complete))).toBe(false);
    expect(sceneStageReady(asset, session("SUBMITTED", complete))).toBe(false);
  });

  it("recording targets follow the stage", () => {
    expect(canRecord(session("OBJECTS", []), "obj-1")).toBe(true);
    expect(canRecord(session("OBJECTS", []), SCENE_TARGET)).toBe(false);
    expect(canRecord(session("SCENE", []), "obj-1")).toBe(false);
    expect(canRecord(session("SCENE", []), SCENE_TARGET)).toBe(true);
    expect(canRecord(session("SUBMITTED", []), SCENE_TARGET)).toBe(false);
  });
});

describe("submitBlockers mirrors the server's gate table", () => {
  it("2D: four points and a long narration still miss MIN_POINTS", () => {
    const blockers = submitBlockers(imageAsset(), session("SCENE", [rec(SCENE_TARGET, 70)], 4));
    expect(blockers.map((b) => b.code)).toEqual(["MIN_POINTS"]);
  });

  it("2D: five points with 59.9 s misses MIN_DURATION only", () => {
    const blockers = submitBlockers(imageAsset(), session("SCENE", [rec(SCENE_TARGET, 59.9)], 5));
    expect(blockers.map((b) => b.code)).toEqual(["MIN_DURATION"]);
  });

  it("2D: five points and 60 s clears every gate", () => {
    expect(submitBlockers(imageAsset(), session("SCENE", [rec(SCENE_TARGET, 60)], 5))).toEqual([]);
  });

  it("3D: incomplete objects and no scene narration report both gates", () => {
    const asset = sceneAsset();
    const blockers = submitBlockers(asset, session("OBJECTS", [rec("obj-1", 25)]));
    expect(blockers.map((b) => b.code)).toEqual(["OBJECTS_INCOMPLETE", "MIN_DURATION"]);
    expect(blockers[0].detail).toContain("object 2");
  });

  it("3D: complete objects, unlocked stage, 60 s scene -> clean", () => {
    const asset = sceneAsset();
    const recs = [...asset.objects.map((o) => rec(o.object_id, 20)), rec(SCENE_TARGET, 60)];
    expect(submitBlockers(asset, session("SCENE", recs))).toEqual([]);
  });

  it("a submitted session only reports immutability", () => {
    const blockers = submitBlockers(sceneAsset(), session("SUBMITTED", []));
    expect(blockers.map((b) => b.code)).toEqual(["SESSION_IMMUTABLE"]);
  });

  it("policy constants match the service defaults", () => {
    expect(QC).toEqual({
      minPoints2d: 5,
      minObjectRecordingS: 20,
      minSceneOrImageRecordingS: 60,
      maxRecordingS: 180,
    });
  });
});

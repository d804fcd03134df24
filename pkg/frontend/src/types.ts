// Wire shapes for the annotation service. Field names match the JSON payloads
// exactly — keep them snake_case so objects can round-trip untouched.

export type AssetKind = "IMAGE_2D" | "SCENE_3D";
export type Stage = "OBJECTS" | "SCENE" | "SUBMITTED";

// Recording target for the whole scene or image; any other target value is
// the object_id of a SceneObject.
export const SCENE_TARGET = "SCENE_OR_IMAGE";

export interface SceneObject {
  object_id: string;
  name: string;
  node_path: string;
}

export interface SceneMeta {
  category: string;
  subcategory: string;
  site: string;
}

export interface Asset {
  asset_id: string;
  kind: AssetKind;
  media_ref: string;
  scene_meta: SceneMeta | null;
  objects: SceneObject[];
  org_id: string;
}

export interface Task {
  task_id: string;
  title: string;
  kind: AssetKind;
  instructions: string;
  questions: string[];
  asset_ids: string[];
  org_id: string;
  created_at: string;
  prompt_profile: string | null;
}

export interface PointDict {
  name: string;
  x: number;
  y: number;
  order: number;
}

export interface Recording {
  recording_id: string;
  target: string;
  audio_ref: string;
  duration_s: number;
  auto_transcript: string | null;
  edited_transcript: string | null;
  discrepancy: number | null;
}

export interface Session {
  session_id: string;
  task_id: string;
  asset_id: string;
  annotator_id: string;
  language: string;
  stage: Stage;
  points: PointDict[];
  recordings: Recording[];
  version: number;
  org_id: string;
  native_speaker: boolean;
}

export interface SubmitFailure {
  code: string;
  detail: string;
}

export interface TranscriptFlag {
  recording_id: string;
  discrepancy: number;
}

export interface SubmitResult {
  accepted: boolean;
  failures: SubmitFailure[];
  flags: TranscriptFlag[];
  stage: Stage;
  session_version: number;
}

export interface AttachResult {
  recording: Recording;
  session_version: number;
  job_id: string;
}

export interface TranscriptResult {
  recording: Recording;
  session_version: number;
}

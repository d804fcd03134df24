// Session state holder: loads the session with its task and asset, refreshes
// after every mutation (the server is the source of truth — transcripts and
// versions move underneath us), and polls for machine transcripts.

import { ApiClient } from "./api";
import type { Asset, Recording, Session, SubmitResult, Task } from "./types";

export type SleepFn = (ms: number) => Promise<void>;

const defaultSleep: SleepFn = (ms) => new Promise((res) => setTimeout(res, ms));

export class SessionController {
  session!: Session;
  task!: Task;
  asset!: Asset;

  constructor(
    private readonly api: ApiClient,
    readonly sessionId: string,
    private readonly sleep: SleepFn = defaultSleep,
  ) {}

  async load(): Promise<void> {
    this.session = await this.api.session(this.sessionId);
    [this.task, this.asset] = await Promise.all([
      this.api.task(this.session.task_id),
      this.api.asset(this.session.asset_id),
    ]);
  }

  async refresh(): Promise<Session> {
    this.session = await this.api.session(this.sessionId);
    return this.session;
  }

  media(): Promise<ArrayBuffer> {
    return this.api.media(this.session.asset_id);
  }

  async addPoint(name: string, x: number, y: number): Promise<Session> {
    this.session = await this.api.addPoint(this.sessionId, name, x, y);
    return this.session;
  }

  async attachRecording(target: string, blob: Blob): Promise<Recording> {
    const result = await this.api.attachRecording(this.sessionId, target, blob);
    await this.refresh();
    return result.recording;
  }

  async unlockScene(): Promise<Session> {
    this.session = await this.api.unlockScene(this.sessionId);
    return this.session;
  }

  async submit(): Promise<SubmitResult> {
    const result = await this.api.submit(this.sessionId);
    await this.refresh();
    return result;
  }

  recording(recordingId: string): Recording | undefined {
    return this.session.recordings.find((r) => r.recording_id === recordingId);
  }

  // The transcriber runs as a background job; poll until its text lands.
  async waitForAutoTranscript(
    recordingId: string,
    opts: { timeoutMs?: number; intervalMs?: number } = {},
  ): Promise<Recording> {
    const timeoutMs = opts.timeoutMs ?? 30_000;
    const intervalMs = opts.intervalMs ?? 500;
    const tries = Math.max(1, Math.ceil(timeoutMs / intervalMs));
    for (let i = 0; i < tries; i++) {
      await this.refresh();
      const rec = this.recording(recordingId);
      if (rec && rec.auto_transcript !== null) return rec;
      await this.sleep(intervalMs);
    }
    throw new Error(`transcript for ${recordingId} not ready after ${timeoutMs} ms`);
  }

  // Saves the annotator's corrected text; the machine transcript stays
  // untouched and both ride on the recording afterwards.
  async saveTranscript(recordingId: string, editedText: string): Promise<Recording> {
    const result = await this.api.editTranscript(this.sessionId, recordingId, editedText);
    await this.refresh();
    return result.recording;
  }
}

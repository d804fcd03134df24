// Recording state machine, decoupled from MediaRecorder so the gating rules
// run under a fake clock in tests.
//
//   idle ── start ──> recording ── stop/auto-stop ──> uploading ──> done
//     ^                   │ (stop before minimum: refused, keeps recording)
//     └──── retry ─── error (mic denied / upload failed; blob kept for retry)
//
// The server decodes the authoritative duration from the audio bytes; the
// clock here only drives the UI gates (stop button, countdown, 180 s cap).

export type RecorderPhase = "idle" | "recording" | "uploading" | "done" | "error";

export interface Clock {
  now(): number; // milliseconds
}

export interface ActiveCapture {
  stop(): Promise<Blob>;
}

export interface MediaCapture {
  start(): Promise<ActiveCapture>;
}

export type UploadFn = (blob: Blob, elapsedS: number) => Promise<void>;

export interface RecorderView {
  phase: RecorderPhase;
  elapsedS: number;
  minimumS: number;
  maximumS: number;
  remainingToMinimumS: number;
  canStop: boolean;
  error: string | null;
}

export interface RecorderOptions {
  minimumS: number;
  maximumS?: number;
  clock: Clock;
  capture: MediaCapture;
  upload: UploadFn;
  onChange?: (view: RecorderView) => void;
}

const DEFAULT_MAXIMUM_S = 180;

export class RecorderMachine {
  readonly minimumS: number;
  readonly maximumS: number;

  private phase: RecorderPhase = "idle";
  private clock: Clock;
  private capture: MediaCapture;
  private upload: UploadFn;
  private onChange?: (view: RecorderView) => void;

  private active: ActiveCapture | null = null;
  private startedAtMs = 0;
  private stoppedElapsedS = 0;
  private pendingBlob: Blob | null = null;
  private pendingElapsedS = 0;
  private errorText: string | null = null;

  constructor(opts: RecorderOptions) {
    this.minimumS = opts.minimumS;
    this.maximumS = opts.maximumS ?? DEFAULT_MAXIMUM_S;
    this.clock = opts.clock;
    this.capture = opts.capture;
    this.upload = opts.upload;
    this.onChange = opts.onChange;
  }

  async start(): Promise<void> {
    if (this.phase !== "idle") return;
    try {
      this.active = await this.capture.start();
    } catch (err) {
      this.fail(`microphone unavailable: ${message(err)}`);
      return;
    }
    this.phase = "recording";
    this.startedAtMs = this.clock.now();
    this.emit();
  }

  elapsedS(): number {
    if (this.phase === "recording") {
      return (this.clock.now() - this.startedAtMs) / 1000;
    }
    return this.stoppedElapsedS;
  }

  canStop(): boolean {
    return this.phase === "recording" && this.elapsedS() >= this.minimumS;
  }

  // Manual stop. Refused (returns false, keeps recording) before the minimum.
  async stop(): Promise<boolean> {
    if (this.phase !== "recording") return false;
    if (this.elapsedS() < this.minimumS) {
      this.emit();
      return false;
    }
    await this.finish(this.elapsedS());
    return true;
  }

  // Drive this from an interval. At the cap the recording force-stops and
  // uploads; elapsed is clamped so a late tick never claims extra seconds.
  async tick(): Promise<void> {
    if (this.phase !== "recording") return;
    if (this.elapsedS() >= this.maximumS) {
      await this.finish(this.maximumS);
      return;
    }
    this.emit();
  }

  private async finish(elapsedS: number): Promise<void> {
    const active = this.active;
    if (!active) return;
    this.active = null;
    this.stoppedElapsedS = elapsedS;
    this.phase = "uploading";
    this.emit();

    let blob: Blob;
    try {
      blob = await active.stop();
    } catch (err) {
      this.fail(`recording failed: ${message(err)}`);
      return;
    }
    await this.push(blob, elapsedS);
  }

  private async push(blob: Blob, elapsedS: number): Promise<void> {
    this.phase = "uploading";
    this.emit();
    try {
      await this.upload(blob, elapsedS);
    } catch (err) {
      this.pendingBlob = blob;
      this.pendingElapsedS = elapsedS;
      this.fail(`upload failed: ${message(err)}`);
      return;
    }
    this.pendingBlob = null;
    this.phase = "done";
    this.errorText = null;
    this.emit();
  }

  // From the error phase: re-upload a kept blob, or try the microphone again.
  async retry(): Promise<void> {
    if (this.phase !== "error") return;
    if (this.pendingBlob) {
      await this.push(this.pendingBlob, this.pendingElapsedS);
      return;
    }
    this.phase = "idle";
    this.errorText = null;
    await this.start();
  }

  // A done/errored machine can be rearmed for another take of the same target.
  rearm(): void {
    if (this.phase === "recording" || this.phase === "uploading") return;
    this.phase = "idle";
    this.active = null;
    this.pendingBlob = null;
    this.stoppedElapsedS = 0;
    this.errorText = null;
    this.emit();
  }

  view(): RecorderView {
    const elapsed = this.elapsedS();
    return {
      phase: this.phase,
      elapsedS: elapsed,
      minimumS: this.minimumS,
      maximumS: this.maximumS,
      remainingToMinimumS: Math.max(0, this.minimumS - elapsed),
      canStop: this.canStop(),
      error: this.errorText,
    };
  }

  private fail(text: string): void {
    this.phase = "error";
    this.errorText = text;
    this.emit();
  }

  private emit(): void {
    this.onChange?.(this.view());
  }
}

function message(err: unknown): string {
  return err instanceof Error ? err.message : String(err);
}

import { describe, expect, it } from "vitest";

import {
  RecorderMachine,
  type ActiveCapture,
  type Clock,
  type MediaCapture,
} from "../src/recorder";

class FakeClock implements Clock {
  private t = 1_000_000;

  now(): number {
    return this.t;
  }

  advance(seconds: number): void {
    this.t += seconds * 1000;
  }
}

class FakeCapture implements MediaCapture {
  started = 0;
  failFirst: boolean;

  constructor(opts: { failFirst?: boolean } = {}) {
    this.failFirst = opts.failFirst ?? false;
  }

  async start(): Promise<ActiveCapture> {
    this.started += 1;
    if (this.failFirst) {
      this.failFirst = false;
      throw new Error("Permission denied");
    }
    return { stop: async () => new Blob(["audio-bytes"], { type: "audio/webm" }) };
  }
}

interface Harness {
  machine: RecorderMachine;
  clock: FakeClock;
  capture: FakeCapture;
  uploads: { blob: Blob; elapsedS: number }[];
}

function harness(
  minimumS: number,
  opts: { failUploads?: number; capture?: FakeCapture } = {},
): Harness {
  const clock = new FakeClock();
  const capture = opts.capture ?? new FakeCapture();
  const uploads: { blob: Blob; elapsedS: number }[] = [];
  let failuresLeft = opts.failUploads ?? 0;
  const machine = new RecorderMachine({
    minimumS,
    clock,
    capture,
    upload: async (blob, elapsedS) => {
      if (failuresLeft > 0) {
        failuresLeft -= 1;
        throw new Error("503 from the service");
      }
      uploads.push({ blob, elapsedS });
    },
  });
  return { machine, clock, capture, uploads };
}

describe("stop gating", () => {
  it("refuses to stop before a 20 s object minimum and shows the countdown", async () => {
    const h = harness(20);
    await h.machine.start();
    h.clock.advance(15);

    expect(h.machine.canStop()).toBe(false);
    expect(h.machine.view().remainingToMinimumS).toBeCloseTo(5, 5);
    expect(await h.machine.stop()).toBe(false);
    expect(h.machine.view().phase).toBe("recording"); // still going
    expect(h.uploads).toHaveLength(0);

    h.clock.advance(5);
    expect(h.machine.canStop()).toBe(true);
    expect(await h.machine.stop()).toBe(true);
    expect(h.machine.view().phase).toBe("done");
    expect(h.uploads).toHaveLength(1);
    expect(h.uploads[0].elapsedS).toBeCloseTo(20, 5);
  });

  it("scene narrations gate on the 60 s minimum", async () => {
    const h = harness(60);
    await h.machine.start();
    h.clock.advance(59.9);
    expect(await h.machine.stop()).toBe(false);
    h.clock.advance(0.1);
    expect(await h.machine.stop()).toBe(true);
    expect(h.uploads[0].elapsedS).toBeCloseTo(60, 5);
  });
});

describe("the 180 s ceiling", () => {
  it("force-stops at the cap and uploads exactly once", async () => {
    const h = harness(20);
    await h.machine.start();

    h.clock.advance(179.9);
    await h.machine.tick();
    expect(h.machine.view().phase).toBe("recording");

    h.clock.advance(0.2); // a late tick lands past the cap
    await h.machine.tick();
    expect(h.machine.view().phase).toBe("done");
    expect(h.uploads).toHaveLength(1);
    expect(h.uploads[0].elapsedS).toBe(180); // clamped, never over

    await h.machine.tick(); // further ticks are inert
    expect(h.uploads).toHaveLength(1);
  });
});

describe("failure and retry", () => {
  it("microphone denial lands in error with a retry that tries again", async () => {
    const capture = new FakeCapture({ failFirst: true });
    const h = harness(20, { capture });
    await h.machine.start();
    expect(h.machine.view().phase).toBe("error");
    expect(h.machine.view().error).toMatch(/microphone unavailable.*Permission denied/);

    await h.machine.retry(); // permission granted on the second ask
    expect(h.machine.view().phase).toBe("recording");
    expect(capture.started).toBe(2);
  });

  it("upload failure keeps the take and retry re-uploads without re-recording", async () => {
    const h = harness(20, { failUploads: 1 });
    await h.machine.start();
    h.clock.advance(25);
    expect(await h.machine.stop()).toBe(true);

    expect(h.machine.view().phase).toBe("error");
    expect(h.machine.view().error).toMatch(/upload failed/);
    expect(h.uploads).toHaveLength(0);

    await h.machine.retry();
    expect(h.machine.view().phase).toBe("done");
    expect(h.uploads).toHaveLength(1);
    expect(h.uploads[0].elapsedS).toBeCloseTo(25, 5);
    expect(h.capture.started).toBe(1); // the audio was never thrown away
  });

  it("rearm readies another take after done", async () => {
    const h = harness(20);
    await h.machine.start();
    h.clock.advance(30);
    await h.machine.stop();
    expect(h.machine.view().phase).toBe("done");

    h.machine.rearm();
    expect(h.machine.view().phase).toBe("idle");
    await h.machine.start();
    h.clock.advance(21);
    await h.machine.stop();
    expect(h.uploads).toHaveLength(2);
  });
});

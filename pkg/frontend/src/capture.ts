// Browser microphone capture behind the MediaCapture interface the recorder
// machine consumes. WebM/Opus preferred; WAV only as a last resort — both are
// formats the service can decode durations from.

import type { ActiveCapture, MediaCapture } from "./recorder";

const PREFERRED_TYPES = ["audio/webm;codecs=opus", "audio/webm", "audio/wav"];

export class MicrophoneCapture implements MediaCapture {
  async start(): Promise<ActiveCapture> {
    const stream = await navigator.mediaDevices.getUserMedia({ audio: true });
    const mimeType = PREFERRED_TYPES.find((t) => MediaRecorder.isTypeSupported(t));
    const recorder = new MediaRecorder(stream, mimeType ? { mimeType } : undefined);
    const chunks: BlobPart[] = [];
    recorder.addEventListener("dataavailable", (e) => {
      if (e.data.size > 0) chunks.push(e.data);
    });
    recorder.start();
    return {
      stop: () =>
        new Promise<Blob>((resolve) => {
          recorder.addEventListener(
            "stop",
            () => {
              stream.getTracks().forEach((t) => t.stop());
              resolve(new Blob(chunks, { type: recorder.mimeType || "audio/webm" }));
            },
            { once: true },
          );
          recorder.stop();
        }),
    };
  }
}

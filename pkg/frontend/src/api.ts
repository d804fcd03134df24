// Thin typed client for the annotation service.
//
// Every session mutation is compare-and-swap'd on the session version. The
// background transcriber bumps versions concurrently, so a mutation can come
// back 409 with code CONFLICT — that one case is retryable (refetch, resend).
// Other 409s (SESSION_IMMUTABLE, TRANSCRIPT_ALREADY_SET) are terminal.

import type {
  Asset,
  AttachResult,
  Session,
  SubmitResult,
  Task,
  TranscriptResult,
} from "./types";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${status} ${code}: ${detail}`);
    this.name = "ApiError";
  }
}

const CONFLICT_RETRIES = 5;

export class ApiClient {
  private fetchFn: FetchLike;

  constructor(
    private readonly baseUrl: string,
    private readonly token: string,
    fetchFn?: FetchLike,
  ) {
    this.fetchFn = fetchFn ?? ((input, init) => fetch(input, init));
  }

  // -- reads ---------------------------------------------------------------

  task(taskId: string): Promise<Task> {
    return this.json(this.request("GET", `/api/tasks/${taskId}`));
  }

  asset(assetId: string): Promise<Asset> {
    return this.json(this.request("GET", `/api/assets/${assetId}`));
  }

  async media(assetId: string): Promise<ArrayBuffer> {
    const r = await this.request("GET", `/api/assets/${assetId}/media`);
    if (!r.ok) throw await this.toError(r);
    return r.arrayBuffer();
  }

  session(sessionId: string): Promise<Session> {
    return this.json(this.request("GET", `/api/sessions/${sessionId}`));
  }

  // -- session mutations (version-checked) ----------------------------------

  openSession(body: {
    task_id: string;
    asset_id: string;
    language: string;
    native_speaker?: boolean;
  }): Promise<Session> {
    return this.json(
      this.request("POST", "/api/sessions", { json: body }),
    );
  }

  addPoint(sessionId: string, name: string, x: number, y: number): Promise<Session> {
    return this.withVersion(sessionId, (version) =>
      this.request("POST", `/api/sessions/${sessionId}/points`, {
        json: { version, name, x, y },
      }),
    );
  }

  attachRecording(sessionId: string, target: string, blob: Blob): Promise<AttachResult> {
    return this.withVersion(sessionId, (version) => {
      const form = new FormData();
      form.set("file", blob, "narration.webm");
      form.set("target", target);
      form.set("version", String(version));
      return this.request("POST", `/api/sessions/${sessionId}/recordings`, { form });
    });
  }

  unlockScene(sessionId: string): Promise<Session> {
    return this.withVersion(sessionId, (version) =>
      this.request("POST", `/api/sessions/${sessionId}/unlock-scene`, {
        json: { version },
      }),
    );
  }

  editTranscript(
    sessionId: string,
    recordingId: string,
    editedText: string,
  ): Promise<TranscriptResult> {
    return this.withVersion(sessionId, (version) =>
      this.request(
        "PUT",
        `/api/sessions/${sessionId}/recordings/${recordingId}/transcript`,
        { json: { version, edited_text: editedText } },
      ),
    );
  }

  // A rejected submit is an outcome, not an exception: the 422 body carries
  // the full report ({accepted: false, failures, ...}).
  async submit(sessionId: string): Promise<SubmitResult> {
    let last: ApiError | null = null;
    for (let attempt = 0; attempt <= CONFLICT_RETRIES; attempt++) {
      const session = await this.session(sessionId);
      const r = await this.request("POST", `/api/sessions/${sessionId}/submit`, {
        json: { version: session.version },
      });
      if (r.ok) return (await r.json()) as SubmitResult;
      const body = await r.clone().json().catch(() => null);
      if (r.status === 422 && body && typeof body.accepted === "boolean") {
        return body as SubmitResult;
      }
      const err = await this.toError(r, body);
      if (!(r.status === 409 && err.code === "CONFLICT")) throw err;
      last = err;
    }
    throw last ?? new ApiError(409, "CONFLICT", "version kept moving");
  }

  // -- plumbing --------------------------------------------------------------

  private async withVersion<T>(
    sessionId: string,
    send: (version: number) => Promise<Response>,
  ): Promise<T> {
    let last: ApiError | null = null;
    for (let attempt = 0; attempt <= CONFLICT_RETRIES; attempt++) {
      const session = await this.session(sessionId);
      const r = await send(session.version);
      if (r.ok) return (await r.json()) as T;
      const err = await this.toError(r);
      if (!(r.status === 409 && err.code === "CONFLICT")) throw err;
      last = err;
    }
    throw last ?? new ApiError(409, "CONFLICT", "version kept moving");
  }

  private request(
    method: string,
    path: string,
    opts: { json?: unknown; form?: FormData } = {},
  ): Promise<Response> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    let body: BodyInit | undefined;
    if (opts.form !== undefined) {
      body = opts.form; // fetch sets the multipart boundary itself
    } else if (opts.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(opts.json);
    }
    return this.fetchFn(`${this.baseUrl}${path}`, { method, headers, body });
  }

  private async json<T>(pending: Promise<Response>): Promise<T> {
    const r = await pending;
    if (!r.ok) throw await this.toError(r);
    return (await r.json()) as T;
  }

  private async toError(r: Response, parsed?: unknown): Promise<ApiError> {
    const body =
      parsed ?? (await r.clone().json().catch(() => null));
    if (body && typeof body === "object" && "code" in body) {
      const b = body as { code: string; detail?: string };
      return new ApiError(r.status, b.code, b.detail ?? "");
    }
    return new ApiError(r.status, "HTTP_ERROR", await r.text().catch(() => ""));
  }
}

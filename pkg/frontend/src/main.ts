// ============================================
// ANNOTATOR SHELL
// ============================================
//
// Single-page client for one annotation session. The URL names the session
// and credentials (?session=...&token=...); everything else is fetched from
// the service. Two screens share the recorder and transcript machinery:
//
//   IMAGE_2D  — click-to-point over the image, then one long narration
//   SCENE_3D  — per-object narrations, unlock, then the scene narration

import * as THREE from "three";
import { OrbitControls } from "three/examples/jsm/controls/OrbitControls.js";

import { ApiClient, ApiError } from "./api";
import { MicrophoneCapture } from "./capture";
import {
  QC,
  canRecord,
  longestFor,
  minimumFor,
  missingObjects,
  objectComplete,
  sceneStageReady,
  submitBlockers,
} from "./policy";
import { PointingBoard, percentFromClick } from "./pointing";
import { RecorderMachine, type RecorderView } from "./recorder";
import { SessionController } from "./session";
import { SCENE_TARGET, type Recording, type SceneObject } from "./types";
import { GlbParseError, SceneViewer, parseGlb } from "./viewer";

// ============================================
// DOM HELPERS
// ============================================

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function button(label: string, onClick: () => void): HTMLButtonElement {
  const b = el("button", "", label);
  b.type = "button";
  b.addEventListener("click", onClick);
  return b;
}

function clockLabel(seconds: number): string {
  const s = Math.max(0, Math.floor(seconds));
  return `${Math.floor(s / 60)}:${String(s % 60).padStart(2, "0")}`;
}

class Banner {
  readonly node = el("div", "banner hidden");

  show(kind: "error" | "ok" | "warn", text: string): void {
    this.node.className = `banner ${kind}`;
    this.node.textContent = text;
  }

  clear(): void {
    this.node.className = "banner hidden";
    this.node.textContent = "";
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) return `${err.code}: ${err.detail}`;
  return err instanceof Error ? err.message : String(err);
}

// ============================================
// RECORDER PANEL
// ============================================
//
// One panel records one target at a time. The machine enforces the floor and
// the 180 s ceiling; this panel just draws its state and forwards clicks.

interface RecorderPanelOptions {
  ctrl: SessionController;
  banner: Banner;
  targetLabel: (target: string) => string;
  canStart: (target: string) => boolean;
  onUploaded: (recording: Recording) => void;
  onStateChange: () => void;
}

class RecorderPanel {
  readonly node = el("div", "recorder");
  private machine: RecorderMachine | null = null;
  private target: string | null = null;
  private timerId: number | null = null;

  private title = el("div", "recorder-title", "recorder");
  private timer = el("div", "recorder-timer", "0:00");
  private hint = el("div", "recorder-hint");
  private status = el("div", "recorder-status");
  private recordBtn: HTMLButtonElement;
  private stopBtn: HTMLButtonElement;
  private retryBtn: HTMLButtonElement;

  constructor(private readonly opts: RecorderPanelOptions) {
    this.recordBtn = button("record", () => void this.start());
    this.stopBtn = button("stop", () => void this.stop());
    this.retryBtn = button("retry", () => void this.retry());
    const row = el("div", "recorder-buttons");
    row.append(this.recordBtn, this.stopBtn, this.retryBtn);
    this.node.append(this.title, this.timer, this.hint, row, this.status);
    this.setTarget(null);
  }

  setTarget(target: string | null): void {
    if (this.machine && this.machine.view().phase === "recording") return; // finish first
    this.target = target;
    this.machine = null;
    this.title.textContent = target ? `recording: ${this.opts.targetLabel(target)}` : "recorder";
    this.render();
  }

  currentTarget(): string | null {
    return this.target;
  }

  busy(): boolean {
    const phase = this.machine?.view().phase;
    return phase === "recording" || phase === "uploading";
  }

  private async start(): Promise<void> {
    const target = this.target;
    if (!target || !this.opts.canStart(target)) return;
    this.opts.banner.clear();
    this.machine = new RecorderMachine({
      minimumS: minimumFor(target),
      maximumS: QC.maxRecordingS,
      clock: { now: () => performance.now() },
      capture: new MicrophoneCapture(),
      upload: async (blob) => {
        const recording = await this.opts.ctrl.attachRecording(target, blob);
        this.opts.onUploaded(recording);
      },
      onChange: () => this.render(),
    });
    if (this.timerId === null) {
      this.timerId = window.setInterval(() => void this.machine?.tick(), 250);
    }
    await this.machine.start();
    this.render();
  }

  private async stop(): Promise<void> {
    if (!this.machine) return;
    const stopped = await this.machine.stop();
    if (!stopped) {
      const view = this.machine.view();
      this.status.textContent = `keep narrating — ${Math.ceil(view.remainingToMinimumS)} s to the ${view.minimumS} s minimum`;
    }
    this.render();
  }

  private async retry(): Promise<void> {
    await this.machine?.retry();
    this.render();
  }

  private render(): void {
    const view: RecorderView | null = this.machine ? this.machine.view() : null;
    const target = this.target;

    if (!target) {
      this.timer.textContent = "–";
      this.hint.textContent = "pick something to record";
      this.recordBtn.disabled = true;
      this.stopBtn.disabled = true;
      this.retryBtn.hidden = true;
      this.status.textContent = "";
      this.opts.onStateChange();
      return;
    }

    const minimum = minimumFor(target);
    this.hint.textContent = `minimum ${minimum} s, hard stop at ${QC.maxRecordingS} s`;

    if (!view || view.phase === "idle") {
      this.timer.textContent = "0:00";
      this.recordBtn.disabled = !this.opts.canStart(target);
      this.stopBtn.disabled = true;
      this.retryBtn.hidden = true;
      this.status.textContent = "";
    } else if (view.phase === "recording") {
      this.timer.textContent = `${clockLabel(view.elapsedS)} / ${clockLabel(QC.maxRecordingS)}`;
      this.recordBtn.disabled = true;
      this.stopBtn.disabled = !view.canStop;
      this.retryBtn.hidden = true;
      this.status.textContent = view.canStop
        ? "long enough — stop when done"
        : `stop unlocks in ${Math.ceil(view.remainingToMinimumS)} s`;
    } else if (view.phase === "uploading") {
      this.timer.textContent = clockLabel(view.elapsedS);
      this.recordBtn.disabled = true;
      this.stopBtn.disabled = true;
      this.retryBtn.hidden = true;
      this.status.textContent = "uploading…";
    } else if (view.phase === "done") {
      this.timer.textContent = clockLabel(view.elapsedS);
      this.recordBtn.disabled = !this.opts.canStart(target);
      this.stopBtn.disabled = true;
      this.retryBtn.hidden = true;
      this.status.textContent = "uploaded — transcript on its way";
      this.machine = null; // rearm for another take
    } else {
      this.timer.textContent = clockLabel(view.elapsedS);
      this.recordBtn.disabled = true;
      this.stopBtn.disabled = true;
      this.retryBtn.hidden = false;
      this.status.textContent = view.error ?? "something went wrong";
    }
    this.opts.onStateChange();
  }
}

// ============================================
// TRANSCRIPT LIST
// ============================================
//
// Machine text arrives asynchronously; the annotator's correction is stored
// next to it, never over it. Both stay visible, with the edit-distance flag
// once it crosses the review threshold.

class TranscriptList {
  readonly node = el("div", "transcripts");
  private watching = new Set<string>();

  constructor(
    private readonly ctrl: SessionController,
    private readonly banner: Banner,
    private readonly targetLabel: (target: string) => string,
    private readonly onChange: () => void,
  ) {}

  watch(recordingId: string): void {
    if (this.watching.has(recordingId)) return;
    this.watching.add(recordingId);
    void this.ctrl
      .waitForAutoTranscript(recordingId)
      .then(() => this.render())
      .catch((err) => this.banner.show("warn", describe(err)));
  }

  render(): void {
    this.node.replaceChildren();
    const recordings = this.ctrl.session.recordings;
    if (!recordings.length) {
      this.node.append(el("div", "muted", "no recordings yet"));
      this.onChange();
      return;
    }
    for (const rec of recordings) {
      this.node.append(this.row(rec));
      if (rec.auto_transcript === null) this.watch(rec.recording_id);
    }
    this.onChange();
  }

  private row(rec: Recording): HTMLElement {
    const row = el("div", "transcript-row");
    const head = el("div", "transcript-head");
    head.append(
      el("span", "chip", this.targetLabel(rec.target)),
      el("span", "muted", `${rec.duration_s.toFixed(1)} s`),
    );
    if (rec.discrepancy !== null && rec.discrepancy >= 0.5) {
      head.append(el("span", "chip warn", `flagged: discrepancy ${rec.discrepancy.toFixed(2)}`));
    }
    row.append(head);

    if (rec.auto_transcript === null) {
      row.append(el("div", "muted", "transcribing…"));
      return row;
    }

    const auto = el("div", "transcript-auto");
    auto.append(el("span", "muted", "machine: "), document.createTextNode(rec.auto_transcript));
    row.append(auto);

    if (rec.edited_transcript !== null) {
      const edited = el("div", "transcript-edited");
      edited.append(el("span", "muted", "edited: "), document.createTextNode(rec.edited_transcript));
      row.append(edited);
    }

    if (this.ctrl.session.stage !== "SUBMITTED") {
      const editor = el("textarea", "transcript-editor") as HTMLTextAreaElement;
      editor.value = rec.edited_transcript ?? rec.auto_transcript;
      editor.rows = 3;
      const save = button("save correction", () => {
        save.disabled = true;
        void this.ctrl
          .saveTranscript(rec.recording_id, editor.value)
          .then(() => this.render())
          .catch((err) => {
            save.disabled = false;
            this.banner.show("error", describe(err));
          });
      });
      row.append(editor, save);
    }
    return row;
  }
}

// ============================================
// SUBMIT PANEL
// ============================================

class SubmitPanel {
  readonly node = el("div", "submit-panel");
  private blockerList = el("ul", "blockers");
  private submitBtn: HTMLButtonElement;
  private verdict = el("div", "verdict");

  constructor(
    private readonly ctrl: SessionController,
    private readonly banner: Banner,
    private readonly onChange: () => void,
  ) {
    this.submitBtn = button("submit session", () => void this.submit());
    this.node.append(this.submitBtn, this.blockerList, this.verdict);
  }

  render(): void {
    const blockers = submitBlockers(this.ctrl.asset, this.ctrl.session);
    this.blockerList.replaceChildren(
      ...blockers.map((b) => el("li", "", `${b.code} — ${b.detail}`)),
    );
    this.submitBtn.disabled = blockers.length > 0;
    if (this.ctrl.session.stage === "SUBMITTED") {
      this.submitBtn.disabled = true;
      this.verdict.textContent = "session submitted";
      this.verdict.className = "verdict ok";
    }
  }

  private async submit(): Promise<void> {
    this.submitBtn.disabled = true;
    try {
      const result = await this.ctrl.submit();
      if (result.accepted) {
        this.banner.show("ok", "accepted — thanks for the narration");
      } else {
        this.banner.show(
          "error",
          `rejected: ${result.failures.map((f) => `${f.code} (${f.detail})`).join("; ")}`,
        );
      }
      if (result.flags.length) {
        this.banner.show(
          "warn",
          `accepted with ${result.flags.length} transcript flag(s) for review`,
        );
      }
    } catch (err) {
      this.banner.show("error", describe(err));
    }
    this.render();
    this.onChange();
  }
}

// ============================================
// IMAGE SCREEN
// ============================================

async function imageScreen(root: HTMLElement, ctrl: SessionController): Promise<void> {
  const banner = new Banner();
  const board = new PointingBoard();
  board.replaceFrom(ctrl.session.points);

  const stage = el("div", "stage");
  const rail = el("div", "rail");
  const columns = el("div", "columns");
  columns.append(stage, rail);
  root.append(banner.node, columns);

  // --- image + markers ---
  const box = el("div", "image-box");
  const img = el("img") as HTMLImageElement;
  img.alt = "image under annotation";
  const media = await ctrl.media();
  img.src = URL.createObjectURL(new Blob([media]));
  box.append(img);
  const counter = el("div", "counter");
  const nameInput = el("input") as HTMLInputElement;
  nameInput.placeholder = "name the next point (e.g. mug handle)";
  stage.append(box, counter, nameInput);

  let dragging: number | null = null;

  function renderMarkers(): void {
    box.querySelectorAll(".marker").forEach((m) => m.remove());
    for (const m of board.all()) {
      const dot = el("div", m.saved ? "marker saved" : "marker");
      dot.style.left = `${m.x}%`;
      dot.style.top = `${m.y}%`;
      dot.title = m.saved ? "saved — immutable" : "drag to adjust, then push points";
      const label = el("span", "marker-label", board.labelFor(m));
      dot.append(label);
      if (!m.saved) {
        dot.addEventListener("pointerdown", (e) => {
          e.stopPropagation();
          dragging = m.order;
          dot.setPointerCapture(e.pointerId);
        });
        dot.addEventListener("pointermove", (e) => {
          if (dragging !== m.order) return;
          const p = percentFromClick(box.getBoundingClientRect(), e.clientX, e.clientY);
          board.moveTo(m.order, p.x, p.y);
          dot.style.left = `${p.x}%`;
          dot.style.top = `${p.y}%`;
          label.textContent = board.labelFor(board.all()[m.order]);
        });
        dot.addEventListener("pointerup", () => {
          dragging = null;
          renderMarkers();
        });
      }
      box.append(dot);
    }
    counter.textContent = board.progressLabel();
    pointsPanelRender();
  }

  box.addEventListener("click", (e) => {
    if (ctrl.session.stage === "SUBMITTED" || dragging !== null) return;
    const p = percentFromClick(box.getBoundingClientRect(), e.clientX, e.clientY);
    const name = nameInput.value.trim() || `point ${board.count() + 1}`;
    nameInput.value = "";
    board.add(name, p.x, p.y);
    renderMarkers();
  });

  // --- rail: instructions, questions, points, recorder, transcripts, submit ---
  rail.append(el("h2", "", ctrl.task.title));
  if (ctrl.task.instructions) rail.append(el("p", "muted", ctrl.task.instructions));

  const checklist = el("div", "questions");
  checklist.append(el("h3", "", "cover these while narrating"));
  for (const q of ctrl.task.questions) {
    const label = el("label", "question");
    const cb = el("input") as HTMLInputElement;
    cb.type = "checkbox";
    label.append(cb, document.createTextNode(q));
    checklist.append(label);
  }
  rail.append(checklist);

  const pointsPanel = el("div", "points-panel");
  const pushBtn = button("push points to server", () => void pushPoints());
  pointsPanel.append(pushBtn);
  rail.append(pointsPanel);

  function pointsPanelRender(): void {
    pushBtn.disabled = board.unsaved().length === 0 || ctrl.session.stage === "SUBMITTED";
    pushBtn.textContent = board.unsaved().length
      ? `push ${board.unsaved().length} point(s) to server`
      : "all points saved";
    submitPanel.render();
  }

  async function pushPoints(): Promise<void> {
    banner.clear();
    for (const m of board.unsaved()) {
      try {
        await ctrl.addPoint(m.name, m.x, m.y);
        board.markSaved(m.order);
      } catch (err) {
        banner.show("error", `point "${m.name}" rejected — ${describe(err)}`);
        break;
      }
    }
    board.reconcile(ctrl.session.points);
    renderMarkers();
  }

  const transcripts = new TranscriptList(ctrl, banner, () => "image narration", () => submitPanel.render());
  const recorder = new RecorderPanel({
    ctrl,
    banner,
    targetLabel: () => "the whole image",
    canStart: (target) => canRecord(ctrl.session, target),
    onUploaded: (rec) => {
      transcripts.watch(rec.recording_id);
      transcripts.render();
    },
    onStateChange: () => submitPanel.render(),
  });
  recorder.setTarget(SCENE_TARGET);

  const submitPanel = new SubmitPanel(ctrl, banner, () => {
    renderMarkers();
    transcripts.render();
  });

  rail.append(recorder.node, el("h3", "", "transcripts"), transcripts.node, submitPanel.node);

  renderMarkers();
  transcripts.render();
  submitPanel.render();
}

// ============================================
// SCENE SCREEN
// ============================================

async function sceneScreen(root: HTMLElement, ctrl: SessionController): Promise<void> {
  const banner = new Banner();
  const stage = el("div", "stage");
  const rail = el("div", "rail");
  const columns = el("div", "columns");
  columns.append(stage, rail);
  root.append(banner.node, columns);

  const objects = ctrl.asset.objects;
  const names = new Map(objects.map((o) => [o.object_id, o.name]));
  const targetLabel = (target: string): string =>
    target === SCENE_TARGET ? "the whole scene" : (names.get(target) ?? target);

  // --- three.js view ---
  const viewer = new SceneViewer();
  const glArea = el("div", "gl-area");
  stage.append(glArea);

  const scene = new THREE.Scene();
  scene.background = new THREE.Color(0x18181c);
  scene.add(new THREE.AmbientLight(0xffffff, 0.7));
  const sun = new THREE.DirectionalLight(0xffffff, 1.2);
  sun.position.set(3, 6, 2);
  scene.add(sun, viewer.root);

  const camera = new THREE.PerspectiveCamera(55, 4 / 3, 0.05, 500);
  const renderer = new THREE.WebGLRenderer({ antialias: true });
  glArea.append(renderer.domElement);
  const controls = new OrbitControls(camera, renderer.domElement);

  function resize(): void {
    const w = glArea.clientWidth || 640;
    const h = Math.max(320, Math.round(w * 0.66));
    renderer.setSize(w, h);
    camera.aspect = w / h;
    camera.updateProjectionMatrix();
  }
  window.addEventListener("resize", resize);

  try {
    const media = await ctrl.media();
    viewer.setContent(await parseGlb(media));
    const pose = viewer.frame(camera);
    controls.target.copy(pose.target);
    controls.update();
  } catch (err) {
    const detail = err instanceof GlbParseError ? err.message : describe(err);
    banner.show("error", `${detail} — the object checklist still works; the 3D view does not`);
  }
  resize();
  renderer.setAnimationLoop(() => {
    controls.update();
    renderer.render(scene, camera);
  });

  const viewButtons = el("div", "view-buttons");
  viewButtons.append(
    button("reset camera", () => {
      const pose = viewer.resetCamera(camera);
      if (pose) {
        controls.target.copy(pose.target);
        controls.update();
      }
    }),
    button("show all objects", () => {
      viewer.clearIsolation();
      renderObjectList();
    }),
  );
  stage.append(viewButtons);

  // --- rail ---
  rail.append(el("h2", "", ctrl.task.title));
  const stageChip = el("div", "chip stage-chip");
  rail.append(stageChip);

  const objectList = el("div", "object-list");
  rail.append(el("h3", "", "objects"), objectList);

  const unlockBtn = button("unlock scene narration", () => void unlock());
  const unlockHint = el("div", "muted");
  rail.append(unlockBtn, unlockHint);

  const transcripts = new TranscriptList(ctrl, banner, targetLabel, () => submitPanel.render());
  const recorder = new RecorderPanel({
    ctrl,
    banner,
    targetLabel,
    canStart: (target) => canRecord(ctrl.session, target) && !recorder.busy(),
    onUploaded: (rec) => {
      transcripts.watch(rec.recording_id);
      transcripts.render();
      renderObjectList();
    },
    onStateChange: () => renderGates(),
  });

  const submitPanel = new SubmitPanel(ctrl, banner, () => {
    renderObjectList();
    transcripts.render();
  });

  rail.append(recorder.node, el("h3", "", "transcripts"), transcripts.node, submitPanel.node);

  function objectRow(obj: SceneObject): HTMLElement {
    const row = el("div", "object-row");
    const recs = ctrl.session.recordings;
    const longest = longestFor(recs, obj.object_id);
    const done = objectComplete(recs, obj.object_id);
    row.append(
      el("span", done ? "chip ok" : "chip", done ? "✓" : `${longest.toFixed(0)}/${QC.minObjectRecordingS}s`),
      el("span", "object-name", obj.name),
    );
    const isolateBtn = button(
      viewer.isolated() === obj.node_path ? "isolated" : "isolate",
      () => {
        try {
          viewer.isolated() === obj.node_path ? viewer.clearIsolation() : viewer.isolate(obj.node_path);
        } catch (err) {
          banner.show("warn", describe(err));
        }
        renderObjectList();
      },
    );
    const recordBtn = button("record", () => {
      recorder.setTarget(obj.object_id);
      renderGates();
    });
    recordBtn.disabled = !canRecord(ctrl.session, obj.object_id) || recorder.busy();
    row.append(isolateBtn, recordBtn);
    return row;
  }

  function renderObjectList(): void {
    objectList.replaceChildren(...objects.map(objectRow));
    renderGates();
  }

  function renderGates(): void {
    const session = ctrl.session;
    stageChip.textContent = `stage: ${session.stage}`;

    const missing = missingObjects(ctrl.asset, session.recordings);
    unlockBtn.disabled = !sceneStageReady(ctrl.asset, session) || recorder.busy();
    unlockBtn.hidden = session.stage !== "OBJECTS";
    unlockHint.textContent =
      session.stage === "OBJECTS" && missing.length
        ? `still below ${QC.minObjectRecordingS} s: ${missing.map((o) => o.name).join(", ")}`
        : "";

    const sceneBtn = sceneRecordBtn;
    sceneBtn.disabled = !canRecord(session, SCENE_TARGET) || recorder.busy();
    sceneBtn.title =
      session.stage === "OBJECTS"
        ? "locked until every object has its 20 s narration and the stage is unlocked"
        : "";
    submitPanel.render();
  }

  const sceneRecordBtn = button("record scene narration", () => {
    recorder.setTarget(SCENE_TARGET);
    renderGates();
  });
  rail.insertBefore(sceneRecordBtn, recorder.node);

  async function unlock(): Promise<void> {
    banner.clear();
    try {
      await ctrl.unlockScene();
    } catch (err) {
      banner.show("error", describe(err));
      await ctrl.refresh();
    }
    renderObjectList();
  }

  renderObjectList();
  transcripts.render();
  submitPanel.render();
}

// ============================================
// BOOT
// ============================================

function connectForm(root: HTMLElement): void {
  const form = el("div", "connect");
  form.append(el("h2", "", "open a session"));
  const sessionInput = el("input") as HTMLInputElement;
  sessionInput.placeholder = "session id";
  const tokenInput = el("input") as HTMLInputElement;
  tokenInput.placeholder = "access token";
  form.append(
    sessionInput,
    tokenInput,
    button("open", () => {
      const q = new URLSearchParams({
        session: sessionInput.value.trim(),
        token: tokenInput.value.trim(),
      });
      location.search = q.toString();
    }),
  );
  root.append(form);
}

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const params = new URLSearchParams(location.search);
  const sessionId = params.get("session");
  const token = params.get("token");
  if (!sessionId || !token) {
    connectForm(root);
    return;
  }

  const api = new ApiClient("", token);
  const ctrl = new SessionController(api, sessionId);
  try {
    await ctrl.load();
  } catch (err) {
    const banner = new Banner();
    banner.show("error", `could not open session — ${describe(err)}`);
    root.append(banner.node);
    return;
  }

  if (ctrl.asset.kind === "IMAGE_2D") {
    await imageScreen(root, ctrl);
  } else {
    await sceneScreen(root, ctrl);
  }
}

void boot();

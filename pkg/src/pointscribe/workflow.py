"""Annotation state machine and quality gate.

Sessions move through OBJECTS → SCENE → SUBMITTED (2D sessions start at
SCENE). Every mutating operation bumps `session.version`; persistence layers
use that for compare-and-set. Gate thresholds live in `QCPolicy` so a task
can carry its own; the defaults encode the standing recording rules.
"""
from __future__ import annotations

from dataclasses import dataclass

from .model import (
    SCENE_TARGET,
    AnnotationSession,
    Asset,
    AssetKind,
    PointAnnotation,
    Recording,
    Stage,
    Task,
    new_id,
    validate,
)


class WorkflowError(Exception):
    """Raised when an operation's precondition fails; `code` is machine-readable."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class QCPolicy:
    min_object_recording_s: float = 20.0
    min_scene_or_image_recording_s: float = 60.0
    max_recording_s: float = 180.0
    server_tolerance_s: float = 5.0
    min_points_2d: int = 5
    discrepancy_flag_threshold: float = 0.5

    def __post_init__(self) -> None:
        thresholds = (
            self.min_object_recording_s,
            self.min_scene_or_image_recording_s,
            self.max_recording_s,
            self.min_points_2d,
            self.discrepancy_flag_threshold,
        )
        if any(t <= 0 for t in thresholds):
            raise ValueError("QCPolicy thresholds must be strictly positive")
        if max(self.min_object_recording_s, self.min_scene_or_image_recording_s) > self.max_recording_s:
            raise ValueError("QCPolicy minimum durations must not exceed the maximum")

    @property
    def hard_cap_s(self) -> float:
        return self.max_recording_s + self.server_tolerance_s


DEFAULT_POLICY = QCPolicy()


@dataclass(frozen=True)
class Failure:
    code: str
    detail: str = ""


@dataclass(frozen=True)
class TranscriptFlag:
    recording_id: str
    discrepancy: float


@dataclass(frozen=True)
class SubmissionReport:
    accepted: bool
    failures: tuple[Failure, ...]
    flags: tuple[TranscriptFlag, ...]

    def __post_init__(self) -> None:
        assert self.accepted == (not self.failures)


def start_session(
    task: Task,
    asset: Asset,
    annotator_id: str,
    language: str,
    *,
    native_speaker: bool = False,
    session_id: str | None = None,
) -> AnnotationSession:
    """Open an annotation session; 3D sessions begin in the object stage."""
    if asset.asset_id not in task.asset_ids:
        raise WorkflowError("NOT_FOUND", f"asset {asset.asset_id} is not part of task {task.task_id}")
    if asset.org_id and asset.org_id != task.org_id:
        raise WorkflowError("FORBIDDEN", "asset and task belong to different organizations")
    stage = Stage.OBJECTS if task.kind is AssetKind.SCENE_3D else Stage.SCENE
    return AnnotationSession(
        session_id=session_id or new_id(),
        task_id=task.task_id,
        asset_id=asset.asset_id,
        annotator_id=annotator_id,
        language=language,
        stage=stage,
        org_id=task.org_id,
        native_speaker=native_speaker,
    )


def _require_open(session: AnnotationSession) -> None:
    if session.stage is Stage.SUBMITTED:
        raise WorkflowError("SESSION_IMMUTABLE", "session already submitted")


def add_point(session: AnnotationSession, point: PointAnnotation, *, asset: Asset) -> AnnotationSession:
    """Append a named point; 2D images only."""
    _require_open(session)
    if asset.kind is not AssetKind.IMAGE_2D:
        raise WorkflowError("WRONG_ASSET_KIND", "points are placed on 2D images only")
    violations = validate(point)
    if violations:
        v = violations[0]
        raise WorkflowError(v.code, f"{v.field}: {v.detail}".strip(": "))
    session.points.append(PointAnnotation(name=point.name, x=point.x, y=point.y, order=len(session.points)))
    session.version += 1
    return session


def attach_recording(
    session: AnnotationSession,
    target: str,
    audio_ref: str,
    duration_s: float,
    *,
    asset: Asset,
    policy: QCPolicy = DEFAULT_POLICY,
) -> Recording:
    """Persist a recording against an object or the whole scene/image.

    Minimum durations are checked at submit time; the hard cap (180 s plus
    server tolerance) rejects here. Object targets are valid only during the
    OBJECTS stage, the scene target only during SCENE.
    """
    _require_open(session)
    if duration_s > policy.hard_cap_s:
        raise WorkflowError(
            "DURATION_EXCEEDED",
            f"{duration_s:g} s exceeds the {policy.hard_cap_s:g} s cap",
        )
    if duration_s <= 0:
        raise WorkflowError("BAD_DURATION", f"duration must be positive, got {duration_s!r}")

    if target == SCENE_TARGET:
        if session.stage is not Stage.SCENE:
            raise WorkflowError("STAGE_LOCKED", "scene recording requires the SCENE stage")
    else:
        if asset.object_by_id(target) is None:
            raise WorkflowError("NOT_FOUND", f"no object {target!r} on asset {asset.asset_id}")
        if session.stage is not Stage.OBJECTS:
            raise WorkflowError("STAGE_LOCKED", "object recordings are only accepted during the OBJECTS stage")

    recording = Recording(
        recording_id=new_id(),
        target=target,
        audio_ref=audio_ref,
        duration_s=duration_s,
    )
    session.recordings.append(recording)
    session.version += 1
    return recording


def set_auto_transcript(session: AnnotationSession, recording_id: str, text: str) -> Recording:
    """Fill the machine transcript. Write-once; arrives asynchronously, so a
    submitted session still accepts it (stage never changes)."""
    recording = session.recording_by_id(recording_id)
    if recording is None:
        raise WorkflowError("NOT_FOUND", f"no recording {recording_id!r}")
    if recording.auto_transcript is not None:
        raise WorkflowError("TRANSCRIPT_ALREADY_SET", recording_id)
    recording.auto_transcript = text
    session.version += 1
    return recording


def unlock_scene_stage(
    session: AnnotationSession,
    *,
    asset: Asset,
    policy: QCPolicy = DEFAULT_POLICY,
) -> AnnotationSession:
    """Advance OBJECTS → SCENE once every object has a long-enough recording."""
    _require_open(session)
    if session.stage is not Stage.OBJECTS:
        raise WorkflowError("STAGE_LOCKED", "scene stage already unlocked")
    incomplete = _incomplete_objects(session, asset, policy)
    if incomplete:
        raise WorkflowError("OBJECTS_INCOMPLETE", "; ".join(incomplete))
    session.stage = Stage.SCENE
    session.version += 1
    return session


def _incomplete_objects(session: AnnotationSession, asset: Asset, policy: QCPolicy) -> list[str]:
    missing = []
    for obj in asset.objects:
        recs = session.recordings_for(obj.object_id)
        if not recs:
            missing.append(f"{obj.name} ({obj.object_id}): no recording")
        elif max(r.duration_s for r in recs) < policy.min_object_recording_s:
            best = max(r.duration_s for r in recs)
            missing.append(
                f"{obj.name} ({obj.object_id}): longest recording {best:g} s "
                f"< {policy.min_object_recording_s:g} s"
            )
    return missing


def edit_transcript(
    session: AnnotationSession,
    recording_id: str,
    edited_text: str,
) -> Recording:
    """Store the annotator's corrected transcript alongside the machine one."""
    _require_open(session)
    recording = session.recording_by_id(recording_id)
    if recording is None:
        raise WorkflowError("NOT_FOUND", f"no recording {recording_id!r}")
    if recording.auto_transcript is None:
        raise WorkflowError("TRANSCRIPT_PENDING", recording_id)
    recording.edited_transcript = edited_text
    recording.discrepancy = transcript_discrepancy(recording.auto_transcript, edited_text)
    session.version += 1
    return recording


def transcript_discrepancy(auto: str, edited: str) -> float:
    """Normalized edit distance: Levenshtein / max(len(auto), len(edited), 1).

    Computed over Unicode scalar values, so it is alphabet-agnostic.
    """
    return _levenshtein(auto, edited) / max(len(auto), len(edited), 1)


def _levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(
                    previous[j] + 1,  # deletion
                    current[j - 1] + 1,  # insertion
                    previous[j - 1] + (ca != cb),  # substitution
                )
            )
        previous = current
    return previous[-1]


def submit(
    session: AnnotationSession,
    *,
    asset: Asset,
    policy: QCPolicy = DEFAULT_POLICY,
) -> SubmissionReport:
    """Run every gate; accept (stage → SUBMITTED) only if all pass.

    A rejected submit leaves the session untouched. Transcript-discrepancy
    flags ride along on the report either way and never block acceptance.
    """
    if session.stage is Stage.SUBMITTED:
        raise WorkflowError("SESSION_IMMUTABLE", "session already submitted")

    failures: list[Failure] = []
    scene_recs = session.recordings_for(SCENE_TARGET)
    scene_ok = any(r.duration_s >= policy.min_scene_or_image_recording_s for r in scene_recs)

    if asset.kind is AssetKind.IMAGE_2D:
        if len(session.points) < policy.min_points_2d:
            failures.append(
                Failure(
                    "MIN_POINTS",
                    f"{len(session.points)} points < required {policy.min_points_2d}",
                )
            )
        if not scene_ok:
            failures.append(Failure("MIN_DURATION", _scene_duration_detail(scene_recs, policy)))
    else:
        incomplete = _incomplete_objects(session, asset, policy)
        if session.stage is not Stage.SCENE or incomplete:
            detail = "; ".join(incomplete) if incomplete else "scene stage never unlocked"
            failures.append(Failure("OBJECTS_INCOMPLETE", detail))
        if not scene_ok:
            failures.append(Failure("MIN_DURATION", _scene_duration_detail(scene_recs, policy)))

    flags = tuple(
        TranscriptFlag(r.recording_id, r.discrepancy)
        for r in session.recordings
        if r.discrepancy is not None and r.discrepancy >= policy.discrepancy_flag_threshold
    )

    if failures:
        return SubmissionReport(accepted=False, failures=tuple(failures), flags=flags)

    session.stage = Stage.SUBMITTED
    session.version += 1
    return SubmissionReport(accepted=True, failures=(), flags=flags)


def _scene_duration_detail(scene_recs: list[Recording], policy: QCPolicy) -> str:
    need = policy.min_scene_or_image_recording_s
    if not scene_recs:
        return f"no scene/image recording of at least {need:g} s"
    best = max(r.duration_s for r in scene_recs)
    return f"longest scene/image recording {best:g} s < {need:g} s"

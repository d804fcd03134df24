"""Domain types shared by every other module.

All types are immutable values once constructed (frozen dataclasses with
tuple collections) and safe to share across threads; mutation happens only
through the workflow engine, which returns new instances. `validate` reports
invariant violations as values and never raises on a well-formed entity.
"""
from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from decimal import ROUND_HALF_EVEN, Decimal
from enum import Enum
from typing import Any

import numpy as np

from . import taxonomy
from .taxonomy import Site


class AssetKind(str, Enum):
    IMAGE_2D = "IMAGE_2D"
    SCENE_3D = "SCENE_3D"


class PromptProfile(str, Enum):
    PART_A = "PART_A"
    PART_B = "PART_B"


class Stage(str, Enum):
    OBJECTS = "OBJECTS"
    SCENE = "SCENE"
    SUBMITTED = "SUBMITTED"


# Stage ordering used by the workflow's monotonicity rule.
STAGE_ORDER = {Stage.OBJECTS: 0, Stage.SCENE: 1, Stage.SUBMITTED: 2}

# Recording target for the whole scene or image; any other target value is
# the object_id of a SceneObject.
SCENE_TARGET = "SCENE_OR_IMAGE"


class CaptionSource(str, Enum):
    RAW_TRANSCRIPT = "RAW_TRANSCRIPT"
    SUMMARIZED = "SUMMARIZED"


class QACategory(str, Enum):
    SCENE_CLASSIFICATION = "SCENE_CLASSIFICATION"
    OBJECT_PRESENCE = "OBJECT_PRESENCE"
    LOCALIZATION = "LOCALIZATION"
    SIZE_COMPARISON = "SIZE_COMPARISON"
    DISTANCE_REASONING = "DISTANCE_REASONING"
    ANOMALY_DETECTION = "ANOMALY_DETECTION"
    DENSE_DESCRIPTION = "DENSE_DESCRIPTION"


# The six categories that may appear as multiple-choice questions.
MCQA_CATEGORIES: tuple[QACategory, ...] = (
    QACategory.SCENE_CLASSIFICATION,
    QACategory.OBJECT_PRESENCE,
    QACategory.LOCALIZATION,
    QACategory.SIZE_COMPARISON,
    QACategory.DISTANCE_REASONING,
    QACategory.ANOMALY_DETECTION,
)


class QAKind(str, Enum):
    OEQA = "OEQA"
    MCQA = "MCQA"


def new_id() -> str:
    return uuid.uuid4().hex


def utcnow() -> datetime:
    return datetime.now(timezone.utc)


_COORD_QUANTUM = Decimal("0.01")


def canonical_coord(value: float | int | str | Decimal) -> float:
    """Quantize a percent coordinate to two decimals, ties to even."""
    if isinstance(value, float):
        dec = Decimal(repr(value))
    else:
        dec = Decimal(str(value))
    return float(dec.quantize(_COORD_QUANTUM, rounding=ROUND_HALF_EVEN))


def format_coord(value: float) -> str:
    return f"{value:.2f}"


@dataclass(frozen=True)
class Violation:
    code: str
    field: str = ""
    detail: str = ""


@dataclass(frozen=True)
class SceneObject:
    object_id: str
    name: str
    node_path: str

    def to_dict(self) -> dict[str, Any]:
        return {"object_id": self.object_id, "name": self.name, "node_path": self.node_path}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SceneObject":
        return cls(object_id=d["object_id"], name=d["name"], node_path=d["node_path"])


@dataclass(frozen=True)
class SceneMeta:
    category: str
    subcategory: str
    site: Site

    def to_dict(self) -> dict[str, Any]:
        return {"category": self.category, "subcategory": self.subcategory, "site": self.site.value}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SceneMeta":
        return cls(category=d["category"], subcategory=d["subcategory"], site=Site(d["site"]))

    @classmethod
    def for_subcategory(cls, subcategory: str) -> "SceneMeta":
        category, site = taxonomy.subcategory_info(subcategory)
        return cls(category=category, subcategory=subcategory, site=site)


@dataclass(frozen=True)
class Asset:
    asset_id: str
    kind: AssetKind
    media_ref: str
    scene_meta: SceneMeta | None = None
    objects: tuple[SceneObject, ...] = ()
    org_id: str = ""

    def object_by_id(self, object_id: str) -> SceneObject | None:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        return None

    def to_dict(self) -> dict[str, Any]:
        return {
            "asset_id": self.asset_id,
            "kind": self.kind.value,
            "media_ref": self.media_ref,
            "scene_meta": self.scene_meta.to_dict() if self.scene_meta else None,
            "objects": [o.to_dict() for o in self.objects],
            "org_id": self.org_id,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Asset":
        return cls(
            asset_id=d["asset_id"],
            kind=AssetKind(d["kind"]),
            media_ref=d["media_ref"],
            scene_meta=SceneMeta.from_dict(d["scene_meta"]) if d.get("scene_meta") else None,
            objects=tuple(SceneObject.from_dict(o) for o in d.get("objects", ())),
            org_id=d.get("org_id", ""),
        )


@dataclass(frozen=True)
class Task:
    task_id: str
    title: str
    kind: AssetKind
    instructions: str
    questions: tuple[str, ...]
    asset_ids: tuple[str, ...]
    org_id: str
    created_at: datetime
    prompt_profile: PromptProfile | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "task_id": self.task_id,
            "title": self.title,
            "kind": self.kind.value,
            "instructions": self.instructions,
            "questions": list(self.questions),
            "asset_ids": list(self.asset_ids),
            "org_id": self.org_id,
            "created_at": self.created_at.isoformat(),
            "prompt_profile": self.prompt_profile.value if self.prompt_profile else None,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Task":
        return cls(
            task_id=d["task_id"],
            title=d["title"],
            kind=AssetKind(d["kind"]),
            instructions=d.get("instructions", ""),
            questions=tuple(d.get("questions", ())),
            asset_ids=tuple(d.get("asset_ids", ())),
            org_id=d["org_id"],
            created_at=datetime.fromisoformat(d["created_at"]),
            prompt_profile=PromptProfile(d["prompt_profile"]) if d.get("prompt_profile") else None,
        )


def default_questions(kind: AssetKind, profile: PromptProfile | None) -> tuple[str, ...]:
    if kind is AssetKind.SCENE_3D:
        return taxonomy.SCENE_PROMPTS_3D
    if profile is PromptProfile.PART_B:
        return taxonomy.IMAGE_PROMPTS_PART_B
    return taxonomy.IMAGE_PROMPTS_PART_A


def new_task(
    title: str,
    kind: AssetKind,
    org_id: str,
    *,
    instructions: str = "",
    questions: tuple[str, ...] | None = None,
    asset_ids: tuple[str, ...] = (),
    prompt_profile: PromptProfile | None = None,
    task_id: str | None = None,
) -> Task:
    """Build a task, filling the default question set for its kind/profile."""
    if kind is AssetKind.IMAGE_2D and prompt_profile is None:
        prompt_profile = PromptProfile.PART_A
    if kind is AssetKind.SCENE_3D:
        prompt_profile = None
    if questions is None:
        questions = default_questions(kind, prompt_profile)
    return Task(
        task_id=task_id or new_id(),
        title=title,
        kind=kind,
        instructions=instructions,
        questions=tuple(questions),
        asset_ids=tuple(asset_ids),
        org_id=org_id,
        created_at=utcnow(),
        prompt_profile=prompt_profile,
    )


@dataclass(frozen=True)
class PointAnnotation:
    name: str
    x: float
    y: float
    order: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", canonical_coord(self.x))
        object.__setattr__(self, "y", canonical_coord(self.y))

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "x": self.x, "y": self.y, "order": self.order}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PointAnnotation":
        return cls(name=d["name"], x=d["x"], y=d["y"], order=d.get("order", 0))


@dataclass
class Recording:
    recording_id: str
    target: str  # SCENE_TARGET or a SceneObject object_id
    audio_ref: str
    duration_s: float
    auto_transcript: str | None = None
    edited_transcript: str | None = None
    discrepancy: float | None = None

    def text(self) -> str | None:
        """The best available transcript: annotator-edited wins."""
        return self.edited_transcript if self.edited_transcript is not None else self.auto_transcript

    def to_dict(self) -> dict[str, Any]:
        return {
            "recording_id": self.recording_id,
            "target": self.target,
            "audio_ref": self.audio_ref,
            "duration_s": self.duration_s,
            "auto_transcript": self.auto_transcript,
            "edited_transcript": self.edited_transcript,
            "discrepancy": self.discrepancy,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Recording":
        return cls(
            recording_id=d["recording_id"],
            target=d["target"],
            audio_ref=d["audio_ref"],
            duration_s=d["duration_s"],
            auto_transcript=d.get("auto_transcript"),
            edited_transcript=d.get("edited_transcript"),
            discrepancy=d.get("discrepancy"),
        )


@dataclass
class AnnotationSession:
    """Mutable annotation state; all mutation goes through `workflow` ops."""

    session_id: str
    task_id: str
    asset_id: str
    annotator_id: str
    language: str  # BCP-47, annotator-declared
    stage: Stage
    points: list[PointAnnotation] = field(default_factory=list)
    recordings: list[Recording] = field(default_factory=list)
    version: int = 1
    org_id: str = ""
    native_speaker: bool = False

    def recording_by_id(self, recording_id: str) -> Recording | None:
        for rec in self.recordings:
            if rec.recording_id == recording_id:
                return rec
        return None

    def recordings_for(self, target: str) -> list[Recording]:
        return [r for r in self.recordings if r.target == target]

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "task_id": self.task_id,
            "asset_id": self.asset_id,
            "annotator_id": self.annotator_id,
            "language": self.language,
            "stage": self.stage.value,
            "points": [p.to_dict() for p in self.points],
            "recordings": [r.to_dict() for r in self.recordings],
            "version": self.version,
            "org_id": self.org_id,
            "native_speaker": self.native_speaker,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "AnnotationSession":
        return cls(
            session_id=d["session_id"],
            task_id=d["task_id"],
            asset_id=d["asset_id"],
            annotator_id=d["annotator_id"],
            language=d["language"],
            stage=Stage(d["stage"]),
            points=[PointAnnotation.from_dict(p) for p in d.get("points", ())],
            recordings=[Recording.from_dict(r) for r in d.get("recordings", ())],
            version=d.get("version", 1),
            org_id=d.get("org_id", ""),
            native_speaker=d.get("native_speaker", False),
        )


@dataclass(frozen=True)
class Caption:
    asset_id: str
    language: str
    text: str
    source: CaptionSource
    contributing_recording_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "asset_id": self.asset_id,
            "language": self.language,
            "text": self.text,
            "source": self.source.value,
            "contributing_recording_ids": list(self.contributing_recording_ids),
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Caption":
        return cls(
            asset_id=d["asset_id"],
            language=d["language"],
            text=d["text"],
            source=CaptionSource(d["source"]),
            contributing_recording_ids=tuple(d.get("contributing_recording_ids", ())),
        )


@dataclass(frozen=True)
class QAPair:
    scene_id: str
    language: str
    category: QACategory
    question: str
    kind: QAKind
    answer: str
    options: tuple[str, str, str, str] | None = None
    correct_index: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "scene_id": self.scene_id,
            "language": self.language,
            "category": self.category.value,
            "question": self.question,
            "kind": self.kind.value,
            "answer": self.answer,
            "options": list(self.options) if self.options else None,
            "correct_index": self.correct_index,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "QAPair":
        options = d.get("options")
        return cls(
            scene_id=d["scene_id"],
            language=d["language"],
            category=QACategory(d["category"]),
            question=d["question"],
            kind=QAKind(d["kind"]),
            answer=d["answer"],
            options=tuple(options) if options else None,
            correct_index=d.get("correct_index"),
        )


DEFAULT_CLOUD_POINTS = 8192


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Sampled scene surface: rows are (x, y, z, r, g, b), RGB in [0, 1]."""

    scene_id: str
    points: np.ndarray
    n: int = field(default=0)

    def __post_init__(self) -> None:
        if self.n == 0:
            object.__setattr__(self, "n", int(self.points.shape[0]))


def validate(entity: Any) -> list[Violation]:
    """Collect every invariant violation of a constructed entity.

    Total: returns a (possibly empty) list for any syntactically well-formed
    entity and never raises.
    """
    out: list[Violation] = []
    if isinstance(entity, PointAnnotation):
        _validate_point(entity, out, prefix="")
    elif isinstance(entity, Task):
        _validate_task(entity, out)
    elif isinstance(entity, Asset):
        _validate_asset(entity, out)
    elif isinstance(entity, SceneObject):
        if not entity.name.strip():
            out.append(Violation("EMPTY_NAME", "name"))
        if not entity.node_path.strip():
            out.append(Violation("EMPTY_NODE_PATH", "node_path"))
    elif isinstance(entity, Recording):
        _validate_recording(entity, out, prefix="")
    elif isinstance(entity, AnnotationSession):
        _validate_session(entity, out)
    elif isinstance(entity, Caption):
        if entity.source is CaptionSource.SUMMARIZED and not entity.contributing_recording_ids:
            out.append(Violation("MISSING_CONTRIBUTORS", "contributing_recording_ids"))
    elif isinstance(entity, QAPair):
        _validate_qa(entity, out)
    elif isinstance(entity, PointCloud):
        _validate_cloud(entity, out)
    return out


def _validate_point(p: PointAnnotation, out: list[Violation], prefix: str) -> None:
    if not p.name.strip():
        out.append(Violation("EMPTY_NAME", prefix + "name"))
    for axis, value in (("x", p.x), ("y", p.y)):
        if not 0.0 <= value <= 100.0:
            out.append(Violation("COORD_RANGE", prefix + axis, f"{value} outside [0, 100]"))


def _validate_task(t: Task, out: list[Violation]) -> None:
    if not t.questions:
        out.append(Violation("EMPTY_QUESTIONS", "questions"))
    if t.kind is AssetKind.SCENE_3D and t.prompt_profile is not None:
        out.append(Violation("PROFILE_ON_3D", "prompt_profile"))
    if t.kind is AssetKind.IMAGE_2D and t.prompt_profile is None:
        out.append(Violation("MISSING_PROFILE", "prompt_profile"))


def _validate_asset(a: Asset, out: list[Violation]) -> None:
    if a.kind is AssetKind.SCENE_3D:
        if a.scene_meta is None:
            out.append(Violation("MISSING_SCENE_META", "scene_meta"))
        else:
            meta = a.scene_meta
            if not taxonomy.is_subcategory(meta.subcategory):
                out.append(Violation("BAD_SUBCATEGORY", "scene_meta.subcategory", meta.subcategory))
            else:
                category, site = taxonomy.subcategory_info(meta.subcategory)
                if meta.category != category or meta.site is not site:
                    out.append(
                        Violation(
                            "BAD_SUBCATEGORY",
                            "scene_meta",
                            f"{meta.subcategory} belongs to {category}/{site.value}",
                        )
                    )
        if not a.objects:
            out.append(Violation("NO_OBJECTS", "objects"))
    else:
        if a.objects:
            out.append(Violation("OBJECTS_ON_IMAGE", "objects"))


def _validate_recording(r: Recording, out: list[Violation], prefix: str) -> None:
    if not r.duration_s > 0:
        out.append(Violation("BAD_DURATION", prefix + "duration_s", str(r.duration_s)))
    if r.discrepancy is not None and not 0.0 <= r.discrepancy <= 1.0:
        out.append(Violation("BAD_DISCREPANCY", prefix + "discrepancy", str(r.discrepancy)))


def _validate_session(s: AnnotationSession, out: list[Violation]) -> None:
    if s.version < 1:
        out.append(Violation("BAD_VERSION", "version", str(s.version)))
    for i, p in enumerate(s.points):
        _validate_point(p, out, prefix=f"points[{i}].")
        if p.order != i:
            out.append(Violation("BAD_POINT_ORDER", f"points[{i}].order", f"{p.order} != {i}"))
    for i, r in enumerate(s.recordings):
        _validate_recording(r, out, prefix=f"recordings[{i}].")


def _validate_qa(q: QAPair, out: list[Violation]) -> None:
    if q.category is QACategory.DENSE_DESCRIPTION and q.kind is QAKind.MCQA:
        out.append(Violation("DENSE_MCQA", "kind"))
    if q.kind is QAKind.MCQA:
        if q.options is None or q.correct_index is None:
            out.append(Violation("MISSING_OPTIONS", "options"))
            return
        if len(q.options) != 4:
            out.append(Violation("BAD_OPTION_COUNT", "options", str(len(q.options))))
        if len(set(q.options)) != len(q.options):
            out.append(Violation("DUPLICATE_OPTIONS", "options"))
        if not 0 <= q.correct_index < len(q.options):
            out.append(Violation("BAD_CORRECT_INDEX", "correct_index", str(q.correct_index)))
        elif q.options[q.correct_index] != q.answer:
            out.append(Violation("ANSWER_MISMATCH", "answer"))
    else:
        if q.options is not None or q.correct_index is not None:
            out.append(Violation("OPTIONS_ON_OEQA", "options"))


def _validate_cloud(c: PointCloud, out: list[Violation]) -> None:
    pts = np.asarray(c.points)
    if pts.ndim != 2 or pts.shape[1] != 6:
        out.append(Violation("BAD_SHAPE", "points", str(pts.shape)))
        return
    if c.n != pts.shape[0]:
        out.append(Violation("COUNT_MISMATCH", "n", f"{c.n} != {pts.shape[0]}"))
    rgb = pts[:, 3:6]
    if pts.shape[0] and (rgb.min() < 0.0 or rgb.max() > 1.0):
        out.append(Violation("RGB_RANGE", "points"))

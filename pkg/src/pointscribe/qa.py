"""Two-stage QA generation over aggregated scene transcripts.

Stage 1 turns a scene's transcripts into one open-ended QA pair per
applicable category (dense descriptions come from object-stage transcripts,
everything else from scene-stage ones). Stage 2 converts the eligible
open-ended pairs into four-option multiple choice, sourcing distractors by
category: in-scene objects for spatial questions, other scenes' objects for
presence, the scene taxonomy for classification, and other scenes' anomaly
answers for anomaly detection.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from . import taxonomy
from .clients import ClientError, LanguageModelClient
from .model import (
    MCQA_CATEGORIES,
    Caption,
    CaptionSource,
    QACategory,
    QAKind,
    QAPair,
)

SYSTEM_SUMMARIZE = (
    "You merge several spoken-word narrations of the same media into one "
    "faithful caption. Keep every concrete detail, drop repetitions, and "
    "respond with the caption text only."
)
SYSTEM_EXTRACT = (
    "You extract a structured answer for one question category from "
    "annotator narrations of a scene. Respond with the answer only; when a "
    "list is requested, respond with a JSON array of strings."
)

NO_ANOMALY_OPTION = "No unreasonable aspects"

PRESENCE_MCQA_QUESTION = "Which of the following objects is present in the scene?"

_DENSE_QUESTION = (
    "Describe each object in the scene in detail, including its shape, "
    "color, and condition."
)


class QAError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


class AnswerShape(str, Enum):
    LABEL = "LABEL"
    OBJECT_LIST = "OBJECT_LIST"
    FREE_TEXT = "FREE_TEXT"


@dataclass(frozen=True)
class ExtractionSchema:
    category: QACategory
    prompt_template: str
    expected_answer_shape: AnswerShape


def _scene_prompt(index: int) -> str:
    return taxonomy.SCENE_PROMPTS_3D[index]


# One schema per category; question wording reuses the scene question set the
# annotators answered, so generated QA matches what was actually narrated.
DEFAULT_SCHEMAS: dict[QACategory, ExtractionSchema] = {
    QACategory.SCENE_CLASSIFICATION: ExtractionSchema(
        QACategory.SCENE_CLASSIFICATION, _scene_prompt(0), AnswerShape.LABEL
    ),
    QACategory.OBJECT_PRESENCE: ExtractionSchema(
        QACategory.OBJECT_PRESENCE, _scene_prompt(1), AnswerShape.OBJECT_LIST
    ),
    QACategory.ANOMALY_DETECTION: ExtractionSchema(
        QACategory.ANOMALY_DETECTION, _scene_prompt(3), AnswerShape.FREE_TEXT
    ),
    QACategory.LOCALIZATION: ExtractionSchema(
        QACategory.LOCALIZATION, _scene_prompt(4), AnswerShape.OBJECT_LIST
    ),
    QACategory.DISTANCE_REASONING: ExtractionSchema(
        QACategory.DISTANCE_REASONING, _scene_prompt(5), AnswerShape.FREE_TEXT
    ),
    QACategory.SIZE_COMPARISON: ExtractionSchema(
        QACategory.SIZE_COMPARISON, _scene_prompt(7), AnswerShape.FREE_TEXT
    ),
    QACategory.DENSE_DESCRIPTION: ExtractionSchema(
        QACategory.DENSE_DESCRIPTION, _DENSE_QUESTION, AnswerShape.FREE_TEXT
    ),
}

# Extraction order is fixed so generated files are stable.
CATEGORY_ORDER: tuple[QACategory, ...] = (
    QACategory.SCENE_CLASSIFICATION,
    QACategory.OBJECT_PRESENCE,
    QACategory.LOCALIZATION,
    QACategory.SIZE_COMPARISON,
    QACategory.DISTANCE_REASONING,
    QACategory.ANOMALY_DETECTION,
    QACategory.DENSE_DESCRIPTION,
)


@dataclass(frozen=True)
class SceneTranscriptBundle:
    """Everything one scene's sessions said, per language."""

    scene_id: str
    language: str
    scene_transcripts: tuple[str, ...] = ()
    object_transcripts: Mapping[str, tuple[str, ...]] = field(default_factory=dict)

    def all_object_transcripts(self) -> list[str]:
        out: list[str] = []
        for texts in self.object_transcripts.values():
            out.extend(texts)
        return out


def _complete(client: LanguageModelClient, system: str, user: str) -> str:
    try:
        return client.complete(system, user)
    except ClientError as exc:
        raise QAError("LLM_CLIENT_ERROR", exc.detail) from exc


def summarize_captions(
    asset_id: str,
    language: str,
    transcripts: Sequence[str],
    *,
    client: LanguageModelClient,
    recording_ids: Sequence[str] = (),
) -> Caption:
    """Merge one asset's transcripts (recording order) into a single caption."""
    if not transcripts:
        raise QAError("EMPTY_INPUT", f"no transcripts for asset {asset_id}")
    user = json.dumps(
        {
            "op": "summarize",
            "asset_id": asset_id,
            "language": language,
            "transcripts": list(transcripts),
        },
        ensure_ascii=False,
        sort_keys=True,
    )
    text = _complete(client, SYSTEM_SUMMARIZE, user)
    return Caption(
        asset_id=asset_id,
        language=language,
        text=text,
        source=CaptionSource.SUMMARIZED,
        contributing_recording_ids=tuple(recording_ids),
    )


def split_object_list(answer: str) -> list[str]:
    """Recover the identified-object list from a rendered answer string."""
    return [part.strip() for part in answer.split(",") if part.strip()]


def _render_answer(raw: str, shape: AnswerShape) -> str:
    if shape is AnswerShape.OBJECT_LIST:
        try:
            decoded = json.loads(raw)
        except json.JSONDecodeError:
            return raw.strip()
        if isinstance(decoded, list):
            return ", ".join(str(item) for item in decoded)
    return raw.strip()


def extract_oeqa(
    bundle: SceneTranscriptBundle,
    *,
    client: LanguageModelClient,
    schemas: Mapping[QACategory, ExtractionSchema] | None = None,
) -> list[QAPair]:
    """Stage 1: one open-ended QA pair per category the bundle can source.

    Dense descriptions come from object transcripts and everything else from
    scene transcripts; a category whose source transcripts are absent is
    omitted. Raises MISSING_SOURCE only when no category is producible.
    """
    schemas = dict(schemas or DEFAULT_SCHEMAS)
    object_texts = bundle.all_object_transcripts()
    pairs: list[QAPair] = []
    for category in CATEGORY_ORDER:
        schema = schemas.get(category)
        if schema is None:
            continue
        source = object_texts if category is QACategory.DENSE_DESCRIPTION else list(bundle.scene_transcripts)
        if not source:
            continue
        user = json.dumps(
            {
                "op": "extract",
                "category": category.value,
                "scene_id": bundle.scene_id,
                "language": bundle.language,
                "shape": schema.expected_answer_shape.value,
                "question": schema.prompt_template,
                "transcripts": source,
            },
            ensure_ascii=False,
            sort_keys=True,
        )
        raw = _complete(client, SYSTEM_EXTRACT, user)
        pairs.append(
            QAPair(
                scene_id=bundle.scene_id,
                language=bundle.language,
                category=category,
                question=schema.prompt_template,
                kind=QAKind.OEQA,
                answer=_render_answer(raw, schema.expected_answer_shape),
            )
        )
    if not pairs:
        raise QAError("MISSING_SOURCE", f"bundle for {bundle.scene_id} has no transcripts")
    return pairs


def _dedupe(items: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    out: list[str] = []
    for item in items:
        if item and item not in seen:
            seen.add(item)
            out.append(item)
    return out


class _InsufficientDistractors(Exception):
    def __init__(self, category: QACategory, have: int, need: int):
        super().__init__(f"{category.value}: {have} candidates, need {need}")
        self.category = category
        self.have = have
        self.need = need


def _distractor_parts(
    pair: QAPair,
    own_objects: list[str],
    scene_object_lists: Mapping[str, Sequence[str]],
    taxonomy_labels: Sequence[str],
    anomaly_answers: Mapping[str, str],
    rng: random.Random,
) -> tuple[str, str, list[str]]:
    """(question, answer, distractor pool) for one eligible OEQA pair."""
    category = pair.category
    if category in (QACategory.LOCALIZATION, QACategory.SIZE_COMPARISON, QACategory.DISTANCE_REASONING):
        pool = [obj for obj in own_objects if obj != pair.answer]
        return pair.question, pair.answer, pool
    if category is QACategory.OBJECT_PRESENCE:
        if not own_objects:
            raise _InsufficientDistractors(category, 0, 1)
        answer = rng.choice(own_objects)
        own = set(own_objects)
        pool = []
        for other_id, objs in scene_object_lists.items():
            if other_id == pair.scene_id:
                continue
            pool.extend(obj for obj in objs if obj not in own)
        return PRESENCE_MCQA_QUESTION, answer, pool
    if category is QACategory.SCENE_CLASSIFICATION:
        pool = [label for label in taxonomy_labels if label != pair.answer]
        return pair.question, pair.answer, pool
    if category is QACategory.ANOMALY_DETECTION:
        pool = [
            answer
            for scene_id, answer in anomaly_answers.items()
            if scene_id != pair.scene_id and answer != pair.answer
        ]
        if pair.answer != NO_ANOMALY_OPTION:
            pool.append(NO_ANOMALY_OPTION)
        return pair.question, pair.answer, pool
    raise QAError("NOT_CONVERTIBLE", category.value)


def generate_mcqa(
    oeqa_for_scene: Sequence[QAPair],
    scene_object_lists: Mapping[str, Sequence[str]],
    rng: random.Random,
    *,
    taxonomy_labels: Sequence[str] = taxonomy.SUBCATEGORIES,
    anomaly_answers: Mapping[str, str] | None = None,
    option_count: int = 4,
    skip_insufficient: bool = False,
) -> list[QAPair]:
    """Stage 2: convert each eligible open-ended pair to multiple choice.

    The correct option's slot is drawn uniformly from the rng, and distractors
    are sampled without replacement from the category's pool, so options are
    always pairwise distinct and contain the answer exactly once. A category
    whose pool holds fewer than option_count−1 candidates raises
    INSUFFICIENT_DISTRACTORS (or is skipped when `skip_insufficient`).
    """
    anomaly_answers = dict(anomaly_answers or {})
    if not any(p.category is QACategory.OBJECT_PRESENCE for p in oeqa_for_scene):
        raise QAError("MISSING_SOURCE", "OBJECT_PRESENCE OEQA is required for distractor sourcing")
    presence = next(p for p in oeqa_for_scene if p.category is QACategory.OBJECT_PRESENCE)
    own_objects = _dedupe(
        list(scene_object_lists.get(presence.scene_id, ())) or split_object_list(presence.answer)
    )

    out: list[QAPair] = []
    for pair in oeqa_for_scene:
        if pair.category not in MCQA_CATEGORIES:
            continue
        try:
            question, answer, pool = _distractor_parts(
                pair, own_objects, scene_object_lists, taxonomy_labels, anomaly_answers, rng
            )
        except _InsufficientDistractors as exc:
            if skip_insufficient:
                continue
            raise QAError("INSUFFICIENT_DISTRACTORS", str(exc)) from exc
        pool = _dedupe(pool)
        if len(pool) < option_count - 1:
            if skip_insufficient:
                continue
            raise QAError(
                "INSUFFICIENT_DISTRACTORS",
                f"{pair.category.value}: {len(pool)} candidates, need {option_count - 1}",
            )
        distractors = rng.sample(pool, option_count - 1)
        correct_index = rng.randrange(option_count)
        options = list(distractors)
        options.insert(correct_index, answer)
        out.append(
            QAPair(
                scene_id=pair.scene_id,
                language=pair.language,
                category=pair.category,
                question=question,
                kind=QAKind.MCQA,
                answer=answer,
                options=tuple(options),
                correct_index=correct_index,
            )
        )
    return out

"""Dataset packaging: the three export shapes, the scene split, and stats.

Shapes:

- ``mldc_mc_a`` — captions only: one record per (image, language) holding the
  summarized caption and its contributing raw transcripts.
- ``mldc_mc_b`` — captions + points: one record per accepted session with the
  serialized point markup appended to the caption.
- ``mldc_3d`` — instruction data: per-scene point clouds plus conversation
  samples (one detailed description per scene/language, one single round per
  QA pair), split into train/test with no scene overlap.

All files are UTF-8 with LF line endings, records are line-delimited JSON
with sorted keys, and every ordering below is explicit — rerunning an export
over unchanged inputs (with the client journal in place) reproduces the same
bytes.
"""
from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

from .clients import LanguageModelClient
from .geometry import SamplerConfig, parse_glb, sample_scene, write_npy
from .model import (
    SCENE_TARGET,
    AnnotationSession,
    Asset,
    AssetKind,
    Caption,
    PointCloud,
    PromptProfile,
    QACategory,
    QAKind,
    QAPair,
    Stage,
    Task,
    format_coord,
)
from .pointing import build_training_response
from .qa import SceneTranscriptBundle, extract_oeqa, generate_mcqa, split_object_list, summarize_captions


class ExportError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


class ExportShape(str, Enum):
    MC_A = "mldc_mc_a"
    MC_B = "mldc_mc_b"
    SCENES_3D = "mldc_3d"


class JobStatus(str, Enum):
    QUEUED = "QUEUED"
    RUNNING = "RUNNING"
    DONE = "DONE"
    FAILED = "FAILED"


@dataclass
class ExportJob:
    job_id: str
    task_id: str
    status: JobStatus = JobStatus.QUEUED
    outputs: list[str] = field(default_factory=list)
    stats: "ExportStats | None" = None
    error: str = ""


class ConversationType(str, Enum):
    DETAILED_DESCRIPTION = "detailed_description"
    SINGLE_ROUND = "single_round"


POINT_CLOUD_TOKEN = "<point>"


@dataclass(frozen=True)
class ConversationSample:
    sample_id: str
    object_id: str  # the scene's name/id
    conversation_type: ConversationType
    conversations: tuple[dict[str, str], ...]

    def __post_init__(self) -> None:
        if not self.conversations:
            raise ValueError("a conversation sample needs at least one turn")
        if not self.conversations[0]["value"].startswith(POINT_CLOUD_TOKEN):
            raise ValueError("first human turn must start with the point-cloud token")
        for i, turn in enumerate(self.conversations):
            expected = "human" if i % 2 == 0 else "gpt"
            if turn["from"] != expected:
                raise ValueError(f"turn {i} must come from {expected}")

    def to_dict(self) -> dict:
        return {
            "id": self.sample_id,
            "object_id": self.object_id,
            "conversation_type": self.conversation_type.value,
            "conversations": [dict(t) for t in self.conversations],
        }


@dataclass(frozen=True)
class LanguageStats:
    annotation_count: int
    median_word_count: int
    median_char_count: int


@dataclass(frozen=True)
class ExportStats:
    per_language: Mapping[str, LanguageStats]

    def to_dict(self) -> dict:
        return {
            lang: {
                "annotation_count": s.annotation_count,
                "median_word_count": s.median_word_count,
                "median_char_count": s.median_char_count,
            }
            for lang, s in sorted(self.per_language.items())
        }


def scene_balanced_split(
    scenes: Sequence[tuple[str, str]],
    per_subcategory_test: int = 2,
    seed: int = 0,
) -> tuple[list[str], list[str]]:
    """Reserve `per_subcategory_test` scenes of every subcategory for test.

    `scenes` is (scene_id, subcategory) pairs. The test pick is a seeded
    sample per subcategory (subcategories visited in sorted order), the train
    set is the complement in input order; together they are disjoint and
    exhaustive.
    """
    by_subcategory: dict[str, list[str]] = {}
    for scene_id, subcategory in scenes:
        by_subcategory.setdefault(subcategory, []).append(scene_id)

    rng = random.Random(seed)
    test_ids: list[str] = []
    for subcategory in sorted(by_subcategory):
        members = by_subcategory[subcategory]
        if len(members) < per_subcategory_test:
            raise ExportError(
                "SUBCATEGORY_TOO_SMALL",
                f"{subcategory!r} has {len(members)} scene(s), needs {per_subcategory_test}",
            )
        test_ids.extend(rng.sample(members, per_subcategory_test))

    test_set = set(test_ids)
    train_ids = [scene_id for scene_id, _ in scenes if scene_id not in test_set]
    return train_ids, test_ids


def _median_lower(values: list[int]) -> int:
    ordered = sorted(values)
    return ordered[(len(ordered) - 1) // 2]


def compute_stats(captions: Sequence[Caption]) -> ExportStats:
    """Per-language count and lower-median word/char lengths.

    Words are maximal whitespace-delimited tokens, so languages written
    without spaces count a whole caption as one word; chars count Unicode
    scalar values.
    """
    by_language: dict[str, list[Caption]] = {}
    for caption in captions:
        by_language.setdefault(caption.language, []).append(caption)
    per_language = {
        lang: LanguageStats(
            annotation_count=len(group),
            median_word_count=_median_lower([len(c.text.split()) for c in group]),
            median_char_count=_median_lower([len(c.text) for c in group]),
        )
        for lang, group in by_language.items()
    }
    return ExportStats(per_language=per_language)


def _accepted(sessions: Iterable[AnnotationSession], task_id: str) -> list[AnnotationSession]:
    subs = [s for s in sessions if s.task_id == task_id and s.stage is Stage.SUBMITTED]
    return sorted(subs, key=lambda s: s.session_id)


def _scene_texts(session: AnnotationSession) -> list[tuple[str, str]]:
    """(recording_id, best transcript) for the session's scene recordings."""
    out = []
    for rec in session.recordings_for(SCENE_TARGET):
        text = rec.text()
        if text:
            out.append((rec.recording_id, text))
    return out


def _write_text(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_records(path: str, records: Sequence[dict]) -> None:
    lines = [json.dumps(r, ensure_ascii=False, sort_keys=True) for r in records]
    _write_text(path, "".join(line + "\n" for line in lines))


def _stats_text(stats: ExportStats) -> str:
    lines = ["language\tannotation_count\tmedian_word_count\tmedian_char_count"]
    for lang, s in sorted(stats.per_language.items()):
        lines.append(f"{lang}\t{s.annotation_count}\t{s.median_word_count}\t{s.median_char_count}")
    return "".join(line + "\n" for line in lines)


def shape_dir(out_root: str, task: Task, shape: ExportShape) -> str:
    return os.path.join(out_root, "export", task.task_id, shape.value)


def export_mldc_mc_a(
    task: Task,
    *,
    assets: Mapping[str, Asset],
    sessions: Sequence[AnnotationSession],
    client: LanguageModelClient,
    out_root: str,
) -> list[str]:
    """Captions-only shape: one summarized record per (image, language)."""
    if task.kind is not AssetKind.IMAGE_2D:
        raise ExportError("WRONG_TASK_KIND", "captions-only export needs a 2D task")
    accepted = _accepted(sessions, task.task_id)
    if not accepted:
        raise ExportError("NO_ACCEPTED_SESSIONS", task.task_id)

    groups: dict[tuple[str, str], list[AnnotationSession]] = {}
    for session in accepted:
        groups.setdefault((session.asset_id, session.language), []).append(session)

    records = []
    captions = []
    for asset_id in task.asset_ids:
        for (group_asset, language), group in sorted(groups.items()):
            if group_asset != asset_id:
                continue
            pairs = [pair for session in group for pair in _scene_texts(session)]
            if not pairs:
                continue
            recording_ids = [rid for rid, _ in pairs]
            transcripts = [text for _, text in pairs]
            caption = summarize_captions(
                asset_id, language, transcripts, client=client, recording_ids=recording_ids
            )
            captions.append(caption)
            records.append(
                {
                    "id": f"{asset_id}:{language}",
                    "image": assets[asset_id].media_ref,
                    "language": language,
                    "caption": caption.text,
                    "transcripts": transcripts,
                }
            )

    return _write_shape(task, ExportShape.MC_A, out_root, records, captions)


def export_mldc_mc_b(
    task: Task,
    *,
    assets: Mapping[str, Asset],
    sessions: Sequence[AnnotationSession],
    client: LanguageModelClient,
    out_root: str,
) -> list[str]:
    """Captions+points shape: one record per accepted session."""
    if task.kind is not AssetKind.IMAGE_2D:
        raise ExportError("WRONG_TASK_KIND", "captions+points export needs a 2D task")
    if task.prompt_profile is not PromptProfile.PART_B:
        raise ExportError("WRONG_TASK_KIND", "captions+points export needs the Part B question profile")
    accepted = _accepted(sessions, task.task_id)
    if not accepted:
        raise ExportError("NO_ACCEPTED_SESSIONS", task.task_id)

    records = []
    captions = []
    for session in accepted:
        pairs = _scene_texts(session)
        if not pairs:
            continue
        caption = summarize_captions(
            session.asset_id,
            session.language,
            [text for _, text in pairs],
            client=client,
            recording_ids=[rid for rid, _ in pairs],
        )
        captions.append(caption)
        records.append(
            {
                "id": session.session_id,
                "image": assets[session.asset_id].media_ref,
                "language": session.language,
                "native_speaker": session.native_speaker,
                "training_response": build_training_response(caption.text, session.points),
                "points": [
                    {"n": p.name, "x": format_coord(p.x), "y": format_coord(p.y)}
                    for p in session.points
                ],
            }
        )

    return _write_shape(task, ExportShape.MC_B, out_root, records, captions)


_LETTERS = "ABCD"


def render_mcqa_turns(pair: QAPair) -> tuple[str, str]:
    """(human, gpt) turn text for a multiple-choice pair."""
    assert pair.options is not None and pair.correct_index is not None
    lines = [pair.question]
    for letter, option in zip(_LETTERS, pair.options):
        lines.append(f"{letter}. {option}")
    return "\n".join(lines), f"Answer: {_LETTERS[pair.correct_index]}"


def conversation_samples(
    scene_id: str,
    captions: Sequence[Caption],
    qa_pairs: Sequence[QAPair],
) -> list[ConversationSample]:
    """All conversation samples of one scene, in a stable order."""
    samples: list[ConversationSample] = []
    for caption in sorted(captions, key=lambda c: c.language):
        samples.append(
            ConversationSample(
                sample_id=f"{scene_id}::detailed_description::{caption.language}",
                object_id=scene_id,
                conversation_type=ConversationType.DETAILED_DESCRIPTION,
                conversations=(
                    {
                        "from": "human",
                        "value": f"{POINT_CLOUD_TOKEN}\nDescribe this scene in detail.",
                    },
                    {"from": "gpt", "value": caption.text},
                ),
            )
        )
    for i, pair in enumerate(qa_pairs):
        if pair.kind is QAKind.MCQA:
            human, gpt = render_mcqa_turns(pair)
        else:
            human, gpt = pair.question, pair.answer
        samples.append(
            ConversationSample(
                sample_id=f"{scene_id}::single_round::{i:04d}::{pair.kind.value}::{pair.category.value}::{pair.language}",
                object_id=scene_id,
                conversation_type=ConversationType.SINGLE_ROUND,
                conversations=(
                    {"from": "human", "value": f"{POINT_CLOUD_TOKEN}\n{human}"},
                    {"from": "gpt", "value": gpt},
                ),
            )
        )
    return samples


def export_mldc_3d(
    task: Task,
    split: tuple[list[str], list[str]],
    qa_pairs: Mapping[str, Sequence[QAPair]],
    point_clouds: Mapping[str, PointCloud],
    *,
    captions: Mapping[str, Sequence[Caption]],
    out_root: str,
) -> list[str]:
    """Instruction-data shape: clouds + conversation samples + split manifests.

    `split` is (train scene ids, test scene ids); `qa_pairs`, `point_clouds`
    and `captions` are keyed by scene id. Every exported scene must have a
    cloud.
    """
    if task.kind is not AssetKind.SCENE_3D:
        raise ExportError("WRONG_TASK_KIND", "instruction-data export needs a 3D task")
    train_ids, test_ids = split
    exported = [*train_ids, *test_ids]
    missing = [scene_id for scene_id in exported if scene_id not in point_clouds]
    if missing:
        raise ExportError("MISSING_POINT_CLOUD", ", ".join(missing))

    root = shape_dir(out_root, task, ExportShape.SCENES_3D)
    outputs: list[str] = []
    records: list[dict] = []
    train_samples: list[str] = []
    test_samples: list[str] = []
    caption_pool: list[Caption] = []
    test_set = set(test_ids)

    for scene_id in exported:
        scene_captions = list(captions.get(scene_id, ()))
        caption_pool.extend(scene_captions)
        samples = conversation_samples(scene_id, scene_captions, qa_pairs.get(scene_id, ()))
        for sample in samples:
            records.append(sample.to_dict())
            (test_samples if scene_id in test_set else train_samples).append(sample.sample_id)
        cloud_path = os.path.join(root, "clouds", f"{scene_id}.npy")
        os.makedirs(os.path.dirname(cloud_path), exist_ok=True)
        write_npy(point_clouds[scene_id], cloud_path)
        outputs.append(cloud_path)

    records_path = os.path.join(root, "records.jsonl")
    _write_records(records_path, records)
    manifest_path = os.path.join(root, "manifest.txt")
    _write_text(manifest_path, "".join(s + "\n" for s in (*train_samples, *test_samples)))
    train_path = os.path.join(root, "manifest_train.txt")
    _write_text(train_path, "".join(s + "\n" for s in train_samples))
    test_path = os.path.join(root, "manifest_test.txt")
    _write_text(test_path, "".join(s + "\n" for s in test_samples))
    stats_path = os.path.join(root, "stats.txt")
    _write_text(stats_path, _stats_text(compute_stats(caption_pool)))
    outputs.extend([records_path, manifest_path, train_path, test_path, stats_path])
    return outputs


def _write_shape(
    task: Task,
    shape: ExportShape,
    out_root: str,
    records: list[dict],
    captions: list[Caption],
) -> list[str]:
    if not records:
        raise ExportError("NO_ACCEPTED_SESSIONS", f"no exportable records for task {task.task_id}")
    root = shape_dir(out_root, task, shape)
    records_path = os.path.join(root, "records.jsonl")
    _write_records(records_path, records)
    manifest_path = os.path.join(root, "manifest.txt")
    _write_text(manifest_path, "".join(str(r["id"]) + "\n" for r in records))
    stats_path = os.path.join(root, "stats.txt")
    _write_text(stats_path, _stats_text(compute_stats(captions)))
    return [records_path, manifest_path, stats_path]


def build_bundles(
    task: Task,
    assets: Mapping[str, Asset],
    sessions: Sequence[AnnotationSession],
) -> dict[tuple[str, str], SceneTranscriptBundle]:
    """Aggregate accepted sessions into per-(scene, language) bundles."""
    bundles: dict[tuple[str, str], SceneTranscriptBundle] = {}
    grouped: dict[tuple[str, str], list[AnnotationSession]] = {}
    for session in _accepted(sessions, task.task_id):
        grouped.setdefault((session.asset_id, session.language), []).append(session)
    for (asset_id, language), group in sorted(grouped.items()):
        scene_texts: list[str] = []
        object_texts: dict[str, list[str]] = {}
        for session in group:
            for rec in session.recordings:
                text = rec.text()
                if not text:
                    continue
                if rec.target == SCENE_TARGET:
                    scene_texts.append(text)
                else:
                    object_texts.setdefault(rec.target, []).append(text)
        bundles[(asset_id, language)] = SceneTranscriptBundle(
            scene_id=asset_id,
            language=language,
            scene_transcripts=tuple(scene_texts),
            object_transcripts={k: tuple(v) for k, v in sorted(object_texts.items())},
        )
    return bundles


def run_3d_export(
    task: Task,
    *,
    assets: Mapping[str, Asset],
    sessions: Sequence[AnnotationSession],
    glb_loader: Callable[[Asset], bytes],
    client: LanguageModelClient,
    out_root: str,
    seed: int = 0,
    per_subcategory_test: int = 2,
    sampler_points: int | None = None,
) -> tuple[list[str], ExportStats]:
    """Full 3D pipeline: split, sample clouds, summarize, QA, package.

    MCQA categories whose distractor pools are too small on this task's data
    are skipped rather than failing the whole export.
    """
    task_assets = [assets[aid] for aid in task.asset_ids if aid in assets]
    scenes = [
        (asset.asset_id, asset.scene_meta.subcategory)
        for asset in task_assets
        if asset.scene_meta is not None
    ]
    if not scenes:
        raise ExportError("NO_ACCEPTED_SESSIONS", "task has no 3D scenes")
    split = scene_balanced_split(scenes, per_subcategory_test, seed)

    accepted = _accepted(sessions, task.task_id)
    if not accepted:
        raise ExportError("NO_ACCEPTED_SESSIONS", task.task_id)
    annotated = {s.asset_id for s in accepted}
    train_ids = [sid for sid in split[0] if sid in annotated]
    test_ids = [sid for sid in split[1] if sid in annotated]

    clouds: dict[str, PointCloud] = {}
    n_points = sampler_points or SamplerConfig().n_points
    for scene_id in (*train_ids, *test_ids):
        meshes = parse_glb(glb_loader(assets[scene_id]))
        config = SamplerConfig(n_points=n_points, seed=seed)
        clouds[scene_id] = sample_scene(meshes, config, scene_id=scene_id)

    bundles = build_bundles(task, assets, sessions)
    captions: dict[str, list[Caption]] = {}
    oeqa: dict[str, list[QAPair]] = {}
    scene_object_lists: dict[str, list[str]] = {}
    anomaly_answers: dict[str, str] = {}

    for (scene_id, language), bundle in sorted(bundles.items()):
        if scene_id not in clouds:
            continue
        if bundle.scene_transcripts:
            recording_ids = _bundle_recording_ids(task, sessions, scene_id, language)
            caption = summarize_captions(
                scene_id,
                language,
                list(bundle.scene_transcripts),
                client=client,
                recording_ids=recording_ids,
            )
            captions.setdefault(scene_id, []).append(caption)
        pairs = extract_oeqa(bundle, client=client)
        oeqa.setdefault(scene_id, []).extend(pairs)
        for pair in pairs:
            if pair.category is QACategory.OBJECT_PRESENCE and scene_id not in scene_object_lists:
                scene_object_lists[scene_id] = split_object_list(pair.answer)
            if pair.category is QACategory.ANOMALY_DETECTION and scene_id not in anomaly_answers:
                anomaly_answers[scene_id] = pair.answer

    qa_pairs: dict[str, list[QAPair]] = {}
    rng = random.Random(seed)
    for scene_id in (*train_ids, *test_ids):
        pairs = oeqa.get(scene_id, [])
        qa_pairs[scene_id] = list(pairs)
        if any(p.category is QACategory.OBJECT_PRESENCE for p in pairs):
            qa_pairs[scene_id].extend(
                generate_mcqa(
                    pairs,
                    scene_object_lists,
                    rng,
                    anomaly_answers=anomaly_answers,
                    skip_insufficient=True,
                )
            )

    outputs = export_mldc_3d(
        task,
        (train_ids, test_ids),
        qa_pairs,
        clouds,
        captions=captions,
        out_root=out_root,
    )
    all_captions = [c for group in captions.values() for c in group]
    return outputs, compute_stats(all_captions)


def _bundle_recording_ids(
    task: Task,
    sessions: Sequence[AnnotationSession],
    scene_id: str,
    language: str,
) -> list[str]:
    ids: list[str] = []
    for session in _accepted(sessions, task.task_id):
        if session.asset_id != scene_id or session.language != language:
            continue
        ids.extend(rid for rid, _ in _scene_texts(session))
    return ids


def run_export(
    task: Task,
    shape: ExportShape,
    *,
    assets: Mapping[str, Asset],
    sessions: Sequence[AnnotationSession],
    glb_loader: Callable[[Asset], bytes],
    client: LanguageModelClient,
    out_root: str,
    seed: int = 0,
    per_subcategory_test: int = 2,
    sampler_points: int | None = None,
) -> tuple[list[str], ExportStats | None]:
    """Dispatch one export job to its shape's pipeline."""
    if shape is ExportShape.MC_A:
        outputs = export_mldc_mc_a(
            task, assets=assets, sessions=sessions, client=client, out_root=out_root
        )
        return outputs, None
    if shape is ExportShape.MC_B:
        outputs = export_mldc_mc_b(
            task, assets=assets, sessions=sessions, client=client, out_root=out_root
        )
        return outputs, None
    return run_3d_export(
        task,
        assets=assets,
        sessions=sessions,
        glb_loader=glb_loader,
        client=client,
        out_root=out_root,
        seed=seed,
        per_subcategory_test=per_subcategory_test,
        sampler_points=sampler_points,
    )

"""Audio-driven dense-annotation backend.

Annotators point at things and narrate what they see; this package turns
those sessions — named points on images, per-object and whole-scene
recordings of 3D scenes — into quality-checked, packaged caption/QA datasets
with sampled point clouds.
"""

__version__ = "0.1.0"

from .model import (
    AnnotationSession,
    Asset,
    AssetKind,
    Caption,
    CaptionSource,
    PointAnnotation,
    PointCloud,
    PromptProfile,
    QACategory,
    QAKind,
    QAPair,
    Recording,
    SceneMeta,
    SceneObject,
    Stage,
    Task,
    Violation,
    new_task,
    validate,
)
from .pointing import build_training_response, parse_points, serialize_points
from .workflow import (
    DEFAULT_POLICY,
    QCPolicy,
    SubmissionReport,
    WorkflowError,
    add_point,
    attach_recording,
    edit_transcript,
    start_session,
    submit,
    transcript_discrepancy,
    unlock_scene_stage,
)

__all__ = [
    "AnnotationSession",
    "Asset",
    "AssetKind",
    "Caption",
    "CaptionSource",
    "DEFAULT_POLICY",
    "PointAnnotation",
    "PointCloud",
    "PromptProfile",
    "QACategory",
    "QAKind",
    "QAPair",
    "QCPolicy",
    "Recording",
    "SceneMeta",
    "SceneObject",
    "Stage",
    "SubmissionReport",
    "Task",
    "Violation",
    "WorkflowError",
    "add_point",
    "attach_recording",
    "build_training_response",
    "edit_transcript",
    "new_task",
    "parse_points",
    "serialize_points",
    "start_session",
    "submit",
    "transcript_discrepancy",
    "unlock_scene_stage",
    "validate",
]

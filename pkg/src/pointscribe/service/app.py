"""HTTP facade over the annotation workflow, geometry, and export pipeline.

Every handler authenticates a bearer token, scopes all reads/writes to the
principal's organization (cross-org lookups 404 so ids never leak), and maps
domain errors to 4xx bodies of {code, detail}. Session mutations carry the
version the client saw; a stale one is a retryable 409.
"""
from __future__ import annotations

import json
from contextlib import asynccontextmanager

from fastapi import Depends, FastAPI, Form, Header, Request, Response, UploadFile
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .. import workflow
from ..audio import UnsupportedAudio, decode_duration
from ..export import ExportShape
from ..model import (
    AnnotationSession,
    Asset,
    AssetKind,
    PointAnnotation,
    PromptProfile,
    SceneMeta,
    SceneObject,
    Task,
    new_id,
    new_task,
    validate,
)
from .config import Principal, Role, ServiceConfig
from .jobs import JOB_EXPORT, JOB_TRANSCRIBE, JobRunner, build_clients
from .store import MediaKind, Store


class ApiError(Exception):
    def __init__(self, status: int, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.status = status
        self.code = code
        self.detail = detail


_WORKFLOW_STATUS = {
    "NOT_FOUND": 404,
    "FORBIDDEN": 403,
    "SESSION_IMMUTABLE": 409,
    "TRANSCRIPT_ALREADY_SET": 409,
    "STAGE_LOCKED": 422,
    "DURATION_EXCEEDED": 422,
    "OBJECTS_INCOMPLETE": 422,
    "TRANSCRIPT_PENDING": 422,
    "WRONG_ASSET_KIND": 422,
    "BAD_DURATION": 422,
}


def _workflow_status(code: str) -> int:
    return _WORKFLOW_STATUS.get(code, 422)


class TaskBody(BaseModel):
    title: str
    kind: AssetKind
    instructions: str = ""
    questions: list[str] | None = None
    prompt_profile: PromptProfile | None = None
    asset_ids: list[str] = []


class SessionBody(BaseModel):
    task_id: str
    asset_id: str
    language: str
    native_speaker: bool = False


class PointBody(BaseModel):
    version: int
    name: str
    x: float
    y: float


class VersionBody(BaseModel):
    version: int


class TranscriptBody(BaseModel):
    version: int
    edited_text: str


class ExportBody(BaseModel):
    task_id: str
    shape: ExportShape
    seed: int = 0
    per_subcategory_test: int = 2
    sampler_points: int | None = None


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig.from_env()
    store = Store(config.data_dir)
    stt_client, llm_factory = build_clients(config)
    runner = JobRunner(store, config, stt_client, llm_factory)
    tokens: dict[str, Principal] = {p.token: p for p in config.principals}

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        runner.start()
        try:
            yield
        finally:
            runner.stop()

    app = FastAPI(title="pointscribe", lifespan=lifespan)
    app.state.store = store
    app.state.runner = runner
    app.state.config = config

    @app.exception_handler(ApiError)
    async def api_error_handler(_request: Request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content={"code": exc.code, "detail": exc.detail})

    def principal_of(authorization: str | None = Header(default=None)) -> Principal:
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "UNAUTHENTICATED", "bearer token required")
        principal = tokens.get(authorization.removeprefix("Bearer "))
        if principal is None:
            raise ApiError(401, "UNAUTHENTICATED", "unknown token")
        return principal

    def require_admin(principal: Principal) -> None:
        if principal.role is not Role.ADMIN:
            raise ApiError(403, "FORBIDDEN", "administrator role required")

    def load_task(task_id: str, principal: Principal) -> Task:
        task = store.get_task(task_id, principal.org_id)
        if task is None:
            raise ApiError(404, "NOT_FOUND", f"no task {task_id!r}")
        return task

    def load_asset(asset_id: str, principal: Principal) -> Asset:
        asset = store.get_asset(asset_id, principal.org_id)
        if asset is None:
            raise ApiError(404, "NOT_FOUND", f"no asset {asset_id!r}")
        return asset

    def load_session(session_id: str, principal: Principal, *, mutate: bool) -> AnnotationSession:
        session = store.get_session(session_id, principal.org_id)
        if session is None:
            raise ApiError(404, "NOT_FOUND", f"no session {session_id!r}")
        if session.annotator_id != principal.principal_id:
            if mutate or principal.role is not Role.ADMIN:
                raise ApiError(403, "FORBIDDEN", "not your session")
        return session

    def run_workflow(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except workflow.WorkflowError as exc:
            raise ApiError(_workflow_status(exc.code), exc.code, exc.detail) from exc

    def cas_persist(session: AnnotationSession, expected_version: int) -> None:
        if not store.cas_update_session(session, expected_version):
            raise ApiError(409, "CONFLICT", "session was modified concurrently; reload and retry")

    def check_version(session: AnnotationSession, client_version: int) -> None:
        if client_version != session.version:
            raise ApiError(409, "CONFLICT", f"version {client_version} is stale (now {session.version})")

    # -- tasks --------------------------------------------------------------

    @app.post("/api/tasks", status_code=201)
    def create_task(body: TaskBody, principal: Principal = Depends(principal_of)):
        require_admin(principal)
        for asset_id in body.asset_ids:
            load_asset(asset_id, principal)
        task = new_task(
            body.title,
            body.kind,
            principal.org_id,
            instructions=body.instructions,
            questions=tuple(body.questions) if body.questions is not None else None,
            asset_ids=tuple(body.asset_ids),
            prompt_profile=body.prompt_profile,
        )
        violations = validate(task)
        if violations:
            raise ApiError(422, violations[0].code, violations[0].detail)
        store.put_task(task)
        return task.to_dict()

    @app.get("/api/tasks/{task_id}")
    def get_task(task_id: str, principal: Principal = Depends(principal_of)):
        return load_task(task_id, principal).to_dict()

    # -- assets -------------------------------------------------------------

    @app.post("/api/assets", status_code=201)
    async def upload_asset(
        file: UploadFile,
        kind: AssetKind = Form(...),
        subcategory: str = Form(default=""),
        objects: str = Form(default="[]"),
        principal: Principal = Depends(principal_of),
    ):
        require_admin(principal)
        data = await file.read()
        media_kind = _sniff_media(data, kind)
        blob = store.put_blob(data, media_kind, principal.org_id)
        try:
            object_rows = json.loads(objects)
        except json.JSONDecodeError as exc:
            raise ApiError(422, "BAD_OBJECTS", f"objects must be JSON: {exc}") from exc
        scene_objects = tuple(
            SceneObject(
                object_id=row.get("object_id") or new_id(),
                name=row["name"],
                node_path=row.get("node_path", row["name"]),
            )
            for row in object_rows
        )
        scene_meta = None
        if kind is AssetKind.SCENE_3D:
            if not subcategory:
                raise ApiError(422, "MISSING_SCENE_META", "3D assets need a subcategory")
            try:
                scene_meta = SceneMeta.for_subcategory(subcategory)
            except KeyError:
                raise ApiError(422, "BAD_SUBCATEGORY", subcategory) from None
        asset = Asset(
            asset_id=new_id(),
            kind=kind,
            media_ref=blob.digest,
            scene_meta=scene_meta,
            objects=scene_objects,
            org_id=principal.org_id,
        )
        violations = validate(asset)
        if violations:
            raise ApiError(422, violations[0].code, violations[0].detail)
        store.put_asset(asset)
        return {"blob": blob.to_dict(), "asset": asset.to_dict()}

    @app.get("/api/assets/{asset_id}")
    def get_asset(asset_id: str, principal: Principal = Depends(principal_of)):
        return load_asset(asset_id, principal).to_dict()

    @app.get("/api/assets/{asset_id}/media")
    def get_asset_media(asset_id: str, principal: Principal = Depends(principal_of)):
        asset = load_asset(asset_id, principal)
        data = store.get_blob(asset.media_ref, principal.org_id)
        if data is None:
            raise ApiError(404, "NOT_FOUND", f"no media for asset {asset_id!r}")
        if asset.kind is AssetKind.SCENE_3D:
            media_type = "model/gltf-binary"
        elif data[:8] == _PNG:
            media_type = "image/png"
        else:
            media_type = "image/jpeg"
        return Response(content=data, media_type=media_type)

    # -- sessions -----------------------------------------------------------

    @app.post("/api/sessions", status_code=201)
    def create_session(body: SessionBody, principal: Principal = Depends(principal_of)):
        task = load_task(body.task_id, principal)
        asset = load_asset(body.asset_id, principal)
        session = run_workflow(
            workflow.start_session,
            task,
            asset,
            principal.principal_id,
            body.language,
            native_speaker=body.native_speaker,
        )
        store.insert_session(session)
        return session.to_dict()

    @app.get("/api/sessions/{session_id}")
    def get_session(session_id: str, principal: Principal = Depends(principal_of)):
        return load_session(session_id, principal, mutate=False).to_dict()

    @app.post("/api/sessions/{session_id}/points")
    def add_point(session_id: str, body: PointBody, principal: Principal = Depends(principal_of)):
        session = load_session(session_id, principal, mutate=True)
        check_version(session, body.version)
        asset = load_asset(session.asset_id, principal)
        point = PointAnnotation(name=body.name, x=body.x, y=body.y)
        run_workflow(workflow.add_point, session, point, asset=asset)
        cas_persist(session, body.version)
        return session.to_dict()

    @app.post("/api/sessions/{session_id}/recordings", status_code=201)
    async def attach_recording(
        session_id: str,
        file: UploadFile,
        target: str = Form(...),
        version: int = Form(...),
        principal: Principal = Depends(principal_of),
    ):
        session = load_session(session_id, principal, mutate=True)
        check_version(session, version)
        asset = load_asset(session.asset_id, principal)
        data = await file.read()
        try:
            duration_s = decode_duration(data)
        except UnsupportedAudio as exc:
            raise ApiError(415, "UNSUPPORTED_MEDIA", exc.detail) from exc
        blob = store.put_blob(data, MediaKind.AUDIO, principal.org_id)
        recording = run_workflow(
            workflow.attach_recording,
            session,
            target,
            blob.digest,
            duration_s,
            asset=asset,
        )
        cas_persist(session, version)
        job_id = new_id()
        store.create_job(
            job_id,
            principal.org_id,
            JOB_TRANSCRIBE,
            {
                "session_id": session.session_id,
                "recording_id": recording.recording_id,
                "language": session.language,
            },
        )
        return {"recording": recording.to_dict(), "session_version": session.version, "job_id": job_id}

    @app.post("/api/sessions/{session_id}/unlock-scene")
    def unlock_scene(session_id: str, body: VersionBody, principal: Principal = Depends(principal_of)):
        session = load_session(session_id, principal, mutate=True)
        check_version(session, body.version)
        asset = load_asset(session.asset_id, principal)
        run_workflow(workflow.unlock_scene_stage, session, asset=asset)
        cas_persist(session, body.version)
        return session.to_dict()

    @app.put("/api/sessions/{session_id}/recordings/{recording_id}/transcript")
    def edit_transcript(
        session_id: str,
        recording_id: str,
        body: TranscriptBody,
        principal: Principal = Depends(principal_of),
    ):
        session = load_session(session_id, principal, mutate=True)
        check_version(session, body.version)
        recording = run_workflow(workflow.edit_transcript, session, recording_id, body.edited_text)
        cas_persist(session, body.version)
        return {"recording": recording.to_dict(), "session_version": session.version}

    @app.post("/api/sessions/{session_id}/submit")
    def submit_session(session_id: str, body: VersionBody, principal: Principal = Depends(principal_of)):
        session = load_session(session_id, principal, mutate=True)
        check_version(session, body.version)
        asset = load_asset(session.asset_id, principal)
        report = run_workflow(workflow.submit, session, asset=asset)
        payload = {
            "accepted": report.accepted,
            "failures": [{"code": f.code, "detail": f.detail} for f in report.failures],
            "flags": [
                {"recording_id": f.recording_id, "discrepancy": f.discrepancy} for f in report.flags
            ],
            "stage": session.stage.value,
            "session_version": session.version,
        }
        if not report.accepted:
            return JSONResponse(
                status_code=422, content={"code": report.failures[0].code, **payload}
            )
        cas_persist(session, body.version)
        return payload

    # -- exports ------------------------------------------------------------

    @app.post("/api/exports", status_code=202)
    def create_export(body: ExportBody, principal: Principal = Depends(principal_of)):
        require_admin(principal)
        load_task(body.task_id, principal)
        job_id = new_id()
        store.create_job(
            job_id,
            principal.org_id,
            JOB_EXPORT,
            {
                "task_id": body.task_id,
                "shape": body.shape.value,
                "seed": body.seed,
                "per_subcategory_test": body.per_subcategory_test,
                "sampler_points": body.sampler_points,
            },
        )
        return {"job_id": job_id, "status": "QUEUED"}

    @app.get("/api/exports/{job_id}")
    def get_export(job_id: str, principal: Principal = Depends(principal_of)):
        job = store.get_job(job_id, principal.org_id)
        if job is None or job.kind != JOB_EXPORT:
            raise ApiError(404, "NOT_FOUND", f"no export job {job_id!r}")
        return {
            "job_id": job.job_id,
            "task_id": job.payload.get("task_id"),
            "status": job.status,
            "outputs": job.outputs,
            "stats": job.stats,
            "error": job.error,
        }

    return app


_PNG = b"\x89PNG\r\n\x1a\n"


def _sniff_media(data: bytes, kind: AssetKind) -> MediaKind:
    if kind is AssetKind.SCENE_3D:
        if data[:4] != b"glTF":
            raise ApiError(415, "UNSUPPORTED_MEDIA", "3D assets must be binary glTF")
        return MediaKind.GLB
    if data[:8] == _PNG or data[:3] == b"\xff\xd8\xff":
        return MediaKind.IMAGE
    raise ApiError(415, "UNSUPPORTED_MEDIA", "images must be PNG or JPEG")

"""In-process background worker over the persistent job queue.

Jobs (transcription, export) live in the store's `jobs` table, so a restart
re-leases anything that was mid-flight — export output is deterministic, so
re-running a crashed job converges on the same bytes. The worker is a daemon
thread polling for runnable rows; tests can also drive it synchronously with
`run_pending`.
"""
from __future__ import annotations

import os
import threading
import traceback

from .. import workflow
from ..clients import (
    ClientJournal,
    JournaledLanguageModel,
    LanguageModelClient,
    MockLanguageModelClient,
    MockSpeechToTextClient,
    SpeechToTextClient,
)
from ..export import ExportError, ExportShape, run_export, shape_dir
from ..model import Asset, QACategory
from .config import ServiceConfig
from .store import JobRow, Store

JOB_TRANSCRIBE = "transcribe"
JOB_EXPORT = "export"


def mock_extractions_for_assets(assets: dict[str, Asset]) -> dict[tuple[str, str], object]:
    """Plant deterministic per-scene extraction answers from asset ground truth.

    Object-derived categories answer with real object names, classification
    with the scene's subcategory — the shapes Stage 2 needs for distractor
    pools, without any live model.
    """
    table: dict[tuple[str, str], object] = {}
    for asset_id, asset in sorted(assets.items()):
        names = [obj.name for obj in asset.objects]
        if not names:
            continue
        table[(QACategory.OBJECT_PRESENCE.value, asset_id)] = names
        table[(QACategory.LOCALIZATION.value, asset_id)] = names[0]
        table[(QACategory.SIZE_COMPARISON.value, asset_id)] = names[-1]
        table[(QACategory.DISTANCE_REASONING.value, asset_id)] = names[len(names) // 2]
        if asset.scene_meta is not None:
            table[(QACategory.SCENE_CLASSIFICATION.value, asset_id)] = asset.scene_meta.subcategory
        table[(QACategory.ANOMALY_DETECTION.value, asset_id)] = (
            f"The {names[0]} is floating in mid-air"
        )
    return table


class JobRunner:
    def __init__(
        self,
        store: Store,
        config: ServiceConfig,
        stt_client: SpeechToTextClient,
        llm_factory,
    ):
        """`llm_factory(assets: dict) -> LanguageModelClient` builds the
        completion client for one export job (mock factories plant fixtures
        from the job's assets)."""
        self.store = store
        self.config = config
        self.stt_client = stt_client
        self.llm_factory = llm_factory
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    # -- lifecycle --------------------------------------------------------

    def start(self) -> None:
        if self._thread is not None:
            return
        self._thread = threading.Thread(target=self._loop, name="job-worker", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None

    def _loop(self) -> None:
        while not self._stop.is_set():
            if not self.run_pending(limit=1):
                self._stop.wait(self.config.job_poll_interval_s)

    def run_pending(self, limit: int | None = None) -> int:
        """Run runnable jobs now (worker loop and tests share this path)."""
        ran = 0
        while limit is None or ran < limit:
            job = self.store.lease_next_job(self.config.job_lease_s)
            if job is None:
                break
            self._run(job)
            ran += 1
        return ran

    # -- execution --------------------------------------------------------

    def _run(self, job: JobRow) -> None:
        try:
            if job.kind == JOB_TRANSCRIBE:
                self._run_transcribe(job)
            elif job.kind == JOB_EXPORT:
                self._run_export(job)
            else:
                self.store.finish_job(job.job_id, "FAILED", error=f"unknown job kind {job.kind!r}")
        except ExportError as exc:
            self.store.finish_job(job.job_id, "FAILED", error=f"{exc.code}: {exc.detail}")
        except Exception:
            self.store.finish_job(job.job_id, "FAILED", error=traceback.format_exc(limit=5))

    def _run_transcribe(self, job: JobRow) -> None:
        session_id = job.payload["session_id"]
        recording_id = job.payload["recording_id"]
        language = job.payload.get("language", "")
        session = self.store.get_session(session_id, job.org_id)
        if session is None:
            self.store.finish_job(job.job_id, "FAILED", error="session vanished")
            return
        recording = session.recording_by_id(recording_id)
        if recording is None:
            self.store.finish_job(job.job_id, "FAILED", error="recording vanished")
            return
        if recording.auto_transcript is not None:
            self.store.finish_job(job.job_id, "DONE")
            return
        audio = self.store.get_blob(recording.audio_ref, job.org_id)
        if audio is None:
            self.store.finish_job(job.job_id, "FAILED", error="audio blob vanished")
            return
        result = self.stt_client.transcribe(audio, language)

        # Compare-and-set with refresh: the annotator may be editing points
        # concurrently, and their writes must not be lost (nor ours).
        for _ in range(64):
            recording = session.recording_by_id(recording_id)
            if recording is None:
                break
            if recording.auto_transcript is not None:
                self.store.finish_job(job.job_id, "DONE")
                return
            expected = session.version
            workflow.set_auto_transcript(session, recording_id, result.text)
            if self.store.cas_update_session(session, expected):
                self.store.finish_job(job.job_id, "DONE")
                return
            session = self.store.get_session(session_id, job.org_id)
            if session is None:
                break
        self.store.finish_job(job.job_id, "FAILED", error="could not persist transcript")

    def _run_export(self, job: JobRow) -> None:
        payload = job.payload
        task = self.store.get_task(payload["task_id"], job.org_id)
        if task is None:
            self.store.finish_job(job.job_id, "FAILED", error="task vanished")
            return
        shape = ExportShape(payload["shape"])
        assets = self.store.assets_by_ids(list(task.asset_ids), job.org_id)
        sessions = self.store.sessions_for_task(task.task_id, job.org_id)

        def glb_loader(asset: Asset) -> bytes:
            data = self.store.get_blob(asset.media_ref, job.org_id)
            if data is None:
                raise ExportError("MISSING_POINT_CLOUD", f"no stored scene for {asset.asset_id}")
            return data

        out_root = self.store.data_dir
        journal_dir = shape_dir(out_root, task, shape)
        os.makedirs(journal_dir, exist_ok=True)
        journal = ClientJournal(os.path.join(journal_dir, "journal.jsonl"))
        client: LanguageModelClient = JournaledLanguageModel(self.llm_factory(assets), journal)

        outputs, stats = run_export(
            task,
            shape,
            assets=assets,
            sessions=sessions,
            glb_loader=glb_loader,
            client=client,
            out_root=out_root,
            seed=int(payload.get("seed", 0)),
            per_subcategory_test=int(payload.get("per_subcategory_test", 2)),
            sampler_points=payload.get("sampler_points"),
        )
        rel_outputs = [os.path.relpath(path, out_root) for path in outputs]
        self.store.finish_job(
            job.job_id,
            "DONE",
            outputs=rel_outputs,
            stats=stats.to_dict() if stats is not None else None,
        )


def build_clients(config: ServiceConfig):
    """(stt client, llm factory) for the configured mode."""
    if config.mock_clients or not (config.stt_endpoint and config.llm_endpoint):
        stt: SpeechToTextClient = MockSpeechToTextClient()

        def factory(assets: dict[str, Asset]) -> LanguageModelClient:
            return MockLanguageModelClient(mock_extractions_for_assets(assets))

        return stt, factory

    from ..clients import HttpLanguageModelClient, HttpSpeechToTextClient

    stt = HttpSpeechToTextClient(config.stt_endpoint, config.stt_credential)

    def factory(assets: dict[str, Asset]) -> LanguageModelClient:
        return HttpLanguageModelClient(config.llm_endpoint, config.llm_credential, config.llm_model)

    return stt, factory

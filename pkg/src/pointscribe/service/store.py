"""Embedded persistence: a single SQLite file plus a content-addressed blob
directory.

Every query that touches tenant data filters on `org_id` — there is no code
path that reads another organization's rows. Session writes are
compare-and-set on `version`; a stale writer gets `False` back and retries
with fresh state (the HTTP layer maps that to 409). Blob files are written
once, keyed by content digest, so re-uploading identical bytes is free.
"""
from __future__ import annotations

import json
import os
import sqlite3
import threading
import time
from dataclasses import dataclass
from enum import Enum

from ..clients import blob_digest
from ..model import AnnotationSession, Asset, Task

_SCHEMA = """
CREATE TABLE IF NOT EXISTS tasks (
    task_id TEXT PRIMARY KEY,
    org_id TEXT NOT NULL,
    data TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS assets (
    asset_id TEXT PRIMARY KEY,
    org_id TEXT NOT NULL,
    data TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id TEXT PRIMARY KEY,
    org_id TEXT NOT NULL,
    task_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    version INTEGER NOT NULL,
    data TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS blobs (
    digest TEXT NOT NULL,
    org_id TEXT NOT NULL,
    media_kind TEXT NOT NULL,
    size INTEGER NOT NULL,
    PRIMARY KEY (digest, org_id)
);
CREATE TABLE IF NOT EXISTS jobs (
    job_id TEXT PRIMARY KEY,
    org_id TEXT NOT NULL,
    kind TEXT NOT NULL,
    payload TEXT NOT NULL,
    status TEXT NOT NULL,
    outputs TEXT NOT NULL DEFAULT '[]',
    stats TEXT NOT NULL DEFAULT 'null',
    error TEXT NOT NULL DEFAULT '',
    lease_until REAL NOT NULL DEFAULT 0,
    created_at REAL NOT NULL
);
CREATE INDEX IF NOT EXISTS sessions_by_task ON sessions (org_id, task_id);
CREATE INDEX IF NOT EXISTS jobs_by_status ON jobs (status, created_at);
"""


class MediaKind(str, Enum):
    IMAGE = "IMAGE"
    GLB = "GLB"
    AUDIO = "AUDIO"


@dataclass(frozen=True)
class BlobRef:
    digest: str
    media_kind: MediaKind
    size: int

    def to_dict(self) -> dict:
        return {"digest": self.digest, "media_kind": self.media_kind.value, "size": self.size}


@dataclass
class JobRow:
    job_id: str
    org_id: str
    kind: str
    payload: dict
    status: str
    outputs: list[str]
    stats: dict | None
    error: str
    created_at: float


class Store:
    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        self.blob_dir = os.path.join(data_dir, "blobs")
        os.makedirs(self.blob_dir, exist_ok=True)
        self.db_path = os.path.join(data_dir, "service.db")
        self._lock = threading.Lock()
        with self._connect() as conn:
            conn.executescript(_SCHEMA)

    def _connect(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.db_path, timeout=30.0)
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA busy_timeout=30000")
        return conn

    # -- tasks ------------------------------------------------------------

    def put_task(self, task: Task) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO tasks (task_id, org_id, data) VALUES (?, ?, ?)",
                (task.task_id, task.org_id, json.dumps(task.to_dict())),
            )

    def get_task(self, task_id: str, org_id: str) -> Task | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT data FROM tasks WHERE task_id = ? AND org_id = ?",
                (task_id, org_id),
            ).fetchone()
        return Task.from_dict(json.loads(row[0])) if row else None

    # -- assets -----------------------------------------------------------

    def put_asset(self, asset: Asset) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO assets (asset_id, org_id, data) VALUES (?, ?, ?)",
                (asset.asset_id, asset.org_id, json.dumps(asset.to_dict())),
            )

    def get_asset(self, asset_id: str, org_id: str) -> Asset | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT data FROM assets WHERE asset_id = ? AND org_id = ?",
                (asset_id, org_id),
            ).fetchone()
        return Asset.from_dict(json.loads(row[0])) if row else None

    def assets_by_ids(self, asset_ids: list[str], org_id: str) -> dict[str, Asset]:
        out: dict[str, Asset] = {}
        for asset_id in asset_ids:
            asset = self.get_asset(asset_id, org_id)
            if asset is not None:
                out[asset_id] = asset
        return out

    # -- sessions ---------------------------------------------------------

    def insert_session(self, session: AnnotationSession) -> None:
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO sessions (session_id, org_id, task_id, annotator_id, version, data)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (
                    session.session_id,
                    session.org_id,
                    session.task_id,
                    session.annotator_id,
                    session.version,
                    json.dumps(session.to_dict()),
                ),
            )

    def get_session(self, session_id: str, org_id: str) -> AnnotationSession | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT data FROM sessions WHERE session_id = ? AND org_id = ?",
                (session_id, org_id),
            ).fetchone()
        return AnnotationSession.from_dict(json.loads(row[0])) if row else None

    def cas_update_session(self, session: AnnotationSession, expected_version: int) -> bool:
        """Persist iff nobody else wrote since `expected_version`."""
        with self._lock, self._connect() as conn:
            cursor = conn.execute(
                "UPDATE sessions SET version = ?, data = ?"
                " WHERE session_id = ? AND org_id = ? AND version = ?",
                (
                    session.version,
                    json.dumps(session.to_dict()),
                    session.session_id,
                    session.org_id,
                    expected_version,
                ),
            )
            return cursor.rowcount == 1

    def sessions_for_task(self, task_id: str, org_id: str) -> list[AnnotationSession]:
        with self._connect() as conn:
            rows = conn.execute(
                "SELECT data FROM sessions WHERE task_id = ? AND org_id = ? ORDER BY session_id",
                (task_id, org_id),
            ).fetchall()
        return [AnnotationSession.from_dict(json.loads(r[0])) for r in rows]

    # -- blobs ------------------------------------------------------------

    def _blob_path(self, digest: str) -> str:
        return os.path.join(self.blob_dir, digest[:2], digest)

    def put_blob(self, data: bytes, media_kind: MediaKind, org_id: str) -> BlobRef:
        digest = blob_digest(data)
        path = self._blob_path(digest)
        if not os.path.exists(path):
            os.makedirs(os.path.dirname(path), exist_ok=True)
            tmp = f"{path}.tmp.{os.getpid()}.{threading.get_ident()}"
            with open(tmp, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        with self._connect() as conn:
            conn.execute(
                "INSERT OR IGNORE INTO blobs (digest, org_id, media_kind, size) VALUES (?, ?, ?, ?)",
                (digest, org_id, media_kind.value, len(data)),
            )
        return BlobRef(digest=digest, media_kind=media_kind, size=len(data))

    def get_blob(self, digest: str, org_id: str) -> bytes | None:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT size FROM blobs WHERE digest = ? AND org_id = ?",
                (digest, org_id),
            ).fetchone()
        if row is None:
            return None
        path = self._blob_path(digest)
        if not os.path.exists(path):
            return None
        with open(path, "rb") as fh:
            return fh.read()

    def blob_exists(self, digest: str, org_id: str) -> bool:
        with self._connect() as conn:
            row = conn.execute(
                "SELECT 1 FROM blobs WHERE digest = ? AND org_id = ?",
                (digest, org_id),
            ).fetchone()
        return row is not None

    # -- jobs ---------------------------------------------------------------

    def create_job(self, job_id: str, org_id: str, kind: str, payload: dict) -> JobRow:
        now = time.time()
        with self._connect() as conn:
            conn.execute(
                "INSERT INTO jobs (job_id, org_id, kind, payload, status, created_at)"
                " VALUES (?, ?, ?, ?, 'QUEUED', ?)",
                (job_id, org_id, kind, json.dumps(payload), now),
            )
        return JobRow(job_id, org_id, kind, payload, "QUEUED", [], None, "", now)

    def get_job(self, job_id: str, org_id: str | None = None) -> JobRow | None:
        query = "SELECT job_id, org_id, kind, payload, status, outputs, stats, error, created_at FROM jobs WHERE job_id = ?"
        params: tuple = (job_id,)
        if org_id is not None:
            query += " AND org_id = ?"
            params = (job_id, org_id)
        with self._connect() as conn:
            row = conn.execute(query, params).fetchone()
        if row is None:
            return None
        return JobRow(
            job_id=row[0],
            org_id=row[1],
            kind=row[2],
            payload=json.loads(row[3]),
            status=row[4],
            outputs=json.loads(row[5]),
            stats=json.loads(row[6]),
            error=row[7],
            created_at=row[8],
        )

    def lease_next_job(self, lease_s: float) -> JobRow | None:
        """Claim the oldest runnable job (fresh or expired-lease) atomically."""
        now = time.time()
        with self._lock, self._connect() as conn:
            row = conn.execute(
                "SELECT job_id FROM jobs WHERE status = 'QUEUED'"
                " OR (status = 'RUNNING' AND lease_until < ?)"
                " ORDER BY created_at LIMIT 1",
                (now,),
            ).fetchone()
            if row is None:
                return None
            cursor = conn.execute(
                "UPDATE jobs SET status = 'RUNNING', lease_until = ? WHERE job_id = ?"
                " AND (status = 'QUEUED' OR (status = 'RUNNING' AND lease_until < ?))",
                (now + lease_s, row[0], now),
            )
            if cursor.rowcount != 1:
                return None
        return self.get_job(row[0])

    def heartbeat_job(self, job_id: str, lease_s: float) -> None:
        with self._connect() as conn:
            conn.execute(
                "UPDATE jobs SET lease_until = ? WHERE job_id = ?",
                (time.time() + lease_s, job_id),
            )

    def finish_job(
        self,
        job_id: str,
        status: str,
        outputs: list[str] | None = None,
        stats: dict | None = None,
        error: str = "",
    ) -> None:
        with self._connect() as conn:
            conn.execute(
                "UPDATE jobs SET status = ?, outputs = ?, stats = ?, error = ? WHERE job_id = ?",
                (status, json.dumps(outputs or []), json.dumps(stats), error, job_id),
            )

"""Pluggable speech-to-text and language-model clients.

Production adapters speak HTTP; the deterministic mocks answer from fixture
tables so tests (and `MOCK_CLIENTS=1` deployments) are exactly reproducible.
Every language-model exchange can be journaled — an append-only JSONL of
request digest → response — so a finished export can be re-materialized
byte-identically without calling any external service again.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from typing import Protocol

from .audio import UnsupportedAudio, decode_duration


class ClientError(Exception):
    """A client call failed; `retryable` says whether backoff makes sense."""

    def __init__(self, detail: str, *, retryable: bool = True):
        super().__init__(detail)
        self.detail = detail
        self.retryable = retryable


@dataclass(frozen=True)
class TranscriptionResult:
    text: str
    duration_s: float


class SpeechToTextClient(Protocol):
    def transcribe(self, audio: bytes, language_hint: str) -> TranscriptionResult: ...


class LanguageModelClient(Protocol):
    def complete(self, system: str, user: str) -> str: ...


def blob_digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def request_digest(system: str, user: str) -> str:
    h = hashlib.sha256()
    h.update(system.encode("utf-8"))
    h.update(b"\x00")
    h.update(user.encode("utf-8"))
    return h.hexdigest()


class MockSpeechToTextClient:
    """Transcript keyed by blob digest; unknown blobs get a stable synthetic one."""

    def __init__(self, transcripts: dict[str, str] | None = None):
        self.transcripts = dict(transcripts or {})

    def transcribe(self, audio: bytes, language_hint: str) -> TranscriptionResult:
        digest = blob_digest(audio)
        text = self.transcripts.get(digest, f"spoken note {digest[:12]} ({language_hint})")
        try:
            duration = decode_duration(audio)
        except UnsupportedAudio:
            duration = 0.0
        return TranscriptionResult(text=text, duration_s=duration)


class MockLanguageModelClient:
    """Deterministic double for the completion contract.

    The pipeline sends structured JSON user messages; the mock dispatches on
    their `op`:

    - ``summarize``: returns the transcripts joined with single spaces, in
      order, so summaries are exact in tests.
    - ``extract``: returns the planted fixture answer for
      ``(category, scene_id)``; lists are returned as JSON arrays. Without a
      fixture entry it falls back to the joined transcripts.
    """

    def __init__(self, extractions: dict[tuple[str, str], object] | None = None):
        self.extractions = dict(extractions or {})

    def complete(self, system: str, user: str) -> str:
        try:
            payload = json.loads(user)
        except json.JSONDecodeError as exc:
            raise ClientError(f"mock client expects JSON user messages: {exc}", retryable=False) from exc
        op = payload.get("op")
        if op == "summarize":
            return " ".join(payload.get("transcripts", ()))
        if op == "extract":
            key = (payload.get("category", ""), payload.get("scene_id", ""))
            if key in self.extractions:
                value = self.extractions[key]
                if isinstance(value, (list, tuple)):
                    return json.dumps(list(value), ensure_ascii=False)
                return str(value)
            return " ".join(payload.get("transcripts", ()))
        raise ClientError(f"mock client does not understand op {op!r}", retryable=False)


class ClientJournal:
    """Append-only JSONL replay log: one {digest, response} object per line."""

    def __init__(self, path: str):
        self.path = path
        self._cache: dict[str, str] = {}
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    row = json.loads(line)
                    self._cache[row["digest"]] = row["response"]

    def get(self, digest: str) -> str | None:
        return self._cache.get(digest)

    def record(self, digest: str, response: str) -> None:
        if digest in self._cache:
            return
        self._cache[digest] = response
        with open(self.path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps({"digest": digest, "response": response}, ensure_ascii=False) + "\n")

    def __len__(self) -> int:
        return len(self._cache)


class JournaledLanguageModel:
    """Wrap any completion client with journal replay.

    A journaled digest is answered from the log without touching the inner
    client; new exchanges are appended after they succeed.
    """

    def __init__(self, inner: LanguageModelClient, journal: ClientJournal):
        self.inner = inner
        self.journal = journal

    def complete(self, system: str, user: str) -> str:
        digest = request_digest(system, user)
        cached = self.journal.get(digest)
        if cached is not None:
            return cached
        response = self.inner.complete(system, user)
        self.journal.record(digest, response)
        return response


def _retrying_post(url: str, payload: dict, headers: dict[str, str], *, attempts: int = 3) -> dict:
    import httpx

    delay = 0.5
    last: Exception | None = None
    for attempt in range(attempts):
        try:
            response = httpx.post(url, json=payload, headers=headers, timeout=60.0)
            if response.status_code >= 500:
                raise ClientError(f"{url} returned {response.status_code}")
            if response.status_code >= 400:
                raise ClientError(f"{url} returned {response.status_code}", retryable=False)
            return response.json()
        except ClientError as exc:
            if not exc.retryable:
                raise
            last = exc
        except httpx.HTTPError as exc:
            last = ClientError(str(exc))
        if attempt + 1 < attempts:
            time.sleep(delay)
            delay *= 2
    raise last if last is not None else ClientError(f"{url} failed")


class HttpLanguageModelClient:
    """Minimal JSON-over-HTTP adapter: POST {model, system, user} → {text}."""

    def __init__(self, endpoint: str, credential: str = "", model: str = ""):
        self.endpoint = endpoint
        self.credential = credential
        self.model = model

    def complete(self, system: str, user: str) -> str:
        headers = {"Authorization": f"Bearer {self.credential}"} if self.credential else {}
        body = _retrying_post(
            self.endpoint,
            {"model": self.model, "system": system, "user": user},
            headers,
        )
        try:
            return body["text"]
        except (KeyError, TypeError) as exc:
            raise ClientError("completion response lacks a 'text' field", retryable=False) from exc


class HttpSpeechToTextClient:
    """POST base64 audio + language hint → {text, duration_s}."""

    def __init__(self, endpoint: str, credential: str = ""):
        self.endpoint = endpoint
        self.credential = credential

    def transcribe(self, audio: bytes, language_hint: str) -> TranscriptionResult:
        import base64

        headers = {"Authorization": f"Bearer {self.credential}"} if self.credential else {}
        body = _retrying_post(
            self.endpoint,
            {"audio_b64": base64.b64encode(audio).decode("ascii"), "language": language_hint},
            headers,
        )
        try:
            return TranscriptionResult(text=body["text"], duration_s=float(body["duration_s"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ClientError("transcription response lacks text/duration_s", retryable=False) from exc

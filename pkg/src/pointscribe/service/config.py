"""Service configuration and principals.

Everything is settable from the environment so the server is one command to
run; auth is static bearer tokens provisioned per principal (no identity
federation). `MOCK_CLIENTS=1` swaps the speech-to-text and language-model
adapters for their deterministic doubles.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from enum import Enum


class Role(str, Enum):
    ADMIN = "ADMIN"
    ANNOTATOR = "ANNOTATOR"


@dataclass(frozen=True)
class Principal:
    principal_id: str
    org_id: str
    role: Role
    token: str


@dataclass(frozen=True)
class ServiceConfig:
    data_dir: str = "data"
    host: str = "127.0.0.1"
    port: int = 8800
    mock_clients: bool = False
    stt_endpoint: str = ""
    stt_credential: str = ""
    llm_endpoint: str = ""
    llm_credential: str = ""
    llm_model: str = ""
    principals: tuple[Principal, ...] = field(default_factory=tuple)
    job_poll_interval_s: float = 0.05
    job_lease_s: float = 30.0

    @classmethod
    def from_env(cls, env: dict[str, str] | None = None) -> "ServiceConfig":
        env = dict(os.environ if env is None else env)
        principals: list[Principal] = []
        principals_file = env.get("POINTSCRIBE_PRINCIPALS", "")
        if principals_file and os.path.exists(principals_file):
            with open(principals_file, encoding="utf-8") as fh:
                for row in json.load(fh):
                    principals.append(
                        Principal(
                            principal_id=row["principal_id"],
                            org_id=row["org_id"],
                            role=Role(row["role"]),
                            token=row["token"],
                        )
                    )
        return cls(
            data_dir=env.get("POINTSCRIBE_DATA", "data"),
            host=env.get("POINTSCRIBE_HOST", "127.0.0.1"),
            port=int(env.get("POINTSCRIBE_PORT", "8800")),
            mock_clients=env.get("MOCK_CLIENTS", "") == "1",
            stt_endpoint=env.get("STT_ENDPOINT", ""),
            stt_credential=env.get("STT_CREDENTIAL", ""),
            llm_endpoint=env.get("LLM_ENDPOINT", ""),
            llm_credential=env.get("LLM_CREDENTIAL", ""),
            llm_model=env.get("LLM_MODEL", ""),
            principals=tuple(principals),
        )

"""End-to-end tour of the HTTP service: assets, tasks, sessions, exports.

Runs the real FastAPI app in-process with the deterministic client doubles
(the same wiring `MOCK_CLIENTS=1` selects), so no external services or GPUs
are needed. The narration files are tiny WebM containers whose headers carry
the durations an annotator's browser recording would.

Run:  python3 demos/service_tour.py
"""
import json
import tempfile
import time
from pathlib import Path

from fastapi.testclient import TestClient

from pointscribe.service.app import create_app
from pointscribe.service.config import Principal, Role, ServiceConfig

FIXTURES = Path(__file__).parent / "fixtures"

ADMIN = {"Authorization": "Bearer demo-admin"}
ANNOTATOR = {"Authorization": "Bearer demo-annotator"}

config = ServiceConfig(
    data_dir=tempfile.mkdtemp(prefix="pointscribe-demo-"),
    mock_clients=True,
    job_poll_interval_s=0.05,
    principals=(
        Principal(principal_id="ada", org_id="demo-org", role=Role.ADMIN, token="demo-admin"),
        Principal(principal_id="ann", org_id="demo-org", role=Role.ANNOTATOR, token="demo-annotator"),
    ),
)


def wait_for(fetch, done, timeout=15.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        value = fetch()
        if done(value):
            return value
        time.sleep(0.05)
    raise TimeoutError("gave up waiting")


def transcripts_of(http, session_id):
    session = http.get(f"/api/sessions/{session_id}", headers=ANNOTATOR).json()
    return [r for r in session["recordings"] if r["auto_transcript"] is not None]


def fresh_version(http, session_id):
    return http.get(f"/api/sessions/{session_id}", headers=ANNOTATOR).json()["version"]


with TestClient(create_app(config)) as http:
    print(f"data directory: {config.data_dir}\n")

    # ---- 2D leg: point-and-narrate over an image -------------------------
    print("== 2D: image with pointed caption ==")
    asset = http.post(
        "/api/assets",
        files={"file": ("desk.png", (FIXTURES / "desk.png").read_bytes(), "image/png")},
        data={"kind": "IMAGE_2D"},
        headers=ADMIN,
    ).json()["asset"]
    task = http.post(
        "/api/tasks",
        json={
            "title": "desk photos",
            "kind": "IMAGE_2D",
            "prompt_profile": "PART_B",
            "asset_ids": [asset["asset_id"]],
        },
        headers=ADMIN,
    ).json()
    session = http.post(
        "/api/sessions",
        json={"task_id": task["task_id"], "asset_id": asset["asset_id"], "language": "en"},
        headers=ANNOTATOR,
    ).json()
    sid = session["session_id"]

    # five points, then one narration; concurrent writers would retry on a
    # 409 CONFLICT, but this single writer can just carry the version along
    version = session["version"]
    for i, name in enumerate(["mug", "keyboard", "monitor", "lamp", "notebook"]):
        r = http.post(
            f"/api/sessions/{sid}/points",
            json={"version": version, "name": name, "x": 20.0 + 12 * i, "y": 55.0, "order": i},
            headers=ANNOTATOR,
        )
        version = r.json()["version"]

    http.post(
        f"/api/sessions/{sid}/recordings",
        files={"file": ("take1.webm", (FIXTURES / "narration_65s.webm").read_bytes(), "audio/webm")},
        data={"target": "SCENE_OR_IMAGE", "version": str(version)},
        headers=ANNOTATOR,
    )
    recording = wait_for(lambda: transcripts_of(http, sid), lambda got: len(got) == 1)[0]
    print(f"auto transcript : {recording['auto_transcript']!r}")

    edited = http.put(
        f"/api/sessions/{sid}/recordings/{recording['recording_id']}/transcript",
        json={
            "version": fresh_version(http, sid),
            "edited_text": recording["auto_transcript"] + " on a desk",
        },
        headers=ANNOTATOR,
    )
    assert edited.status_code == 200, edited.text
    print(f"edited          : {edited.json()['recording']['edited_transcript']!r}")
    r = http.post(
        f"/api/sessions/{sid}/submit", json={"version": fresh_version(http, sid)}, headers=ANNOTATOR
    )
    assert r.status_code == 200, r.text
    print(f"submit          : accepted={r.json()['accepted']}")

    job = http.post(
        "/api/exports", json={"task_id": task["task_id"], "shape": "mldc_mc_b"}, headers=ADMIN
    ).json()
    job = wait_for(
        lambda: http.get(f"/api/exports/{job['job_id']}", headers=ADMIN).json(),
        lambda j: j["status"] in ("DONE", "FAILED"),
    )
    records_path = next(p for p in job["outputs"] if p.endswith("records.jsonl"))
    record = json.loads((Path(config.data_dir) / records_path).read_text().splitlines()[0])
    print(f"export status   : {job['status']}")
    print("training response:")
    for line in record["training_response"].splitlines():
        print(f"  {line}")

    # ---- 3D leg: object stage, unlock, scene stage, dataset export -------
    print("\n== 3D: narrated scene to conversation samples ==")
    scene = http.post(
        "/api/assets",
        files={"file": ("room.glb", (FIXTURES / "room.glb").read_bytes(), "model/gltf-binary")},
        data={
            "kind": "SCENE_3D",
            "subcategory": "Kitchen",
            "objects": json.dumps([{"name": "table"}, {"name": "kettle"}, {"name": "stool"}]),
        },
        headers=ADMIN,
    ).json()["asset"]
    task3d = http.post(
        "/api/tasks",
        json={"title": "kitchens", "kind": "SCENE_3D", "asset_ids": [scene["asset_id"]]},
        headers=ADMIN,
    ).json()
    session = http.post(
        "/api/sessions",
        json={"task_id": task3d["task_id"], "asset_id": scene["asset_id"], "language": "en"},
        headers=ANNOTATOR,
    ).json()
    sid = session["session_id"]
    print(f"stage after open: {session['stage']}")

    narration = (FIXTURES / "narration_25s.webm").read_bytes()
    for obj in scene["objects"]:
        http.post(
            f"/api/sessions/{sid}/recordings",
            files={"file": ("take.webm", narration, "audio/webm")},
            data={"target": obj["object_id"], "version": str(fresh_version(http, sid))},
            headers=ANNOTATOR,
        )
        wait_for(lambda: transcripts_of(http, sid), lambda got: any(
            r["target"] == obj["object_id"] for r in got
        ))

    unlocked = http.post(
        f"/api/sessions/{sid}/unlock-scene",
        json={"version": fresh_version(http, sid)},
        headers=ANNOTATOR,
    ).json()
    print(f"stage unlocked  : {unlocked['stage']}")

    http.post(
        f"/api/sessions/{sid}/recordings",
        files={"file": ("scene.webm", (FIXTURES / "narration_70s.webm").read_bytes(), "audio/webm")},
        data={"target": "SCENE_OR_IMAGE", "version": str(fresh_version(http, sid))},
        headers=ANNOTATOR,
    )
    wait_for(lambda: transcripts_of(http, sid), lambda got: len(got) == 4)
    verdict = http.post(
        f"/api/sessions/{sid}/submit", json={"version": fresh_version(http, sid)}, headers=ANNOTATOR
    ).json()
    print(f"submit          : accepted={verdict['accepted']}")

    job = http.post(
        "/api/exports",
        json={"task_id": task3d["task_id"], "shape": "mldc_3d", "per_subcategory_test": 1, "seed": 7},
        headers=ADMIN,
    ).json()
    job = wait_for(
        lambda: http.get(f"/api/exports/{job['job_id']}", headers=ADMIN).json(),
        lambda j: j["status"] in ("DONE", "FAILED"),
    )
    print(f"export status   : {job['status']}")
    for rel in sorted(job["outputs"]):
        print(f"  {rel}")

    records_path = next(p for p in job["outputs"] if p.endswith("records.jsonl"))
    lines = (Path(config.data_dir) / records_path).read_text().splitlines()
    print(f"\n{len(lines)} conversation samples; the first one:")
    sample = json.loads(lines[0])
    for turn in sample["conversations"]:
        text = turn["value"].replace("\n", "\n    ")
        print(f"  {turn['from']}: {text}")

    stats_path = next(p for p in job["outputs"] if p.endswith("stats.txt"))
    print("\nper-language stats:")
    for line in (Path(config.data_dir) / stats_path).read_text().splitlines():
        print(f"  {line}")

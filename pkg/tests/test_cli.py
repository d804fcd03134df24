"""Smoke tests for the command-line entrypoints."""
import dataclasses
import json
from pathlib import Path

from click.testing import CliRunner

from pointscribe.cli import main
from pointscribe.geometry import read_npy
from pointscribe.model import SCENE_TARGET, AssetKind, new_task
from pointscribe.service.store import MediaKind, Store
from pointscribe.workflow import (
    attach_recording,
    set_auto_transcript,
    start_session,
    submit,
    unlock_scene_stage,
)

from conftest import make_scene_asset
from helpers import single_triangle_glb


def test_help_lists_all_commands():
    result = CliRunner().invoke(main, ["--help"])
    assert result.exit_code == 0
    for command in ("serve", "export", "convert-glb", "stats"):
        assert command in result.output


def test_convert_glb_writes_seeded_cloud(tmp_path):
    glb = tmp_path / "scene.glb"
    glb.write_bytes(single_triangle_glb(name="table"))
    out_a = tmp_path / "a.npy"
    out_b = tmp_path / "b.npy"

    runner = CliRunner()
    for out in (out_a, out_b):
        result = runner.invoke(main, ["convert-glb", str(glb), str(out), "--points", "64", "--seed", "3"])
        assert result.exit_code == 0, result.output
        assert "64 points" in result.output

    assert read_npy(str(out_a)).shape == (64, 6)
    assert out_a.read_bytes() == out_b.read_bytes()


def test_stats_reports_per_language_medians(tmp_path):
    records = tmp_path / "records.jsonl"
    rows = [
        {"id": "img-1:en", "image": "img-1.png", "language": "en", "caption": "a tidy desk", "transcripts": []},
        {"id": "img-2:en", "image": "img-2.png", "language": "en", "caption": "two mugs on a tray", "transcripts": []},
        {"id": "img-1:zh", "image": "img-1.png", "language": "zh", "caption": "一张整洁的桌子", "transcripts": []},
    ]
    records.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n")

    result = CliRunner().invoke(main, ["stats", str(records)])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0].split("\t") == ["language", "annotation_count", "median_word_count", "median_char_count"]
    assert lines[1].split("\t") == ["en", "2", "3", "11"]  # lower median of {3, 5} words and {11, 18} chars
    assert lines[2].split("\t") == ["zh", "1", "1", "7"]


def test_stats_rejects_empty_records(tmp_path):
    records = tmp_path / "records.jsonl"
    records.write_text("\n")
    result = CliRunner().invoke(main, ["stats", str(records)])
    assert result.exit_code != 0
    assert "no captions" in result.output


def test_export_runs_against_a_seeded_store(tmp_path, monkeypatch):
    monkeypatch.setenv("MOCK_CLIENTS", "1")
    data_dir = tmp_path / "data"
    store = Store(str(data_dir))

    glb = single_triangle_glb(name="table")
    blob = store.put_blob(glb, MediaKind.GLB, "org-a")
    scene = dataclasses.replace(make_scene_asset(names=("table", "lamp")), media_ref=blob.digest)
    task = new_task("scenes", AssetKind.SCENE_3D, "org-a", asset_ids=(scene.asset_id,), task_id="task-cli")
    store.put_asset(scene)
    store.put_task(task)

    session = start_session(task, scene, "ann", "en", session_id="s-cli")
    for obj in scene.objects:
        rec = attach_recording(session, obj.object_id, f"{obj.object_id}.webm", 25.0, asset=scene)
        set_auto_transcript(session, rec.recording_id, f"the {obj.name} sits by the wall")
    unlock_scene_stage(session, asset=scene)
    rec = attach_recording(session, SCENE_TARGET, "scene.webm", 70.0, asset=scene)
    set_auto_transcript(session, rec.recording_id, "a small kitchen")
    assert submit(session, asset=scene).accepted
    store.insert_session(session)

    result = CliRunner().invoke(
        main,
        [
            "export",
            "task-cli",
            "mldc_3d",
            "--data-dir",
            str(data_dir),
            "--org",
            "org-a",
            "--per-subcategory-test",
            "1",
            "--sampler-points",
            "32",
        ],
    )
    assert result.exit_code == 0, result.output
    printed = result.output.strip().splitlines()
    assert any(p.endswith("records.jsonl") for p in printed)
    for p in printed:
        assert Path(p).exists(), p


def test_export_unknown_task_fails_cleanly(tmp_path, monkeypatch):
    monkeypatch.setenv("MOCK_CLIENTS", "1")
    result = CliRunner().invoke(
        main, ["export", "ghost", "mldc_mc_a", "--data-dir", str(tmp_path / "data"), "--org", "org-a"]
    )
    assert result.exit_code != 0
    assert "ghost" in result.output

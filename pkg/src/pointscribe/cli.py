"""Command-line entrypoints: serve the API, run exports, convert scenes,
and summarize exported captions."""
from __future__ import annotations

import json
import os

import click

from .export import ExportShape, compute_stats
from .geometry import SamplerConfig, parse_glb, sample_scene, write_npy
from .model import Asset, Caption, CaptionSource
from .pointing import parse_points
from .service.config import ServiceConfig
from .service.jobs import build_clients
from .service.store import Store


@click.group()
def main() -> None:
    """Audio-driven dense-annotation backend."""


@main.command()
@click.option("--host", default=None, help="Listen address (default from env or 127.0.0.1).")
@click.option("--port", default=None, type=int, help="Listen port (default from env or 8800).")
@click.option("--data-dir", default=None, help="Data directory (database, blobs, exports).")
def serve(host: str | None, port: int | None, data_dir: str | None) -> None:
    """Run the HTTP API server."""
    import uvicorn

    from .service.app import create_app

    config = ServiceConfig.from_env()
    if host or port or data_dir:
        config = ServiceConfig(
            **{
                **config.__dict__,
                **({"host": host} if host else {}),
                **({"port": port} if port else {}),
                **({"data_dir": data_dir} if data_dir else {}),
            }
        )
    uvicorn.run(create_app(config), host=config.host, port=config.port)


@main.command("export")
@click.argument("task_id")
@click.argument("shape", type=click.Choice([s.value for s in ExportShape]))
@click.option("--data-dir", default="data", show_default=True)
@click.option("--org", required=True, help="Organization id owning the task.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--per-subcategory-test", default=2, show_default=True, type=int)
@click.option("--sampler-points", default=None, type=int, help="Points per scene cloud.")
def export_cmd(
    task_id: str,
    shape: str,
    data_dir: str,
    org: str,
    seed: int,
    per_subcategory_test: int,
    sampler_points: int | None,
) -> None:
    """Export a task's submitted sessions to one dataset shape."""
    from .export import ExportError, run_export

    store = Store(data_dir)
    config = ServiceConfig.from_env()
    _, llm_factory = build_clients(config)
    task = store.get_task(task_id, org)
    if task is None:
        raise click.ClickException(f"no task {task_id!r} in org {org!r}")
    assets = store.assets_by_ids(list(task.asset_ids), org)
    sessions = store.sessions_for_task(task_id, org)

    def glb_loader(asset: Asset) -> bytes:
        data = store.get_blob(asset.media_ref, org)
        if data is None:
            raise click.ClickException(f"missing stored scene for asset {asset.asset_id}")
        return data

    try:
        outputs, _stats = run_export(
            task,
            ExportShape(shape),
            assets=assets,
            sessions=sessions,
            glb_loader=glb_loader,
            client=llm_factory(assets),
            out_root=data_dir,
            seed=seed,
            per_subcategory_test=per_subcategory_test,
            sampler_points=sampler_points,
        )
    except ExportError as exc:
        raise click.ClickException(str(exc)) from exc
    for path in outputs:
        click.echo(path)


@main.command("convert-glb")
@click.argument("glb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("npy_path", type=click.Path(dir_okay=False))
@click.option("--points", default=8192, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option(
    "--exclude",
    multiple=True,
    help="Ground-exclusion name pattern (repeatable; default ground/floor/plane).",
)
def convert_glb(glb_path: str, npy_path: str, points: int, seed: int, exclude: tuple[str, ...]) -> None:
    """Sample a binary glTF scene into an (N, 6) xyz+rgb `.npy` cloud."""
    with open(glb_path, "rb") as fh:
        meshes = parse_glb(fh.read())
    config = SamplerConfig(n_points=points, seed=seed)
    if exclude:
        config = SamplerConfig(n_points=points, seed=seed, ground_exclude_patterns=exclude)
    cloud = sample_scene(meshes, config, scene_id=os.path.splitext(os.path.basename(glb_path))[0])
    written = write_npy(cloud, npy_path)
    click.echo(f"{npy_path}: {cloud.n} points, {written} bytes")


@main.command("stats")
@click.argument("records_path", type=click.Path(exists=True, dir_okay=False))
def stats_cmd(records_path: str) -> None:
    """Per-language caption statistics from an exported records.jsonl."""
    captions: list[Caption] = []
    with open(records_path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            caption = _caption_of_record(record)
            if caption is not None:
                captions.append(caption)
    if not captions:
        raise click.ClickException("no captions found in the records file")
    stats = compute_stats(captions)
    click.echo("language\tannotation_count\tmedian_word_count\tmedian_char_count")
    for lang, s in sorted(stats.per_language.items()):
        click.echo(f"{lang}\t{s.annotation_count}\t{s.median_word_count}\t{s.median_char_count}")


def _caption_of_record(record: dict) -> Caption | None:
    """Pull (language, caption text) out of any of the three record shapes."""
    if "caption" in record and "language" in record:
        text = record["caption"]
    elif "training_response" in record and "language" in record:
        text = parse_points(record["training_response"]).residual.rstrip()
    elif record.get("conversation_type") == "detailed_description":
        parts = str(record.get("id", "")).split("::")
        language = parts[2] if len(parts) > 2 else "und"
        turns = record.get("conversations", [])
        reply = next((t["value"] for t in turns if t.get("from") == "gpt"), None)
        if reply is None:
            return None
        return Caption(record.get("object_id", ""), language, reply, CaptionSource.SUMMARIZED, ("cli",))
    else:
        return None
    return Caption(record.get("id", ""), record["language"], text, CaptionSource.SUMMARIZED, ("cli",))


if __name__ == "__main__":
    main()

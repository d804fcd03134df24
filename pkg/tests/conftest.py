from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pointscribe.model import (
    Asset,
    AssetKind,
    PromptProfile,
    SceneMeta,
    SceneObject,
    new_task,
)
from pointscribe.service.config import Principal, Role, ServiceConfig


@pytest.fixture
def image_asset():
    return Asset(asset_id="img-1", kind=AssetKind.IMAGE_2D, media_ref="img-1.png", org_id="org-a")


def make_scene_asset(asset_id="scene-1", subcategory="Kitchen", org_id="org-a", names=("table", "lamp", "chair")):
    objects = tuple(
        SceneObject(object_id=f"{asset_id}-obj-{i}", name=name, node_path=name)
        for i, name in enumerate(names)
    )
    return Asset(
        asset_id=asset_id,
        kind=AssetKind.SCENE_3D,
        media_ref=f"{asset_id}.glb",
        org_id=org_id,
        scene_meta=SceneMeta.for_subcategory(subcategory),
        objects=objects,
    )


@pytest.fixture
def scene_asset():
    return make_scene_asset()


@pytest.fixture
def image_task(image_asset):
    return new_task(
        "kitchen photos",
        AssetKind.IMAGE_2D,
        "org-a",
        asset_ids=(image_asset.asset_id,),
        prompt_profile=PromptProfile.PART_B,
    )


@pytest.fixture
def scene_task(scene_asset):
    return new_task(
        "indoor scans",
        AssetKind.SCENE_3D,
        "org-a",
        asset_ids=(scene_asset.asset_id,),
    )


PRINCIPALS = (
    Principal(principal_id="ada", org_id="org-a", role=Role.ADMIN, token="tok-admin-a"),
    Principal(principal_id="ann", org_id="org-a", role=Role.ANNOTATOR, token="tok-anno-a"),
    Principal(principal_id="avery", org_id="org-a", role=Role.ANNOTATOR, token="tok-anno-a2"),
    Principal(principal_id="bob", org_id="org-b", role=Role.ADMIN, token="tok-admin-b"),
    Principal(principal_id="bea", org_id="org-b", role=Role.ANNOTATOR, token="tok-anno-b"),
)


def auth(token: str) -> dict:
    return {"Authorization": f"Bearer {token}"}


@pytest.fixture
def service_config(tmp_path):
    return ServiceConfig(
        data_dir=str(tmp_path / "data"),
        mock_clients=True,
        principals=PRINCIPALS,
        job_poll_interval_s=0.01,
    )


@pytest.fixture
def client(service_config):
    from fastapi.testclient import TestClient

    from pointscribe.service.app import create_app

    with TestClient(create_app(service_config)) as test_client:
        yield test_client

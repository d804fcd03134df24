"""Uniform surface sampling of triangle meshes into colored point clouds.

Per-triangle sample counts are apportioned to world-space area by largest
remainder (so they always sum exactly to the requested size), barycentric
weights are drawn with the fold trick, and colors come from nearest-neighbor
texture lookup at the barycentrically interpolated UV, falling back to the
material's base color. Everything is driven by one seeded generator, so a
given (meshes, config) pair always produces the identical cloud.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..model import DEFAULT_CLOUD_POINTS, PointCloud
from .glb import GeometryError, TriangleMesh

DEFAULT_GROUND_PATTERNS: tuple[str, ...] = ("ground", "floor", "plane")


@dataclass(frozen=True)
class SamplerConfig:
    n_points: int = DEFAULT_CLOUD_POINTS
    seed: int = 0
    ground_exclude_patterns: tuple[str, ...] = DEFAULT_GROUND_PATTERNS

    def __post_init__(self) -> None:
        if self.n_points < 1:
            raise ValueError("n_points must be at least 1")


def sample_point_on_triangle(v1, v2, v3, rng) -> tuple[np.ndarray, tuple[float, float, float]]:
    """One uniform sample: position and its barycentric weights.

    Draws r1, r2 from rng; weights landing outside the triangle (r1+r2 > 1)
    are folded back (r ← 1−r), and r3 = 1−r1−r2 completes the triple.
    """
    v1 = np.asarray(v1, dtype=np.float64)
    v2 = np.asarray(v2, dtype=np.float64)
    v3 = np.asarray(v3, dtype=np.float64)
    r1 = rng.random()
    r2 = rng.random()
    if r1 + r2 > 1.0:
        r1, r2 = 1.0 - r1, 1.0 - r2
    r3 = 1.0 - r1 - r2
    return r1 * v1 + r2 * v2 + r3 * v3, (r1, r2, r3)


def largest_remainder(weights, total: int) -> np.ndarray:
    """Integer apportionment of `total` proportional to `weights`.

    Floors the quotas, then hands the leftover units to the largest
    fractional parts (ties broken by index), so the result always sums to
    `total` exactly.
    """
    w = np.asarray(weights, dtype=np.float64)
    quota = w / w.sum() * total
    counts = np.floor(quota).astype(np.int64)
    leftover = int(total - counts.sum())
    if leftover > 0:
        frac = quota - counts
        order = np.lexsort((np.arange(len(w)), -frac))
        counts[order[:leftover]] += 1
    elif leftover < 0:
        # Float round-off pushed a quota past its floor; trim from the
        # smallest fractional parts that still have something to give.
        frac = quota - counts
        order = np.lexsort((np.arange(len(w)), frac))
        for idx in order:
            if leftover == 0:
                break
            if counts[idx] > 0:
                counts[idx] -= 1
                leftover += 1
    return counts


def _triangle_areas(world_vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    a = world_vertices[triangles[:, 0]]
    b = world_vertices[triangles[:, 1]]
    c = world_vertices[triangles[:, 2]]
    return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)


def exclude_ground(meshes: list[TriangleMesh], patterns=DEFAULT_GROUND_PATTERNS) -> list[TriangleMesh]:
    """Drop meshes whose node name contains any pattern (case-insensitive)."""
    lowered = [p.lower() for p in patterns]
    return [m for m in meshes if not any(p in m.node_name.lower() for p in lowered)]


def sample_scene(
    meshes: list[TriangleMesh],
    config: SamplerConfig = SamplerConfig(),
    *,
    scene_id: str = "",
) -> PointCloud:
    """Sample a whole scene into an (n_points, 6) xyz+rgb cloud."""
    survivors = exclude_ground(meshes, config.ground_exclude_patterns)
    if not survivors:
        raise GeometryError("EMPTY_SCENE", "every mesh was excluded")

    per_mesh_areas = []
    for mesh in survivors:
        per_mesh_areas.append(_triangle_areas(mesh.world_vertices(), mesh.triangles))
    areas = np.concatenate(per_mesh_areas) if per_mesh_areas else np.zeros(0)
    if areas.size == 0 or areas.sum() <= 0.0:
        raise GeometryError("ZERO_AREA", "scene has no sampleable surface")

    counts = largest_remainder(areas, config.n_points)
    rng = np.random.default_rng(config.seed)
    r = rng.random((config.n_points, 2))
    oob = r.sum(axis=1) > 1.0
    r[oob] = 1.0 - r[oob]
    r1 = r[:, 0:1]
    r2 = r[:, 1:2]
    r3 = 1.0 - r1 - r2

    points = np.empty((config.n_points, 6), dtype=np.float64)
    cursor = 0  # sample rows written so far
    tri_cursor = 0  # triangles consumed from the flat counts array
    for mesh_index, mesh in enumerate(survivors):
        tri_count = len(mesh.triangles)
        mesh_counts = counts[tri_cursor : tri_cursor + tri_count]
        tri_cursor += tri_count
        n = int(mesh_counts.sum())
        if n == 0:
            continue
        sl = slice(cursor, cursor + n)
        cursor += n

        tris = mesh.triangles
        a = np.repeat(mesh.vertices[tris[:, 0]], mesh_counts, axis=0)
        b = np.repeat(mesh.vertices[tris[:, 1]], mesh_counts, axis=0)
        c = np.repeat(mesh.vertices[tris[:, 2]], mesh_counts, axis=0)
        local = r1[sl] * a + r2[sl] * b + r3[sl] * c
        m = mesh.world_transform
        points[sl, 0:3] = local @ m[:3, :3].T + m[:3, 3]
        points[sl, 3:6] = _colors(mesh, tris, mesh_counts, r1[sl], r2[sl], r3[sl])

    return PointCloud(scene_id=scene_id, points=points)


def _colors(
    mesh: TriangleMesh,
    tris: np.ndarray,
    mesh_counts: np.ndarray,
    r1: np.ndarray,
    r2: np.ndarray,
    r3: np.ndarray,
) -> np.ndarray:
    texture = mesh.material.base_color_texture
    n = int(mesh_counts.sum())
    if texture is None or mesh.uvs is None:
        return np.broadcast_to(
            np.asarray(mesh.material.base_color_factor[:3], dtype=np.float64), (n, 3)
        ).copy()

    ua = np.repeat(mesh.uvs[tris[:, 0]], mesh_counts, axis=0)
    ub = np.repeat(mesh.uvs[tris[:, 1]], mesh_counts, axis=0)
    uc = np.repeat(mesh.uvs[tris[:, 2]], mesh_counts, axis=0)
    uv = r1 * ua + r2 * ub + r3 * uc
    uv = uv - np.floor(uv)  # repeat wrap
    height, width = texture.shape[:2]
    col = np.clip((uv[:, 0] * width).astype(np.int64), 0, width - 1)
    row = np.clip((uv[:, 1] * height).astype(np.int64), 0, height - 1)
    return texture[row, col, :3].astype(np.float64) / 255.0

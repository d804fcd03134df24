"""glTF 2.0 binary (`.glb`) parser reduced to what surface sampling needs.

Parses the two-chunk container, walks the node hierarchy composing TRS or
matrix transforms, and flattens every triangle primitive into a
`TriangleMesh` carrying its node name/path, world transform, optional UVs,
and base-color material (embedded PNG/JPEG texture decoded to RGBA, else the
base color factor). Input must be pre-triangulated; any other primitive mode
is rejected rather than silently skipped.
"""
from __future__ import annotations

import io
import json
import struct
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from PIL import Image

GLB_MAGIC = 0x46546C67  # 'glTF'
CHUNK_JSON = 0x4E4F534A  # 'JSON'
CHUNK_BIN = 0x004E4942  # 'BIN\0'

_MODE_TRIANGLES = 4

_COMPONENT_DTYPES = {
    5120: np.int8,
    5121: np.uint8,
    5122: np.int16,
    5123: np.uint16,
    5125: np.uint32,
    5126: np.float32,
}
_COMPONENT_NORM_SCALE = {5121: 255.0, 5123: 65535.0}
_TYPE_COMPONENTS = {"SCALAR": 1, "VEC2": 2, "VEC3": 3, "VEC4": 4, "MAT4": 16}


class GeometryError(Exception):
    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Material:
    base_color_factor: tuple[float, float, float, float] = (1.0, 1.0, 1.0, 1.0)
    base_color_texture: np.ndarray | None = None  # (H, W, 4) uint8 RGBA


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    vertices: np.ndarray  # (n, 3) float64, node-local
    triangles: np.ndarray  # (m, 3) int64 vertex indices
    uvs: np.ndarray | None  # (n, 2) float64 or None
    material: Material
    node_name: str
    node_path: str  # slash-joined names from the scene root
    world_transform: np.ndarray = field(default_factory=lambda: np.eye(4))

    def __post_init__(self) -> None:
        if self.triangles.size and int(self.triangles.max()) >= len(self.vertices):
            raise GeometryError(
                "MALFORMED_CHUNK",
                f"triangle index {int(self.triangles.max())} out of range for "
                f"{len(self.vertices)} vertices",
            )

    def world_vertices(self) -> np.ndarray:
        m = self.world_transform
        return self.vertices @ m[:3, :3].T + m[:3, 3]


def _split_chunks(data: bytes) -> tuple[dict, bytes]:
    if len(data) < 12:
        raise GeometryError("MALFORMED_CHUNK", "shorter than the 12-byte header")
    magic, version, total = struct.unpack_from("<III", data, 0)
    if magic != GLB_MAGIC:
        raise GeometryError("BAD_MAGIC", f"0x{magic:08X}")
    if version != 2:
        raise GeometryError("MALFORMED_CHUNK", f"unsupported container version {version}")
    if total > len(data):
        raise GeometryError("MALFORMED_CHUNK", "declared length exceeds the payload")

    chunks: list[tuple[int, bytes]] = []
    pos = 12
    while pos < total:
        if pos + 8 > total:
            raise GeometryError("MALFORMED_CHUNK", "truncated chunk header")
        length, kind = struct.unpack_from("<II", data, pos)
        pos += 8
        if pos + length > total:
            raise GeometryError("MALFORMED_CHUNK", "chunk runs past the container")
        chunks.append((kind, data[pos : pos + length]))
        pos += length

    if not chunks or chunks[0][0] != CHUNK_JSON:
        raise GeometryError("MALFORMED_CHUNK", "first chunk must be JSON")
    try:
        gltf = json.loads(chunks[0][1])
    except json.JSONDecodeError as exc:
        raise GeometryError("MALFORMED_CHUNK", f"JSON chunk: {exc}") from exc
    binary = b""
    for kind, payload in chunks[1:]:
        if kind == CHUNK_BIN:
            binary = payload
            break
    return gltf, binary


def _read_accessor(gltf: dict, binary: bytes, index: int) -> np.ndarray:
    acc = gltf["accessors"][index]
    if "bufferView" not in acc:
        # Sparse/zero-filled accessors are out of scope.
        raise GeometryError("MALFORMED_CHUNK", f"accessor {index} has no bufferView")
    view = gltf["bufferViews"][acc["bufferView"]]
    base = np.dtype(_COMPONENT_DTYPES[acc["componentType"]]).newbyteorder("<")
    ncomp = _TYPE_COMPONENTS[acc["type"]]
    count = acc["count"]
    item = base.itemsize * ncomp
    stride = view.get("byteStride") or item
    start = view.get("byteOffset", 0) + acc.get("byteOffset", 0)
    end = start + stride * (count - 1) + item if count else start
    if end > len(binary):
        raise GeometryError("MALFORMED_CHUNK", f"accessor {index} overruns the binary chunk")

    if stride == item:
        out = np.frombuffer(binary, dtype=base, count=count * ncomp, offset=start)
        out = out.reshape(count, ncomp)
    else:
        rows = [
            np.frombuffer(binary, dtype=base, count=ncomp, offset=start + i * stride)
            for i in range(count)
        ]
        out = np.stack(rows) if rows else np.empty((0, ncomp), dtype=base)

    if acc.get("normalized") and acc["componentType"] in _COMPONENT_NORM_SCALE:
        return out.astype(np.float64) / _COMPONENT_NORM_SCALE[acc["componentType"]]
    return out.astype(np.float64) if base.kind == "f" else out.astype(np.int64)


def _node_local_transform(node: dict) -> np.ndarray:
    if "matrix" in node:
        # glTF matrices are column-major.
        return np.array(node["matrix"], dtype=np.float64).reshape(4, 4).T
    m = np.eye(4)
    scale = node.get("scale")
    rotation = node.get("rotation")
    translation = node.get("translation")
    if scale is not None:
        m = m @ np.diag([scale[0], scale[1], scale[2], 1.0])
    if rotation is not None:
        m = _quat_matrix(rotation) @ m
    if translation is not None:
        t = np.eye(4)
        t[:3, 3] = translation
        m = t @ m
    return m


def _quat_matrix(q: list[float]) -> np.ndarray:
    x, y, z, w = q
    n = float(np.sqrt(x * x + y * y + z * z + w * w)) or 1.0
    x, y, z, w = x / n, y / n, z / n, w / n
    m = np.eye(4)
    m[:3, :3] = [
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ]
    return m


def _decode_image(gltf: dict, binary: bytes, image_index: int) -> np.ndarray | None:
    image = gltf["images"][image_index]
    if "bufferView" not in image:
        return None  # external URIs are out of scope
    view = gltf["bufferViews"][image["bufferView"]]
    start = view.get("byteOffset", 0)
    payload = binary[start : start + view["byteLength"]]
    with Image.open(io.BytesIO(payload)) as img:
        return np.asarray(img.convert("RGBA"), dtype=np.uint8)


def _material(gltf: dict, binary: bytes, index: int | None, texture_cache: dict) -> Material:
    if index is None:
        return Material()
    mat = gltf.get("materials", [])[index]
    pbr = mat.get("pbrMetallicRoughness", {})
    factor = tuple(pbr.get("baseColorFactor", (1.0, 1.0, 1.0, 1.0)))
    texture = None
    tex_info = pbr.get("baseColorTexture")
    if tex_info is not None:
        tex_index = tex_info["index"]
        if tex_index not in texture_cache:
            source = gltf["textures"][tex_index].get("source")
            texture_cache[tex_index] = (
                _decode_image(gltf, binary, source) if source is not None else None
            )
        texture = texture_cache[tex_index]
    return Material(base_color_factor=factor, base_color_texture=texture)


def parse_glb(data: bytes) -> list[TriangleMesh]:
    """Flatten a binary glTF scene into triangle meshes with world transforms."""
    gltf, binary = _split_chunks(data)
    nodes = gltf.get("nodes", [])
    meshes_json = gltf.get("meshes", [])
    texture_cache: dict[int, np.ndarray | None] = {}
    out: list[TriangleMesh] = []

    scene_index = gltf.get("scene", 0)
    scenes = gltf.get("scenes", [])
    roots = scenes[scene_index].get("nodes", []) if scenes else list(range(len(nodes)))

    # (node index, parent world transform, parent path)
    queue: deque[tuple[int, np.ndarray, str]] = deque(
        (root, np.eye(4), "") for root in roots
    )
    while queue:
        node_index, parent, parent_path = queue.popleft()
        node = nodes[node_index]
        name = node.get("name", f"node_{node_index}")
        world = parent @ _node_local_transform(node)
        path = f"{parent_path}/{name}" if parent_path else name
        if "mesh" in node:
            for primitive in meshes_json[node["mesh"]].get("primitives", []):
                out.append(_primitive_mesh(gltf, binary, primitive, name, path, world, texture_cache))
        for child in node.get("children", []):
            queue.append((child, world, path))
    return out


def _primitive_mesh(
    gltf: dict,
    binary: bytes,
    primitive: dict,
    name: str,
    path: str,
    world: np.ndarray,
    texture_cache: dict,
) -> TriangleMesh:
    mode = primitive.get("mode", _MODE_TRIANGLES)
    if mode != _MODE_TRIANGLES:
        raise GeometryError("UNSUPPORTED_PRIMITIVE_MODE", f"mode {mode} on node {name!r}")
    attributes = primitive.get("attributes", {})
    if "POSITION" not in attributes:
        raise GeometryError("MISSING_POSITION", f"primitive on node {name!r}")
    vertices = _read_accessor(gltf, binary, attributes["POSITION"]).astype(np.float64)
    if "indices" in primitive:
        indices = _read_accessor(gltf, binary, primitive["indices"]).reshape(-1)
    else:
        indices = np.arange(len(vertices), dtype=np.int64)
    if len(indices) % 3:
        raise GeometryError("MALFORMED_CHUNK", f"index count {len(indices)} is not a triangle multiple")
    uvs = None
    if "TEXCOORD_0" in attributes:
        uvs = _read_accessor(gltf, binary, attributes["TEXCOORD_0"]).astype(np.float64)
    material = _material(gltf, binary, primitive.get("material"), texture_cache)
    return TriangleMesh(
        vertices=vertices,
        triangles=indices.reshape(-1, 3).astype(np.int64),
        uvs=uvs,
        material=material,
        node_name=name,
        node_path=path,
        world_transform=world,
    )


def isolate_object(meshes: list[TriangleMesh], scene_object) -> list[TriangleMesh]:
    """Meshes under the node (sub)path named by the object.

    A mesh matches when the object's node_path equals its full slash path or
    any single segment of it, so `"lamp"` selects the lamp subtree wherever
    it hangs in the hierarchy.
    """
    target = scene_object.node_path
    matched = [
        mesh
        for mesh in meshes
        if mesh.node_path == target or target in mesh.node_path.split("/")
    ]
    if not matched:
        raise GeometryError("OBJECT_NOT_FOUND", target)
    return matched

"""Test-side builders for binary fixtures.

These assemble GLB containers, WAV and WebM audio byte-for-byte from their
container layouts, independent of the production parsers, so the parsers are
checked against a second implementation rather than against themselves.
"""
from __future__ import annotations

import io
import json
import struct
import wave

import numpy as np
from PIL import Image

GLB_MAGIC = 0x46546C67
CHUNK_JSON = 0x4E4F534A
CHUNK_BIN = 0x004E4942


def _pad(data: bytes, align: int, filler: bytes) -> bytes:
    remainder = len(data) % align
    if remainder:
        data += filler * (align - remainder)
    return data


class GlbBuilder:
    """Assemble a minimal, valid binary glTF scene."""

    def __init__(self):
        self.binary = bytearray()
        self.buffer_views: list[dict] = []
        self.accessors: list[dict] = []
        self.meshes: list[dict] = []
        self.nodes: list[dict] = []
        self.materials: list[dict] = []
        self.images: list[dict] = []
        self.textures: list[dict] = []
        self.roots: list[int] = []

    def _add_view(self, data: bytes, byte_stride: int | None = None) -> int:
        while len(self.binary) % 4:
            self.binary.append(0)
        view = {"buffer": 0, "byteOffset": len(self.binary), "byteLength": len(data)}
        if byte_stride is not None:
            view["byteStride"] = byte_stride
        self.binary.extend(data)
        self.buffer_views.append(view)
        return len(self.buffer_views) - 1

    def _add_accessor(self, array: np.ndarray, component_type: int, type_str: str) -> int:
        view = self._add_view(array.tobytes(order="C"))
        self.accessors.append(
            {
                "bufferView": view,
                "componentType": component_type,
                "count": int(array.shape[0]),
                "type": type_str,
            }
        )
        return len(self.accessors) - 1

    def add_png_texture(self, rgba: np.ndarray) -> int:
        """Embed an RGBA uint8 image as a PNG texture; returns texture index."""
        buf = io.BytesIO()
        Image.fromarray(rgba, mode="RGBA").save(buf, format="PNG")
        view = self._add_view(buf.getvalue())
        self.images.append({"bufferView": view, "mimeType": "image/png"})
        self.textures.append({"source": len(self.images) - 1})
        return len(self.textures) - 1

    def add_material(
        self,
        base_color_factor: tuple[float, float, float, float] | None = None,
        texture: int | None = None,
    ) -> int:
        pbr: dict = {}
        if base_color_factor is not None:
            pbr["baseColorFactor"] = list(base_color_factor)
        if texture is not None:
            pbr["baseColorTexture"] = {"index": texture}
        self.materials.append({"pbrMetallicRoughness": pbr})
        return len(self.materials) - 1

    def add_mesh(
        self,
        positions,
        indices=None,
        uvs=None,
        material: int | None = None,
        mode: int | None = None,
    ) -> int:
        positions = np.asarray(positions, dtype="<f4")
        attributes = {"POSITION": self._add_accessor(positions, 5126, "VEC3")}
        if uvs is not None:
            attributes["TEXCOORD_0"] = self._add_accessor(np.asarray(uvs, dtype="<f4"), 5126, "VEC2")
        primitive: dict = {"attributes": attributes}
        if indices is not None:
            flat = np.asarray(indices, dtype="<u2").reshape(-1, 1)
            primitive["indices"] = self._add_accessor(flat, 5123, "SCALAR")
        if material is not None:
            primitive["material"] = material
        if mode is not None:
            primitive["mode"] = mode
        self.meshes.append({"primitives": [primitive]})
        return len(self.meshes) - 1

    def add_node(
        self,
        name: str,
        mesh: int | None = None,
        children: list[int] | None = None,
        translation=None,
        rotation=None,
        scale=None,
        matrix=None,
        root: bool = True,
    ) -> int:
        node: dict = {"name": name}
        if mesh is not None:
            node["mesh"] = mesh
        if children:
            node["children"] = list(children)
        if translation is not None:
            node["translation"] = list(translation)
        if rotation is not None:
            node["rotation"] = list(rotation)
        if scale is not None:
            node["scale"] = list(scale)
        if matrix is not None:
            node["matrix"] = list(matrix)
        self.nodes.append(node)
        index = len(self.nodes) - 1
        if root:
            self.roots.append(index)
        return index

    def build(self) -> bytes:
        binary = _pad(bytes(self.binary), 4, b"\x00")
        doc = {
            "asset": {"version": "2.0"},
            "scene": 0,
            "scenes": [{"nodes": self.roots}],
            "nodes": self.nodes,
            "meshes": self.meshes,
            "accessors": self.accessors,
            "bufferViews": self.buffer_views,
            "buffers": [{"byteLength": len(binary)}],
        }
        if self.materials:
            doc["materials"] = self.materials
        if self.images:
            doc["images"] = self.images
            doc["textures"] = self.textures
        json_chunk = _pad(json.dumps(doc, separators=(",", ":")).encode("utf-8"), 4, b" ")
        total = 12 + 8 + len(json_chunk) + 8 + len(binary)
        out = struct.pack("<III", GLB_MAGIC, 2, total)
        out += struct.pack("<II", len(json_chunk), CHUNK_JSON) + json_chunk
        out += struct.pack("<II", len(binary), CHUNK_BIN) + binary
        return out


def single_triangle_glb(
    name: str = "tri",
    positions=((0, 0, 0), (1, 0, 0), (0, 1, 0)),
    base_color=(1.0, 1.0, 1.0, 1.0),
    translation=None,
) -> bytes:
    b = GlbBuilder()
    material = b.add_material(base_color_factor=base_color)
    mesh = b.add_mesh(positions, indices=[0, 1, 2], material=material)
    b.add_node(name, mesh=mesh, translation=translation)
    return b.build()


def build_wav(duration_s: float, rate: int = 16000) -> bytes:
    """Mono 16-bit silence of the requested length."""
    buf = io.BytesIO()
    with wave.open(buf, "wb") as wf:
        wf.setnchannels(1)
        wf.setsampwidth(2)
        wf.setframerate(rate)
        wf.writeframes(b"\x00\x00" * round(duration_s * rate))
    return buf.getvalue()


def _ebml_size(value: int) -> bytes:
    for length in range(1, 9):
        if value < (1 << (7 * length)) - 1:
            return (value | (1 << (7 * length))).to_bytes(length, "big")
    raise ValueError("size too large")


def _ebml_element(element_id: int, payload: bytes) -> bytes:
    id_bytes = element_id.to_bytes((element_id.bit_length() + 7) // 8, "big")
    return id_bytes + _ebml_size(len(payload)) + payload


def build_webm(duration_s: float, timecode_scale_ns: int = 1_000_000) -> bytes:
    """A WebM skeleton carrying just enough metadata to state its duration."""
    ticks = duration_s * 1e9 / timecode_scale_ns
    info = _ebml_element(
        0x1549A966,
        _ebml_element(0x2AD7B1, timecode_scale_ns.to_bytes(4, "big"))
        + _ebml_element(0x4489, struct.pack(">d", ticks)),
    )
    header = _ebml_element(0x1A45DFA3, _ebml_element(0x4282, b"webm"))
    return header + _ebml_element(0x18538067, info)


def tiny_png(color=(200, 30, 30, 255), size=(4, 4)) -> bytes:
    arr = np.zeros((size[1], size[0], 4), dtype=np.uint8)
    arr[:, :] = color
    buf = io.BytesIO()
    Image.fromarray(arr, mode="RGBA").save(buf, format="PNG")
    return buf.getvalue()

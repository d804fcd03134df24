import struct

import numpy as np
import pytest

from pointscribe.geometry import GeometryError, isolate_object, parse_glb
from pointscribe.model import SceneObject

from helpers import GlbBuilder, single_triangle_glb


def quad_scene(texture=True) -> bytes:
    b = GlbBuilder()
    tex = b.add_png_texture(np.full((2, 2, 4), 255, dtype=np.uint8)) if texture else None
    material = b.add_material(base_color_factor=(1, 1, 1, 1), texture=tex)
    mesh = b.add_mesh(
        positions=[(0, 0, 0), (1, 0, 0), (1, 1, 0), (0, 1, 0)],
        indices=[0, 1, 2, 0, 2, 3],
        uvs=[(0, 0), (1, 0), (1, 1), (0, 1)] if texture else None,
        material=material,
    )
    b.add_node("quad", mesh=mesh)
    return b.build()


def lamp_scene() -> bytes:
    """room root with a lamp child and a ground sibling."""
    b = GlbBuilder()
    lamp_mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], indices=[0, 1, 2])
    ground_mesh = b.add_mesh([(0, 0, 0), (9, 0, 0), (0, 9, 0)], indices=[0, 1, 2])
    lamp = b.add_node("lamp", mesh=lamp_mesh, translation=(0, 0, 2), root=False)
    ground = b.add_node("ground_plane", mesh=ground_mesh, root=False)
    b.add_node("room", children=[lamp, ground])
    return b.build()


class TestParse:
    def test_textured_quad(self):
        meshes = parse_glb(quad_scene())
        assert len(meshes) == 1
        mesh = meshes[0]
        assert mesh.triangles.shape == (2, 3)
        assert mesh.uvs is not None and mesh.uvs.shape == (4, 2)
        assert mesh.material.base_color_texture is not None
        assert mesh.material.base_color_texture.shape == (2, 2, 4)
        assert mesh.node_name == "quad"

    def test_bad_magic(self):
        data = bytearray(quad_scene())
        data[0] ^= 0xFF
        with pytest.raises(GeometryError) as e:
            parse_glb(bytes(data))
        assert e.value.code == "BAD_MAGIC"

    def test_wrong_version(self):
        data = bytearray(quad_scene())
        struct.pack_into("<I", data, 4, 3)
        with pytest.raises(GeometryError) as e:
            parse_glb(bytes(data))
        assert e.value.code == "MALFORMED_CHUNK"

    def test_truncated_container(self):
        with pytest.raises(GeometryError) as e:
            parse_glb(quad_scene()[:30])
        assert e.value.code == "MALFORMED_CHUNK"

    def test_translation_applies_to_world(self):
        data = single_triangle_glb(translation=(1, 0, 0))
        mesh = parse_glb(data)[0]
        world = mesh.world_vertices()
        np.testing.assert_allclose(world[0], [1, 0, 0], atol=1e-12)
        # node-local coordinates stay untouched
        np.testing.assert_allclose(mesh.vertices[0], [0, 0, 0], atol=1e-12)

    def test_nested_transforms_compose(self):
        b = GlbBuilder()
        mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], indices=[0, 1, 2])
        child = b.add_node("leaf", mesh=mesh, translation=(0, 1, 0), root=False)
        b.add_node("root", children=[child], translation=(2, 0, 0), scale=(1, 3, 1))
        world = parse_glb(b.build())[0].world_vertices()
        # (0,0,0) -> child (0,1,0) -> root scale (0,3,0) -> root translate (2,3,0)
        np.testing.assert_allclose(world[0], [2, 3, 0], atol=1e-12)

    def test_matrix_node_column_major(self):
        # column-major glTF matrix encoding a translation by (5, 6, 7)
        matrix = [1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 5, 6, 7, 1]
        b = GlbBuilder()
        mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], indices=[0, 1, 2])
        b.add_node("m", mesh=mesh, matrix=matrix)
        world = parse_glb(b.build())[0].world_vertices()
        np.testing.assert_allclose(world[0], [5, 6, 7], atol=1e-12)

    def test_rotation_quaternion(self):
        # 90° about Z: (x,y,z) -> (-y,x,z)
        half = np.sqrt(0.5)
        b = GlbBuilder()
        mesh = b.add_mesh([(1, 0, 0), (0, 1, 0), (0, 0, 1)], indices=[0, 1, 2])
        b.add_node("r", mesh=mesh, rotation=(0, 0, half, half))
        world = parse_glb(b.build())[0].world_vertices()
        np.testing.assert_allclose(world[0], [0, 1, 0], atol=1e-12)

    def test_non_triangle_mode_rejected(self):
        b = GlbBuilder()
        mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], indices=[0, 1, 2], mode=1)
        b.add_node("lines", mesh=mesh)
        with pytest.raises(GeometryError) as e:
            parse_glb(b.build())
        assert e.value.code == "UNSUPPORTED_PRIMITIVE_MODE"

    def test_missing_position_rejected(self):
        data = quad_scene()
        broken = data.replace(b'"POSITION"', b'"POSITIOX"')
        with pytest.raises(GeometryError) as e:
            parse_glb(broken)
        assert e.value.code == "MISSING_POSITION"

    def test_untextured_material_keeps_factor(self):
        data = single_triangle_glb(base_color=(0.5, 0.25, 0.125, 1.0))
        mesh = parse_glb(data)[0]
        assert mesh.material.base_color_texture is None
        assert mesh.material.base_color_factor == (0.5, 0.25, 0.125, 1.0)

    def test_unindexed_primitive(self):
        b = GlbBuilder()
        mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)])
        b.add_node("bare", mesh=mesh)
        parsed = parse_glb(b.build())[0]
        np.testing.assert_array_equal(parsed.triangles, [[0, 1, 2]])


class TestIsolate:
    def test_lamp_path(self):
        meshes = parse_glb(lamp_scene())
        assert len(meshes) == 2
        lamp = SceneObject(object_id="o1", name="lamp", node_path="lamp")
        picked = isolate_object(meshes, lamp)
        assert len(picked) == 1
        assert picked[0].node_path == "room/lamp"
        # the lamp node's translation is part of its world transform
        np.testing.assert_allclose(picked[0].world_vertices()[0], [0, 0, 2], atol=1e-12)

    def test_full_path_match(self):
        meshes = parse_glb(lamp_scene())
        obj = SceneObject(object_id="o1", name="lamp", node_path="room/lamp")
        assert len(isolate_object(meshes, obj)) == 1

    def test_missing_object(self):
        meshes = parse_glb(lamp_scene())
        ghost = SceneObject(object_id="o2", name="sofa", node_path="sofa")
        with pytest.raises(GeometryError) as e:
            isolate_object(meshes, ghost)
        assert e.value.code == "OBJECT_NOT_FOUND"

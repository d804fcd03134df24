import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointscribe.geometry import (
    GeometryError,
    Material,
    SamplerConfig,
    TriangleMesh,
    exclude_ground,
    isolate_object,
    largest_remainder,
    parse_glb,
    sample_point_on_triangle,
    sample_scene,
)
from pointscribe.model import SceneObject

from helpers import GlbBuilder


class FixedRng:
    """Deterministic stand-in feeding predetermined r1, r2 draws."""

    def __init__(self, values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def tri_mesh(vertices, name="tri", transform=None, color=(1.0, 1.0, 1.0, 1.0), uvs=None, texture=None):
    return TriangleMesh(
        vertices=np.asarray(vertices, dtype=np.float64),
        triangles=np.array([[0, 1, 2]], dtype=np.int64),
        uvs=None if uvs is None else np.asarray(uvs, dtype=np.float64),
        material=Material(base_color_factor=color, base_color_texture=texture),
        node_name=name,
        node_path=name,
        world_transform=np.eye(4) if transform is None else np.asarray(transform, dtype=np.float64),
    )


V1, V2, V3 = (0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)


class TestSamplePointOnTriangle:
    def test_vertex_case(self):
        p, weights = sample_point_on_triangle(V1, V2, V3, FixedRng([1.0, 0.0]))
        np.testing.assert_array_equal(p, V1)
        assert weights == (1.0, 0.0, 0.0)

    def test_fold_boundary(self):
        p, weights = sample_point_on_triangle(V1, V2, V3, FixedRng([1.0, 1.0]))
        np.testing.assert_array_equal(p, V3)
        assert weights == (0.0, 0.0, 1.0)

    def test_fold_keeps_weights_valid(self):
        _, (r1, r2, r3) = sample_point_on_triangle(V1, V2, V3, FixedRng([0.9, 0.8]))
        assert r1 == pytest.approx(0.1)
        assert r2 == pytest.approx(0.2)
        assert r3 == pytest.approx(0.7)

    def test_mean_converges_to_centroid(self):
        rng = np.random.default_rng(7)
        total = np.zeros(3)
        n = 100_000
        for _ in range(n):
            p, _ = sample_point_on_triangle(V1, V2, V3, rng)
            total += p
        mean = total / n
        np.testing.assert_allclose(mean, [1 / 3, 1 / 3, 0.0], atol=0.01)

    @settings(max_examples=200)
    @given(
        st.floats(0, 1, allow_nan=False, exclude_max=True),
        st.floats(0, 1, allow_nan=False, exclude_max=True),
    )
    def test_weights_always_barycentric(self, a, b):
        # r3 = 1-r1-r2 can undershoot zero by one ulp when the exact sum
        # r1+r2 is above 1 by less than float rounding resolves, so the
        # lower bound is -2^-53 rather than 0.
        p, (r1, r2, r3) = sample_point_on_triangle(V1, V2, V3, FixedRng([a, b]))
        ulp = 2.0**-53
        assert 0.0 <= r1 <= 1.0 and 0.0 <= r2 <= 1.0
        assert -ulp <= r3 <= 1.0
        assert r1 + r2 + r3 == pytest.approx(1.0)
        # position lands inside the triangle (to the same one-ulp slack)
        assert p[0] >= 0 and p[1] >= 0 and p[0] + p[1] <= 1.0 + ulp


class TestLargestRemainder:
    def test_one_to_three_split(self):
        counts = largest_remainder([1.0, 3.0], 8192)
        assert counts.tolist() == [2048, 6144]

    def test_fractional_quotas(self):
        counts = largest_remainder([1.0, 1.0, 1.0], 100)
        assert counts.sum() == 100
        assert sorted(counts.tolist()) == [33, 33, 34]

    @settings(max_examples=200)
    @given(
        st.lists(st.floats(min_value=1e-6, max_value=1e6), min_size=1, max_size=40),
        st.integers(min_value=0, max_value=10000),
    )
    def test_sums_exactly_and_stays_near_quota(self, weights, total):
        counts = largest_remainder(weights, total)
        assert counts.sum() == total
        assert (counts >= 0).all()
        quota = np.asarray(weights) / np.sum(weights) * total
        assert np.all(np.abs(counts - quota) <= 1.0 + 1e-9)


class TestExcludeGround:
    def test_patterns_case_insensitive(self):
        meshes = [
            tri_mesh((V1, V2, V3), name="Ground_01"),
            tri_mesh((V1, V2, V3), name="the FLOOR"),
            tri_mesh((V1, V2, V3), name="GroundPlane"),
            tri_mesh((V1, V2, V3), name="lamp"),
        ]
        kept = exclude_ground(meshes)
        assert [m.node_name for m in kept] == ["lamp"]

    def test_custom_patterns(self):
        meshes = [tri_mesh((V1, V2, V3), name="sky"), tri_mesh((V1, V2, V3), name="lamp")]
        kept = exclude_ground(meshes, patterns=("sky",))
        assert [m.node_name for m in kept] == ["lamp"]


class TestSampleScene:
    def test_exact_default_count(self):
        cloud = sample_scene([tri_mesh((V1, V2, V3))], scene_id="s")
        assert cloud.points.shape == (8192, 6)
        assert cloud.n == 8192

    def test_white_triangle_all_white(self):
        cloud = sample_scene([tri_mesh((V1, V2, V3))], SamplerConfig(n_points=256))
        np.testing.assert_array_equal(cloud.points[:, 3:6], np.ones((256, 3)))

    def test_area_proportional_counts(self):
        small = tri_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], name="a")
        large = tri_mesh([(0, 0, 5), (3, 0, 5), (0, 1, 5)], name="b")
        cloud = sample_scene([small, large], SamplerConfig(n_points=8192))
        from_large = int((cloud.points[:, 2] > 2.5).sum())
        assert abs(from_large - 6144) <= 1
        assert abs((8192 - from_large) - 2048) <= 1

    def test_samples_inside_triangle(self):
        cloud = sample_scene([tri_mesh((V1, V2, V3))], SamplerConfig(n_points=2048))
        x, y, z = cloud.points[:, 0], cloud.points[:, 1], cloud.points[:, 2]
        assert (x >= 0).all() and (y >= 0).all()
        assert (x + y <= 1.0 + 1e-12).all()
        assert (z == 0).all()

    def test_deterministic_for_seed(self):
        meshes = [tri_mesh((V1, V2, V3))]
        a = sample_scene(meshes, SamplerConfig(n_points=512, seed=42))
        b = sample_scene(meshes, SamplerConfig(n_points=512, seed=42))
        c = sample_scene(meshes, SamplerConfig(n_points=512, seed=43))
        assert a.points.tobytes() == b.points.tobytes()
        assert a.points.tobytes() != c.points.tobytes()

    def test_world_transform_covariance(self):
        # axis permutation (x,y,z) -> (z,x,y) plus an integer translation:
        # areas are preserved exactly, so the transformed cloud must be the
        # transformed base cloud, bit for bit.
        verts = [(0, 0, 0), (2, 0, 0), (0, 3, 0)]
        perm = np.array([[0, 0, 1], [1, 0, 0], [0, 1, 0]], dtype=np.float64)
        t = np.array([10.0, -3.0, 7.0])
        m = np.eye(4)
        m[:3, :3] = perm
        m[:3, 3] = t
        config = SamplerConfig(n_points=1024, seed=5)
        base = sample_scene([tri_mesh(verts)], config)
        moved = sample_scene([tri_mesh(verts, transform=m)], config)
        expected = base.points[:, :3] @ perm.T + t
        np.testing.assert_array_equal(moved.points[:, :3], expected)
        np.testing.assert_array_equal(moved.points[:, 3:], base.points[:, 3:])

    def test_ground_excluded_from_sampling(self):
        lamp = tri_mesh([(0, 0, 1), (1, 0, 1), (0, 1, 1)], name="lamp")
        ground = tri_mesh([(0, 0, 0), (50, 0, 0), (0, 50, 0)], name="ground")
        cloud = sample_scene([lamp, ground], SamplerConfig(n_points=128))
        assert (cloud.points[:, 2] == 1.0).all()

    def test_all_excluded_raises(self):
        ground = tri_mesh((V1, V2, V3), name="floor")
        with pytest.raises(GeometryError) as e:
            sample_scene([ground])
        assert e.value.code == "EMPTY_SCENE"

    def test_degenerate_scene_raises(self):
        flat = tri_mesh([(0, 0, 0), (1, 1, 1), (2, 2, 2)])
        with pytest.raises(GeometryError) as e:
            sample_scene([flat])
        assert e.value.code == "ZERO_AREA"

    def test_solid_texture_color(self):
        texture = np.zeros((2, 2, 4), dtype=np.uint8)
        texture[:, :] = (10, 200, 30, 255)
        mesh = tri_mesh(
            (V1, V2, V3),
            uvs=[(0, 0), (1, 0), (0, 1)],
            texture=texture,
        )
        cloud = sample_scene([mesh], SamplerConfig(n_points=64))
        expected = np.array([10, 200, 30]) / 255.0
        np.testing.assert_allclose(cloud.points[:, 3:6], np.tile(expected, (64, 1)))

    def test_quadrant_texture_lookup(self):
        # texel grid: left half red, right half blue; uv.x decides the half
        texture = np.zeros((2, 2, 4), dtype=np.uint8)
        texture[:, 0] = (255, 0, 0, 255)
        texture[:, 1] = (0, 0, 255, 255)
        mesh = tri_mesh(
            [(0, 0, 0), (1, 0, 0), (0, 1, 0)],
            uvs=[(0, 0), (1, 0), (0, 0)],
            texture=texture,
        )
        cloud = sample_scene([mesh], SamplerConfig(n_points=512, seed=1))
        reds = cloud.points[:, 3] == 1.0
        blues = cloud.points[:, 5] == 1.0
        assert (reds | blues).all()
        assert reds.any() and blues.any()
        # x < 0.5 means uv.x < 0.5 -> red texel on this parameterization
        np.testing.assert_array_equal(reds, cloud.points[:, 0] < 0.5)

    def test_uv_repeat_wrap(self):
        texture = np.zeros((1, 2, 4), dtype=np.uint8)
        texture[0, 0] = (255, 0, 0, 255)
        texture[0, 1] = (0, 255, 0, 255)
        mesh = tri_mesh(
            (V1, V2, V3),
            uvs=[(2.0, 0), (3.0, 0), (2.0, 1)],  # same as [(0,0),(1,0),(0,1)] after wrap
            texture=texture,
        )
        cloud = sample_scene([mesh], SamplerConfig(n_points=128, seed=3))
        rgb = cloud.points[:, 3:6]
        assert set(map(tuple, rgb)) <= {(1.0, 0.0, 0.0), (0.0, 1.0, 0.0)}

    def test_isolate_then_sample(self):
        b = GlbBuilder()
        lamp_mesh = b.add_mesh([(0, 0, 0), (1, 0, 0), (0, 1, 0)], indices=[0, 1, 2])
        table_mesh = b.add_mesh([(0, 0, 9), (2, 0, 9), (0, 2, 9)], indices=[0, 1, 2])
        lamp = b.add_node("lamp", mesh=lamp_mesh, root=False)
        table = b.add_node("table", mesh=table_mesh, root=False)
        b.add_node("room", children=[lamp, table])
        meshes = parse_glb(b.build())
        obj = SceneObject(object_id="o1", name="lamp", node_path="lamp")
        cloud = sample_scene(isolate_object(meshes, obj), SamplerConfig(n_points=1024))
        assert cloud.points.shape == (1024, 6)
        assert (cloud.points[:, 2] == 0.0).all()

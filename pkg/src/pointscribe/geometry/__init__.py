"""Scene geometry: GLB parsing, surface sampling, and `.npy` packaging."""
from .glb import GeometryError, Material, TriangleMesh, isolate_object, parse_glb
from .npyio import npy_bytes, read_npy, write_npy
from .sampling import (
    DEFAULT_GROUND_PATTERNS,
    SamplerConfig,
    exclude_ground,
    largest_remainder,
    sample_point_on_triangle,
    sample_scene,
)

__all__ = [
    "DEFAULT_GROUND_PATTERNS",
    "GeometryError",
    "Material",
    "SamplerConfig",
    "TriangleMesh",
    "exclude_ground",
    "isolate_object",
    "largest_remainder",
    "npy_bytes",
    "parse_glb",
    "read_npy",
    "sample_point_on_triangle",
    "sample_scene",
    "write_npy",
]

from .core import TriangleMesh, ValidationIssue, ValidationReport, make_box, make_icosphere, validate
from .bvh import Bvh, RayHit, build_bvh
from .simplify import simplify_qem

__all__ = [
    "TriangleMesh",
    "ValidationIssue",
    "ValidationReport",
    "make_box",
    "make_icosphere",
    "validate",
    "Bvh",
    "RayHit",
    "build_bvh",
    "simplify_qem",
]

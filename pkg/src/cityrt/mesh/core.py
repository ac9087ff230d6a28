"""Triangle meshes: storage, validation, simple primitives.

Meshes are plain vertex/index arrays.  Surfaces are treated as two-sided
throughout the toolchain, so winding is not an invariant here; validation
cares about referential integrity and degenerate geometry instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import InputError

DEGENERATE_AREA = 1e-10  # m^2


@dataclass
class TriangleMesh:
    """Indexed triangle set; vertices in meters."""

    vertices: np.ndarray  # (n, 3) float64
    triangles: np.ndarray  # (m, 3) int64

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        self.triangles = np.ascontiguousarray(np.asarray(self.triangles, dtype=np.int64))
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise InputError(f"vertices must be (n, 3), got {self.vertices.shape}")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise InputError(f"triangles must be (m, 3), got {self.triangles.shape}")

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def n_triangles(self) -> int:
        return int(self.triangles.shape[0])

    def copy(self) -> "TriangleMesh":
        return TriangleMesh(self.vertices.copy(), self.triangles.copy())

    def translated(self, offset) -> "TriangleMesh":
        off = np.asarray(offset, dtype=np.float64).reshape(3)
        return TriangleMesh(self.vertices + off, self.triangles.copy())

    def triangle_areas(self) -> np.ndarray:
        v0 = self.vertices[self.triangles[:, 0]]
        e1 = self.vertices[self.triangles[:, 1]] - v0
        e2 = self.vertices[self.triangles[:, 2]] - v0
        return 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        if self.n_vertices == 0:
            z = np.zeros(3)
            return z, z
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TriangleMesh):
            return NotImplemented
        return (
            self.vertices.shape == other.vertices.shape
            and self.triangles.shape == other.triangles.shape
            and np.array_equal(self.vertices, other.vertices)
            and np.array_equal(self.triangles, other.triangles)
        )


@dataclass(frozen=True)
class ValidationIssue:
    kind: str  # nan-vertex | bad-index | degenerate | duplicate
    index: int  # vertex index for nan-vertex, triangle index otherwise
    detail: str = ""


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)
    mesh: TriangleMesh | None = None

    @property
    def ok(self) -> bool:
        return not self.issues

    def count(self, kind: str) -> int:
        return sum(1 for i in self.issues if i.kind == kind)


def validate(mesh: TriangleMesh, remove_degenerate: bool = False) -> ValidationReport:
    """Check referential integrity, NaN vertices, degenerate and duplicate
    triangles.  With remove_degenerate, the report's mesh has flagged
    triangles dropped (vertices untouched); otherwise it is the input.
    """
    report = ValidationReport(mesh=mesh)
    bad_tri = np.zeros(mesh.n_triangles, dtype=bool)

    nan_vertices = np.nonzero(~np.isfinite(mesh.vertices).all(axis=1))[0]
    for vi in nan_vertices:
        report.issues.append(ValidationIssue("nan-vertex", int(vi), "non-finite coordinate"))

    tris = mesh.triangles
    oob = (tris < 0) | (tris >= mesh.n_vertices)
    for ti in np.nonzero(oob.any(axis=1))[0]:
        report.issues.append(ValidationIssue("bad-index", int(ti), "vertex index out of range"))
        bad_tri[ti] = True

    # triangles touching a NaN vertex are unusable but reported via the vertex
    nanset = set(int(v) for v in nan_vertices)
    touches_nan = np.zeros(mesh.n_triangles, dtype=bool)
    if nanset:
        touches_nan = ~bad_tri & np.isin(tris, list(nanset)).any(axis=1)
        bad_tri |= touches_nan

    usable = ~bad_tri
    if usable.any():
        idx = np.nonzero(usable)[0]
        sub = tris[idx]
        v0 = mesh.vertices[sub[:, 0]]
        e1 = mesh.vertices[sub[:, 1]] - v0
        e2 = mesh.vertices[sub[:, 2]] - v0
        areas = 0.5 * np.linalg.norm(np.cross(e1, e2), axis=1)
        for k in np.nonzero(areas < DEGENERATE_AREA)[0]:
            ti = int(idx[k])
            report.issues.append(ValidationIssue("degenerate", ti, f"area {areas[k]:.3e} m^2"))
            bad_tri[ti] = True

    # duplicates among remaining triangles, orientation-insensitive
    usable = ~bad_tri
    if usable.any():
        idx = np.nonzero(usable)[0]
        key = np.sort(tris[idx], axis=1)
        _, first, counts = np.unique(key, axis=0, return_index=True, return_counts=True)
        if (counts > 1).any():
            seen = {}
            for k, ti in enumerate(idx):
                kk = tuple(key[k])
                if kk in seen:
                    report.issues.append(
                        ValidationIssue("duplicate", int(ti), f"same vertices as triangle {seen[kk]}")
                    )
                    bad_tri[ti] = True
                else:
                    seen[kk] = int(ti)

    if remove_degenerate:
        keep = ~bad_tri
        report.mesh = TriangleMesh(mesh.vertices.copy(), tris[keep])
    return report


def make_box(size=(1.0, 1.0, 1.0), origin=(0.0, 0.0, 0.0)) -> TriangleMesh:
    """Closed axis-aligned box, 12 triangles, min corner at origin."""
    sx, sy, sz = (float(s) for s in size)
    ox, oy, oz = (float(p) for p in origin)
    v = np.array(
        [
            [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
            [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
        ],
        dtype=np.float64,
    ) * [sx, sy, sz] + [ox, oy, oz]
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],  # south
            [2, 3, 7], [2, 7, 6],  # north
            [1, 2, 6], [1, 6, 5],  # east
            [3, 0, 4], [3, 4, 7],  # west
        ],
        dtype=np.int64,
    )
    return TriangleMesh(v, t)


def make_icosphere(subdivisions: int = 3, radius: float = 1.0) -> TriangleMesh:
    """Unit icosphere by midpoint subdivision: 20 * 4^k triangles."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
            [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
            [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
        ],
        dtype=np.float64,
    )
    verts /= np.linalg.norm(verts, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [tuple(v) for v in verts]
    for _ in range(subdivisions):
        cache: dict[tuple[int, int], int] = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = np.array(verts[i]) + np.array(verts[j])
                m /= np.linalg.norm(m)
                verts.append(tuple(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    v = np.array(verts, dtype=np.float64) * radius
    return TriangleMesh(v, np.array(faces, dtype=np.int64))

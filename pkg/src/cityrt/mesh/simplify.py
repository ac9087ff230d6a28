"""Quadric error metric edge-collapse simplification.

Classic Garland-Heckbert: per-vertex plane quadrics, a cost heap of edge
collapses with lazy invalidation, and the optimal-position solve with
midpoint/endpoint fallback when the quadric is singular.  Collapses that
would flip a surviving face, create a degenerate face, or merge across a
material boundary are rejected.
"""

from __future__ import annotations

import heapq

import numpy as np

from ..errors import DomainError
from .core import TriangleMesh

_MIN_TARGET = 4
_AREA_EPS = 1e-12


def _vertex_quadrics(vertices, triangles):
    n_v = vertices.shape[0]
    Q = np.zeros((n_v, 4, 4))
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    cr = np.cross(e1, e2)
    area2 = np.linalg.norm(cr, axis=1)
    ok = area2 > _AREA_EPS
    n = np.zeros_like(cr)
    n[ok] = cr[ok] / area2[ok, None]
    d = -np.einsum("ij,ij->i", n, v0)
    p = np.concatenate([n, d[:, None]], axis=1)  # plane (a, b, c, d)
    K = p[:, :, None] * p[:, None, :] * (0.5 * area2)[:, None, None]
    for c in range(3):
        np.add.at(Q, triangles[:, c], K)
    return Q


def _optimal_position(Q, va, vb):
    """Collapse target and its quadric cost for an edge (a, b)."""
    A = Q[:3, :3]
    b = -Q[:3, 3]
    det = np.linalg.det(A)
    mid = 0.5 * (va + vb)
    scale = max(np.abs(A).max(), 1e-30)
    if abs(det) > 1e-9 * scale**3:
        v = np.linalg.solve(A, b)
        # reject wildly extrapolated solutions from near-singular systems
        if np.linalg.norm(v - mid) <= 10.0 * (np.linalg.norm(vb - va) + 1e-12):
            return v, _cost(Q, v)
    best_v, best_c = None, np.inf
    for v in (va, vb, mid):
        c = _cost(Q, v)
        if c < best_c:
            best_v, best_c = v, c
    return best_v, best_c


def _cost(Q, v):
    h = np.array([v[0], v[1], v[2], 1.0])
    return float(h @ Q @ h)


def simplify_qem(
    mesh: TriangleMesh,
    target_triangles: int,
    tri_materials: np.ndarray | None = None,
) -> TriangleMesh:
    """Collapse edges until the triangle count drops to target_triangles.

    The result has at most target_triangles triangles (an interior collapse
    removes two at once, so it may land one or two below).  Raises for
    targets below 4, the smallest closed shape.  If no valid collapse
    remains the current mesh is returned as-is.
    """
    if target_triangles < _MIN_TARGET:
        raise DomainError(f"simplification target must be at least {_MIN_TARGET}")
    if mesh.n_triangles <= target_triangles:
        return mesh.copy()

    verts = mesh.vertices.copy()
    faces = [tuple(int(i) for i in tri) for tri in mesh.triangles]
    mats = None
    if tri_materials is not None:
        mats = [int(m) for m in np.asarray(tri_materials).ravel()]
        if len(mats) != len(faces):
            raise DomainError("tri_materials must have one entry per triangle")

    alive_face = [True] * len(faces)
    n_alive = len(faces)
    v_faces: list[set[int]] = [set() for _ in range(verts.shape[0])]
    for fi, f in enumerate(faces):
        for vi in f:
            v_faces[vi].add(fi)

    Q = _vertex_quadrics(verts, mesh.triangles)
    version = np.zeros(verts.shape[0], dtype=np.int64)

    def edges_of(vi):
        es = set()
        for fi in v_faces[vi]:
            f = faces[fi]
            for k in range(3):
                a, b = f[k], f[(k + 1) % 3]
                if vi in (a, b):
                    es.add((min(a, b), max(a, b)))
        return es

    heap: list = []

    def push_edge(a, b):
        v, c = _optimal_position(Q[a] + Q[b], verts[a], verts[b])
        heapq.heappush(heap, (c, (a, b), int(version[a]), int(version[b]), tuple(v)))

    all_edges = set()
    for f in faces:
        for k in range(3):
            a, b = f[k], f[(k + 1) % 3]
            all_edges.add((min(a, b), max(a, b)))
    for a, b in sorted(all_edges):
        push_edge(a, b)

    def face_normal(p0, p1, p2):
        return np.cross(p1 - p0, p2 - p0)

    while n_alive > target_triangles and heap:
        cost, (a, b), va_ver, vb_ver, vbar = heapq.heappop(heap)
        if version[a] != va_ver or version[b] != vb_ver:
            continue  # stale entry
        shared = v_faces[a] & v_faces[b]
        if not shared:
            continue  # edge no longer exists
        vbar = np.asarray(vbar)

        if mats is not None:
            ring = {mats[fi] for fi in (v_faces[a] | v_faces[b]) if alive_face[fi]}
            if len(ring) > 1:
                continue  # material boundary: keep the edge

        # would any surviving face flip or degenerate?
        survivors = (v_faces[a] | v_faces[b]) - shared
        valid = True
        new_keys = set()
        for fi in survivors:
            f = faces[fi]
            old = [verts[v] for v in f]
            new = [vbar if v in (a, b) else verts[v] for v in f]
            n_old = face_normal(*old)
            n_new = face_normal(*new)
            if np.linalg.norm(n_new) < 2.0 * _AREA_EPS or (n_old @ n_new) <= 0.0:
                valid = False
                break
            key = tuple(sorted(a if v == b else v for v in f))
            if key in new_keys:
                valid = False  # two faces fold onto the same triple
                break
            new_keys.add(key)
        if not valid:
            continue

        # commit: b merges into a at vbar
        verts[a] = vbar
        Q[a] = Q[a] + Q[b]
        for fi in shared:
            if alive_face[fi]:
                alive_face[fi] = False
                n_alive -= 1
            for vi in faces[fi]:
                v_faces[vi].discard(fi)
        for fi in list(v_faces[b]):
            f = faces[fi]
            faces[fi] = tuple(a if v == b else v for v in f)
            v_faces[b].discard(fi)
            v_faces[a].add(fi)
        version[a] += 1
        version[b] += 1
        for x, y in sorted(edges_of(a)):
            push_edge(x, y)

    # compact: drop dead faces and unused vertices
    out_faces = [faces[fi] for fi in range(len(faces)) if alive_face[fi]]
    used = sorted({v for f in out_faces for v in f})
    remap = {v: i for i, v in enumerate(used)}
    new_tris = np.array([[remap[v] for v in f] for f in out_faces], dtype=np.int64)
    if new_tris.size == 0:
        new_tris = new_tris.reshape(0, 3)
    return TriangleMesh(verts[used], new_tris)

"""Wavefront OBJ reading, writing, and polygon triangulation.

Only geometry is honored: `v` and `f` records.  Texture/normal indices
inside face corners are accepted and dropped; all other record types are
skipped.  Faces keep their polygon arity until triangulate_faces is
called, which fans convex polygons and falls back to ear clipping for the
rest.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import ParseError


@dataclass
class ObjModel:
    """Raw OBJ content: vertices plus polygon faces (0-based indices)."""

    vertices: np.ndarray  # (n, 3) float64
    faces: list[list[int]] = field(default_factory=list)

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])


def parse_obj(source) -> ObjModel:
    """Parse an OBJ file (path or text).

    1-based indices become 0-based; negative indices count from the end of
    the vertex list so far, per the OBJ convention.  Malformed records
    raise ParseError with the line number.
    """
    if isinstance(source, (str, os.PathLike)) and "\n" not in str(source):
        path = str(source)
        try:
            with open(path, "r", encoding="utf-8", errors="replace") as fh:
                text = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read OBJ: {exc}", path=path)
    else:
        path = None
        text = str(source)

    verts: list[tuple[float, float, float]] = []
    faces: list[list[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "v":
            if len(parts) < 4:
                raise ParseError("vertex needs 3 coordinates", path=path, line=lineno)
            try:
                verts.append((float(parts[1]), float(parts[2]), float(parts[3])))
            except ValueError:
                raise ParseError(f"bad vertex coordinate in {raw!r}", path=path, line=lineno)
        elif tag == "f":
            if len(parts) < 4:
                raise ParseError("face needs at least 3 corners", path=path, line=lineno)
            corners = []
            for corner in parts[1:]:
                idx_text = corner.split("/")[0]
                try:
                    idx = int(idx_text)
                except ValueError:
                    raise ParseError(f"bad face index {corner!r}", path=path, line=lineno)
                if idx == 0:
                    raise ParseError("face index 0 is invalid (OBJ is 1-based)", path=path, line=lineno)
                if idx < 0:
                    idx = len(verts) + idx
                else:
                    idx = idx - 1
                if not (0 <= idx < len(verts)):
                    raise ParseError(f"face references vertex {corner} out of range", path=path, line=lineno)
                corners.append(idx)
            faces.append(corners)
        # vt, vn, vp, o, g, s, usemtl, mtllib ... carry no geometry
    v = np.array(verts, dtype=np.float64) if verts else np.zeros((0, 3))
    return ObjModel(v, faces)


def write_obj(path, vertices, faces) -> None:
    """Write vertices and polygon faces as OBJ (1-based indices)."""
    v = np.asarray(vertices, dtype=np.float64)
    lines = []
    for x, y, z in v:
        lines.append(f"v {float(x)!r} {float(y)!r} {float(z)!r}")
    for f in faces:
        lines.append("f " + " ".join(str(int(i) + 1) for i in f))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _newell_normal(pts: np.ndarray) -> np.ndarray:
    nxt = np.roll(pts, -1, axis=0)
    n = np.array(
        [
            np.sum((pts[:, 1] - nxt[:, 1]) * (pts[:, 2] + nxt[:, 2])),
            np.sum((pts[:, 2] - nxt[:, 2]) * (pts[:, 0] + nxt[:, 0])),
            np.sum((pts[:, 0] - nxt[:, 0]) * (pts[:, 1] + nxt[:, 1])),
        ]
    )
    ln = np.linalg.norm(n)
    return n / ln if ln > 0 else n


def _fan_ok(pts: np.ndarray, normal: np.ndarray) -> bool:
    """All fan triangles from corner 0 agree with the polygon normal."""
    for k in range(1, len(pts) - 1):
        cr = np.cross(pts[k] - pts[0], pts[k + 1] - pts[0])
        area = np.linalg.norm(cr)
        if area < 1e-12 or cr @ normal <= 0:
            return False
    return True


def _ear_clip(indices: list[int], pts2: np.ndarray) -> list[tuple[int, int, int]]:
    """Ear clipping in 2D; indices index into the original vertex list."""
    order = list(range(len(indices)))
    tris: list[tuple[int, int, int]] = []

    def cross2(o, a, b):
        return (pts2[a, 0] - pts2[o, 0]) * (pts2[b, 1] - pts2[o, 1]) - (
            pts2[a, 1] - pts2[o, 1]
        ) * (pts2[b, 0] - pts2[o, 0])

    # signed polygon area decides orientation
    area = 0.0
    for k in range(len(order)):
        i, j = order[k], order[(k + 1) % len(order)]
        area += pts2[i, 0] * pts2[j, 1] - pts2[j, 0] * pts2[i, 1]
    ccw = area >= 0

    def is_ear(prev, cur, nxt):
        c = cross2(prev, cur, nxt)
        if (c <= 1e-14) if ccw else (c >= -1e-14):
            return False
        for other in order:
            if other in (prev, cur, nxt):
                continue
            # point-in-triangle with the polygon's orientation
            d1 = cross2(prev, cur, other)
            d2 = cross2(cur, nxt, other)
            d3 = cross2(nxt, prev, other)
            if ccw:
                inside = d1 >= -1e-14 and d2 >= -1e-14 and d3 >= -1e-14
            else:
                inside = d1 <= 1e-14 and d2 <= 1e-14 and d3 <= 1e-14
            if inside:
                return False
        return True

    guard = 0
    while len(order) > 3 and guard < 10_000:
        guard += 1
        clipped = False
        for k in range(len(order)):
            prev = order[k - 1]
            cur = order[k]
            nxt = order[(k + 1) % len(order)]
            if is_ear(prev, cur, nxt):
                tris.append((indices[prev], indices[cur], indices[nxt]))
                order.pop(k)
                clipped = True
                break
        if not clipped:
            break  # degenerate remainder: fan whatever is left
    if len(order) >= 3:
        for k in range(1, len(order) - 1):
            tris.append((indices[order[0]], indices[order[k]], indices[order[k + 1]]))
    return tris


def triangulate_faces(vertices: np.ndarray, faces: list[list[int]]) -> np.ndarray:
    """Triangulate polygon faces: fan when convex enough, else ear clip."""
    out: list[tuple[int, int, int]] = []
    v = np.asarray(vertices, dtype=np.float64)
    for face in faces:
        face = [i for k, i in enumerate(face) if face[k - 1] != i]  # drop repeats
        if len(face) < 3:
            continue
        if len(face) == 3:
            out.append((face[0], face[1], face[2]))
            continue
        pts = v[face]
        normal = _newell_normal(pts)
        if np.linalg.norm(normal) == 0:
            continue  # zero-area polygon
        if _fan_ok(pts, normal):
            for k in range(1, len(face) - 1):
                out.append((face[0], face[k], face[k + 1]))
            continue
        # project away the dominant normal axis and clip ears
        axis = int(np.argmax(np.abs(normal)))
        keep = [k for k in range(3) if k != axis]
        pts2 = v[:, keep]
        out.extend(_ear_clip(face, pts2))
    if not out:
        return np.zeros((0, 3), dtype=np.int64)
    return np.array(out, dtype=np.int64)

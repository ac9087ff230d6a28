"""Binary little-endian PLY 1.0 with the fixed toolchain layout.

Vertices are float32 x/y/z, faces are a uchar-count list of int32 indices
(always 3).  The writer emits exactly this layout; the reader accepts
exactly this layout and rejects everything else with a named reason, so a
write/read cycle is bit-identical.
"""

from __future__ import annotations

import io
import os

import numpy as np

from ..errors import ParseError
from ..mesh import TriangleMesh

_VERTEX_PROPS = (("float", "x"), ("float", "y"), ("float", "z"))
_FLOAT_NAMES = {"float", "float32"}
_INT_NAMES = {"int", "int32"}
_UCHAR_NAMES = {"uchar", "uint8"}


def write_ply(path, mesh: TriangleMesh) -> None:
    """Write a mesh; positions are cast to float32 on the way out."""
    data = ply_bytes(mesh)
    with open(path, "wb") as fh:
        fh.write(data)


def ply_bytes(mesh: TriangleMesh) -> bytes:
    header = (
        "ply\n"
        "format binary_little_endian 1.0\n"
        f"element vertex {mesh.n_vertices}\n"
        "property float x\n"
        "property float y\n"
        "property float z\n"
        f"element face {mesh.n_triangles}\n"
        "property list uchar int vertex_indices\n"
        "end_header\n"
    )
    buf = io.BytesIO()
    buf.write(header.encode("ascii"))
    buf.write(np.ascontiguousarray(mesh.vertices, dtype="<f4").tobytes())
    if mesh.n_triangles:
        face = np.empty(mesh.n_triangles, dtype=[("n", "u1"), ("idx", "<i4", (3,))])
        face["n"] = 3
        face["idx"] = mesh.triangles.astype("<i4")
        buf.write(face.tobytes())
    return buf.getvalue()


def read_ply(source) -> TriangleMesh:
    """Read a mesh written by write_ply (path or bytes)."""
    if isinstance(source, (bytes, bytearray)):
        data = bytes(source)
        path = None
    else:
        path = str(source)
        try:
            with open(path, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read PLY: {exc}", path=path)

    end = data.find(b"end_header\n")
    if not data.startswith(b"ply\n") or end < 0:
        raise ParseError("not a PLY file (missing ply/end_header)", path=path)
    header_lines = data[:end].decode("ascii", errors="replace").split("\n")
    body = data[end + len(b"end_header\n"):]

    fmt = None
    elements: list[tuple[str, int, list[tuple]]] = []
    for lineno, line in enumerate(header_lines[1:], start=2):
        parts = line.split()
        if not parts or parts[0] == "comment":
            continue
        if parts[0] == "format":
            fmt = parts[1]
            if fmt == "ascii":
                raise ParseError("ASCII PLY is not supported; expected binary_little_endian", path=path, line=lineno)
            if fmt != "binary_little_endian":
                raise ParseError(f"unsupported PLY format {fmt!r}; expected binary_little_endian", path=path, line=lineno)
        elif parts[0] == "element":
            if len(parts) != 3:
                raise ParseError(f"malformed element line {line!r}", path=path, line=lineno)
            elements.append((parts[1], int(parts[2]), []))
        elif parts[0] == "property":
            if not elements:
                raise ParseError("property before any element", path=path, line=lineno)
            elements[-1][2].append(tuple(parts[1:]))
        else:
            raise ParseError(f"unsupported header record {parts[0]!r}", path=path, line=lineno)
    if fmt is None:
        raise ParseError("missing format line", path=path)

    names = [e[0] for e in elements]
    if names != ["vertex", "face"]:
        raise ParseError(f"expected elements [vertex, face], got {names}", path=path)

    vertex_el, face_el = elements
    props = vertex_el[2]
    if len(props) != 3 or any(
        len(p) != 2 or p[0] not in _FLOAT_NAMES or p[1] != want[1]
        for p, want in zip(props, _VERTEX_PROPS)
    ):
        raise ParseError(f"vertex element must be float x, y, z; got {props}", path=path)
    fprops = face_el[2]
    if len(fprops) != 1 or len(fprops[0]) != 4 or fprops[0][0] != "list":
        raise ParseError(f"face element must be one list property, got {fprops}", path=path)
    _, count_t, index_t, pname = fprops[0]
    if count_t not in _UCHAR_NAMES or index_t not in _INT_NAMES or pname not in ("vertex_indices", "vertex_index"):
        raise ParseError(f"face list must be uchar-counted int vertex_indices, got {fprops[0]}", path=path)

    n_v, n_f = vertex_el[1], face_el[1]
    need_v = n_v * 12
    need_f = n_f * 13
    if len(body) < need_v + need_f:
        raise ParseError(
            f"body truncated: need {need_v + need_f} bytes for {n_v} vertices and {n_f} faces, have {len(body)}",
            path=path,
        )
    verts = np.frombuffer(body[:need_v], dtype="<f4").reshape(n_v, 3).astype(np.float64)
    tris = np.zeros((n_f, 3), dtype=np.int64)
    if n_f:
        face = np.frombuffer(body[need_v:need_v + need_f], dtype=[("n", "u1"), ("idx", "<i4", (3,))])
        if not (face["n"] == 3).all():
            bad = int(np.nonzero(face["n"] != 3)[0][0])
            raise ParseError(f"face {bad} has {face['n'][bad]} vertices; only triangles are supported", path=path)
        tris = face["idx"].astype(np.int64)
        if tris.size and (tris.min() < 0 or tris.max() >= n_v):
            raise ParseError("face index out of range", path=path)
    if len(body) != need_v + need_f:
        raise ParseError(f"{len(body) - need_v - need_f} trailing bytes after the declared elements", path=path)
    return TriangleMesh(verts, tris)

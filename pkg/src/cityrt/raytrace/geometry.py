"""Scene geometry compiled for tracing: triangle soup, BVH, wedge edges."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mesh.bvh import Bvh
from ..scene.materials import Material
from ..scene.scene import Scene

# vertex weld resolution for edge extraction, metres
WELD_QUANTUM = 1e-6


@dataclass
class EdgeTable:
    """Unique mesh edges with their adjacent triangles.

    tri1 is -1 for boundary edges (one face) and -2 for non-manifold
    edges (more than two faces), which never diffract.
    """

    a: np.ndarray  # (E, 3) first endpoint
    b: np.ndarray  # (E, 3) second endpoint
    tri0: np.ndarray  # (E,)
    tri1: np.ndarray  # (E,)

    @property
    def n_edges(self) -> int:
        return int(self.tri0.shape[0])


def _build_edges(meshes, offsets, include) -> EdgeTable:
    index: dict[tuple, int] = {}
    a_pts: list[np.ndarray] = []
    b_pts: list[np.ndarray] = []
    tri0: list[int] = []
    tri1: list[int] = []
    for mesh, off, keep in zip(meshes, offsets, include):
        if not keep or mesh.n_triangles == 0:
            continue
        quant = np.round(mesh.vertices / WELD_QUANTUM).astype(np.int64)
        for ti, tri in enumerate(mesh.triangles):
            for i, j in ((0, 1), (1, 2), (2, 0)):
                ka = tuple(quant[tri[i]])
                kb = tuple(quant[tri[j]])
                if ka == kb:
                    continue
                key = (ka, kb) if ka < kb else (kb, ka)
                slot = index.get(key)
                if slot is None:
                    index[key] = len(tri0)
                    a_pts.append(mesh.vertices[tri[i]])
                    b_pts.append(mesh.vertices[tri[j]])
                    tri0.append(off + ti)
                    tri1.append(-1)
                elif tri1[slot] == -1:
                    tri1[slot] = off + ti
                else:
                    tri1[slot] = -2
    if not tri0:
        return EdgeTable(
            a=np.zeros((0, 3)),
            b=np.zeros((0, 3)),
            tri0=np.zeros(0, dtype=np.int64),
            tri1=np.zeros(0, dtype=np.int64),
        )
    return EdgeTable(
        a=np.asarray(a_pts, dtype=np.float64),
        b=np.asarray(b_pts, dtype=np.float64),
        tri0=np.asarray(tri0, dtype=np.int64),
        tri1=np.asarray(tri1, dtype=np.int64),
    )


class SceneGeometry:
    """Flattened scene ready for the tracer.

    Triangle indices are global soup indices shared with the BVH; the
    edge table covers only diffracting meshes (everything but ground).
    """

    def __init__(self, scene: Scene):
        self.scene = scene
        meshes = []
        mat_index: dict[str, int] = {}
        self.materials: list[Material] = []
        mesh_mats: list[int] = []
        diffracting: list[bool] = []
        for model in scene.models:
            meshes.append(model.world_mesh())
            mat = model.material
            if mat.name not in mat_index:
                mat_index[mat.name] = len(self.materials)
                self.materials.append(mat)
            mesh_mats.append(mat_index[mat.name])
            diffracting.append(model.model_type.lower() != "ground")
        self.bvh = Bvh(meshes, mesh_mats)
        offsets = []
        off = 0
        for mesh in meshes:
            offsets.append(off)
            off += mesh.n_triangles
        self.edges = _build_edges(meshes, offsets, diffracting)

    @property
    def n_triangles(self) -> int:
        return self.bvh.n_triangles

    def triangle_eta(self, tri: int, frequency_hz: float) -> complex:
        """Complex relative permittivity of the triangle's material."""
        return self.materials[int(self.bvh.tri_material[tri])].eta(frequency_hz)

    def triangle_vertices(self, tri: int) -> np.ndarray:
        v0 = self.bvh.v0[tri]
        return np.stack([v0, v0 + self.bvh.e1[tri], v0 + self.bvh.e2[tri]])


def compile_geometry(scene: Scene) -> SceneGeometry:
    return SceneGeometry(scene)

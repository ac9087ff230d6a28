"""Tile conversion: raw OBJ + CSV index -> PLY meshes + GeoJSON catalogs.

Per model: read the OBJ (dataset-relative ftUS), scale to meters,
triangulate polygons, take the footprint centroid (mean vertex x/y),
recenter on it (z untouched), quantize positions to float32, and write a
binary PLY.  The tile catalog records each model's geographic centroid,
type, LOD, and triangle count; a tile info file records the tile square.

Unreadable or empty models are skipped and reported, never fatal: a tile
conversion always produces a catalog for whatever survived.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import CityrtError, InputError
from ..geodesy import DEFAULT_SOURCE_CRS, M_PER_FT_US, SourceCrs
from ..mesh import TriangleMesh, validate
from .catalog import ModelRecord, SourceModel, TileInfo, read_source_catalog, write_catalog, write_tileinfo
from .obj import parse_obj, triangulate_faces
from .ply import write_ply
from .tiles import TILE_SIDE_M, tile_boundary, tile_center
from . import tiles

log = logging.getLogger(__name__)


@dataclass
class SkippedModel:
    model_id: str
    file_name: str
    reason: str


@dataclass
class ConvertReport:
    tile: str
    converted: list[ModelRecord] = field(default_factory=list)
    skipped: list[SkippedModel] = field(default_factory=list)
    dropped_triangles: int = 0  # degenerates removed across all models
    catalog_path: str = ""
    tileinfo_path: str = ""

    @property
    def total_triangles(self) -> int:
        return sum(r.n_triangles for r in self.converted)


def _convert_model(src: SourceModel, obj_dir: str, crs: SourceCrs):
    """Returns (mesh, centroid_geo, dropped) or raises CityrtError."""
    path = os.path.join(obj_dir, src.file_name)
    model = parse_obj(path)
    if model.n_vertices == 0:
        raise InputError("no vertices")
    tris = triangulate_faces(model.vertices, model.faces)
    if tris.shape[0] == 0:
        raise InputError("no faces survive triangulation")
    # source coordinates are dataset-relative ftUS in all three axes
    verts_m = model.vertices * M_PER_FT_US
    cx, cy = float(verts_m[:, 0].mean()), float(verts_m[:, 1].mean())
    centroid = crs.to_geo(cx / M_PER_FT_US, cy / M_PER_FT_US)
    verts_m = verts_m - [cx, cy, 0.0]
    # PLY stores float32; quantize here so the written file explains the mesh
    verts_m = verts_m.astype(np.float32).astype(np.float64)
    mesh = TriangleMesh(verts_m, tris)
    report = validate(mesh, remove_degenerate=True)
    dropped = mesh.n_triangles - report.mesh.n_triangles
    if report.mesh.n_triangles == 0:
        raise InputError("all triangles degenerate")
    return report.mesh, centroid, dropped


def convert_tile(
    source_csv: str,
    obj_dir: str,
    tile_name: str,
    out_root: str,
    crs: SourceCrs = DEFAULT_SOURCE_CRS,
    threads: int = 1,
) -> ConvertReport:
    """Convert every model listed in the source CSV into the dataset layout.

    Output layout under out_root:
        city3d/meshes/<model_id>.ply
        city3d/<tile>.geojson
        city3d/<tile>_tileinfo.geojson
    """
    tiles.parse_tile_name(tile_name)  # validate before any work
    sources = read_source_catalog(source_csv)
    mesh_dir = os.path.join(out_root, "city3d", "meshes")
    os.makedirs(mesh_dir, exist_ok=True)

    report = ConvertReport(tile=tile_name)

    def work(src: SourceModel):
        try:
            return src, _convert_model(src, obj_dir, crs), None
        except CityrtError as exc:
            return src, None, str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(work, sources))
    else:
        results = [work(s) for s in sources]

    # assemble in CSV order so reruns are byte-identical
    for src, payload, err in results:
        if err is not None:
            log.warning("skipping model %s (%s): %s", src.model_id, src.file_name, err)
            report.skipped.append(SkippedModel(src.model_id, src.file_name, err))
            continue
        mesh, centroid, dropped = payload
        report.dropped_triangles += dropped
        rel = os.path.join("meshes", f"{src.model_id}.ply")
        write_ply(os.path.join(out_root, "city3d", f"{rel}"), mesh)
        report.converted.append(
            ModelRecord(
                model_id=src.model_id,
                model_type=src.model_type,
                lod=src.lod,
                mesh=rel.replace(os.sep, "/"),
                n_triangles=mesh.n_triangles,
                centroid=centroid,
            )
        )

    catalog_path = os.path.join(out_root, "city3d", f"{tile_name}.geojson")
    tileinfo_path = os.path.join(out_root, "city3d", f"{tile_name}_tileinfo.geojson")
    write_catalog(catalog_path, report.converted)
    write_tileinfo(
        tileinfo_path,
        TileInfo(
            name=tile_name,
            center=tile_center(tile_name, crs),
            side_m=TILE_SIDE_M,
            boundary=tile_boundary(tile_name, crs),
        ),
    )
    report.catalog_path = catalog_path
    report.tileinfo_path = tileinfo_path
    return report

"""Tile conversion pipeline: OBJ + CSV in, PLY + GeoJSON out."""

import filecmp
import os

import numpy as np
import pytest

from cityrt.errors import InputError
from cityrt.geodesy import DEFAULT_SOURCE_CRS, M_PER_FT_US
from cityrt.ingest import convert_tile, read_catalog, read_ply, read_tileinfo, tile_center_ft
from cityrt.mesh import validate


def write_box_obj(path, center_ft, size_ft, height_ft):
    """Open-base box as quads, dataset-relative ftUS, centered at center_ft."""
    cx, cy = center_ft
    hx, hy = size_ft[0] / 2.0, size_ft[1] / 2.0
    corners = [(cx - hx, cy - hy), (cx + hx, cy - hy), (cx + hx, cy + hy), (cx - hx, cy + hy)]
    lines = []
    for x, y in corners:
        lines.append(f"v {x!r} {y!r} 0.0")
    for x, y in corners:
        lines.append(f"v {x!r} {y!r} {float(height_ft)!r}")
    quads = [(1, 2, 6, 5), (2, 3, 7, 6), (3, 4, 8, 7), (4, 1, 5, 8), (5, 6, 7, 8)]
    for q in quads:
        lines.append("f " + " ".join(str(i) for i in q))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


@pytest.fixture
def source_tree(tmp_path):
    src = tmp_path / "raw"
    src.mkdir()
    ce, cn = tile_center_ft("BOS_F_4")
    write_box_obj(src / "b1.obj", (ce - 200.0, cn + 100.0), (40.0, 60.0), 80.0)
    write_box_obj(src / "b2.obj", (ce + 300.0, cn - 50.0), (30.0, 30.0), 33.0)
    write_box_obj(src / "w1.obj", (ce, cn), (100.0, 2.0), 10.0)
    (src / "models.csv").write_text(
        "model_id,file_name,model_type,lod\n"
        "B1,b1.obj,Building,2\n"
        "B2,b2.obj,Building,1\n"
        "W1,w1.obj,Wall,1\n"
    )
    return src


def test_convert_tile(source_tree, tmp_path):
    out = tmp_path / "dataset"
    report = convert_tile(str(source_tree / "models.csv"), str(source_tree), "BOS_F_4", str(out))
    assert [r.model_id for r in report.converted] == ["B1", "B2", "W1"]
    assert not report.skipped
    # each box: 5 quads -> 10 triangles
    assert report.total_triangles == 30
    assert all(r.n_triangles == 10 for r in report.converted)

    catalog = read_catalog(report.catalog_path)
    assert [r.model_id for r in catalog] == ["B1", "B2", "W1"]
    assert sum(r.n_triangles for r in catalog) == report.total_triangles

    info = read_tileinfo(report.tileinfo_path)
    assert info.name == "BOS_F_4"

    for rec in catalog:
        mesh = read_ply(os.path.join(out, "city3d", rec.mesh))
        assert validate(mesh).ok
        # recentered: footprint centroid at the origin (float32 grid)
        assert abs(mesh.vertices[:, 0].mean()) < 1e-3
        assert abs(mesh.vertices[:, 1].mean()) < 1e-3

    # heights converted ftUS -> m, z not recentered
    b1 = read_ply(os.path.join(out, "city3d", catalog[0].mesh))
    assert b1.vertices[:, 2].min() == 0.0
    assert b1.vertices[:, 2].max() == pytest.approx(80.0 * M_PER_FT_US, rel=1e-6)

    # catalog centroid is the footprint centroid mapped to geographic
    ce, cn = tile_center_ft("BOS_F_4")
    want = DEFAULT_SOURCE_CRS.to_geo(ce - 200.0, cn + 100.0)
    assert catalog[0].centroid.lon == pytest.approx(want.lon, abs=1e-9)
    assert catalog[0].centroid.lat == pytest.approx(want.lat, abs=1e-9)


def test_convert_skips_broken_models(source_tree, tmp_path):
    (source_tree / "models.csv").write_text(
        "model_id,file_name,model_type,lod\n"
        "B1,b1.obj,Building,2\n"
        "GONE,missing.obj,Building,2\n"
        "BAD,bad.obj,Building,2\n"
    )
    (source_tree / "bad.obj").write_text("v 0 0 zero\n")
    out = tmp_path / "dataset"
    report = convert_tile(str(source_tree / "models.csv"), str(source_tree), "BOS_F_4", str(out))
    assert [r.model_id for r in report.converted] == ["B1"]
    assert sorted(s.model_id for s in report.skipped) == ["BAD", "GONE"]
    reasons = {s.model_id: s.reason for s in report.skipped}
    assert "cannot read OBJ" in reasons["GONE"]
    assert "bad vertex" in reasons["BAD"]
    # the catalog still landed, listing the survivor
    assert len(read_catalog(report.catalog_path)) == 1


def test_convert_deterministic_and_threaded(source_tree, tmp_path):
    outs = []
    for name, threads in (("d1", 1), ("d2", 1), ("d4", 4)):
        out = tmp_path / name
        convert_tile(str(source_tree / "models.csv"), str(source_tree), "BOS_F_4", str(out), threads=threads)
        outs.append(out)
    for other in outs[1:]:
        for rel in ("city3d/BOS_F_4.geojson", "city3d/BOS_F_4_tileinfo.geojson",
                    "city3d/meshes/B1.ply", "city3d/meshes/B2.ply", "city3d/meshes/W1.ply"):
            assert filecmp.cmp(outs[0] / rel, other / rel, shallow=False), rel


def test_convert_rejects_bad_tile_name(source_tree, tmp_path):
    with pytest.raises(InputError, match="tile name"):
        convert_tile(str(source_tree / "models.csv"), str(source_tree), "NOPE", str(tmp_path / "x"))

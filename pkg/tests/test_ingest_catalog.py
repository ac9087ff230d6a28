"""Catalogs, tile grid naming, and antenna registries."""

import math

import pytest

from cityrt.errors import InputError, SchemaError
from cityrt.geodesy import DEFAULT_SOURCE_CRS, GeoCoord, LocalFrame, geo_to_local, local_to_geo
from cityrt.ingest import (
    AntennaRecord,
    ModelRecord,
    TileInfo,
    merge_antenna_datasets,
    read_antennas,
    read_catalog,
    read_source_catalog,
    read_tileinfo,
    tile_boundary,
    tile_center,
    tile_center_ft,
    write_antennas,
    write_catalog,
    write_tileinfo,
    TILE_SIDE_M,
)
from cityrt.ingest.tiles import parse_tile_name

# published tile centers (name, lat, lon); the source table's lon/lat
# headers are swapped, this is the corrected reading
TILE_CENTERS = [
    ("BOS_F_4", 42.3570902827, -71.1025189571), ("BOS_F_5", 42.3433701314, -71.1026051428),
    ("BOS_F_6", 42.3296499389, -71.1026912911), ("BOS_F_7", 42.3159297061, -71.1027774021),
    ("BOS_F_8", 42.3022094336, -71.1028634758), ("BOS_F_9", 42.2884891223, -71.1029495121),
    ("BOS_G_3", 42.3707449543, -71.0839300113), ("BOS_G_4", 42.3570248589, -71.0840202471),
    ("BOS_G_5", 42.3433047216, -71.0841104437), ("BOS_G_6", 42.3295845431, -71.0842006013),
    ("BOS_G_7", 42.3158643242, -71.0842907198), ("BOS_G_8", 42.3021440657, -71.0843807992),
    ("BOS_G_9", 42.2884237683, -71.0844708396), ("BOS_H_3", 42.3706765403, -71.0654273276),
    ("BOS_H_4", 42.3569564595, -71.0655215761), ("BOS_H_5", 42.3432363368, -71.0656157838),
    ("BOS_H_6", 42.3295161729, -71.0657099505), ("BOS_H_7", 42.3157959687, -71.0658040765),
    ("BOS_H_8", 42.3020757248, -71.0658981616), ("BOS_H_9", 42.288355442, -71.065992206),
    ("BOS_I_3", 42.37060515, -71.0469246849), ("BOS_I_4", 42.3568850846, -71.0470229461),
    ("BOS_I_5", 42.3431649771, -71.0471211646), ("BOS_I_6", 42.3294448285, -71.0472193406),
    ("BOS_I_7", 42.3157246395, -71.047317474), ("BOS_I_8", 42.3020044108, -71.0474155649),
    ("BOS_I_9", 42.2882841434, -71.0475136132), ("BOS_J_3", 42.3705307836, -71.0284220849),
    ("BOS_J_5", 42.3430906425, -71.0286265881), ("BOS_J_6", 42.3293705098, -71.0287287732),
    ("BOS_J_7", 42.3156503367, -71.028830914),
]


def test_tile_grid_matches_published_centers():
    for name, lat, lon in TILE_CENTERS:
        c = tile_center(name)
        assert abs(c.lat - lat) < 2e-4, name
        assert abs(c.lon - lon) < 2e-4, name


def test_tile_center_ft_layout():
    e, n = tile_center_ft("BOS_F_4")
    assert e == pytest.approx(6.5 * 5000.0)
    assert n == pytest.approx(10.5 * 5000.0)
    # one column east is exactly one side away
    e2, _ = tile_center_ft("BOS_G_4")
    assert e2 - e == pytest.approx(5000.0)


def test_adjacent_tile_one_side_east():
    # stepping one tile side east of F_4's center lands on G_4's longitude
    frame = LocalFrame(tile_center("BOS_F_4"))
    g = local_to_geo((TILE_SIDE_M, 0.0, 0.0), frame)
    want = tile_center("BOS_G_4")
    assert abs(g.lon - want.lon) < 2e-4
    assert abs(g.lat - want.lat) < 2e-4


def test_tile_boundary_ring():
    ring = tile_boundary("BOS_F_4")
    assert len(ring) == 5
    assert ring[0].lon == ring[-1].lon and ring[0].lat == ring[-1].lat
    # side length in local meters
    frame = LocalFrame(tile_center("BOS_F_4"))
    p0 = geo_to_local(ring[0], frame)
    p1 = geo_to_local(ring[1], frame)
    side = math.hypot(p1[0] - p0[0], p1[1] - p0[1])
    assert side == pytest.approx(TILE_SIDE_M, abs=1e-6)
    assert TILE_SIDE_M == pytest.approx(1524.003, abs=1e-3)


def test_bad_tile_names():
    for bad in ("BOSF4", "BOS_6_F", "BOS__4", "bos_f_4x"):
        with pytest.raises(InputError):
            parse_tile_name(bad)


def test_catalog_round_trip(tmp_path):
    recs = [
        ModelRecord("BOS_X_1_M1", "Building", 2, "meshes/m1.ply", 42,
                    GeoCoord(-71.10, 42.35), extras={"height_m": 12.5, "note": "corner"}),
        ModelRecord("BOS_X_1_M2", "Wall", 1, "meshes/m2.ply", 2, GeoCoord(-71.11, 42.36)),
    ]
    p = tmp_path / "tile.geojson"
    write_catalog(p, recs)
    back = read_catalog(str(p))
    assert len(back) == 2
    assert back[0].model_id == "BOS_X_1_M1"
    assert back[0].extras == {"height_m": 12.5, "note": "corner"}  # unknowns preserved
    assert back[1].model_type == "Wall"
    assert back[0].centroid.lon == pytest.approx(-71.10)


def test_catalog_schema_errors(tmp_path):
    p = tmp_path / "bad.geojson"
    p.write_text('{"type": "FeatureCollection", "features": [{"type": "Feature", '
                 '"geometry": {"type": "Point", "coordinates": [-71, 42]}, '
                 '"properties": {"model_id": "M7", "lod": 2}}]}')
    with pytest.raises(SchemaError, match="M7"):
        read_catalog(str(p))


def test_catalog_rejects_bad_lod():
    with pytest.raises(SchemaError):
        ModelRecord("m", "Building", 9, "x.ply", 1, GeoCoord(-71, 42))


def test_tileinfo_round_trip(tmp_path):
    info = TileInfo("BOS_F_4", tile_center("BOS_F_4"), TILE_SIDE_M, tile_boundary("BOS_F_4"))
    p = tmp_path / "ti.geojson"
    write_tileinfo(p, info)
    back = read_tileinfo(str(p))
    assert back.name == "BOS_F_4"
    assert back.side_m == pytest.approx(TILE_SIDE_M)
    assert len(back.boundary) == 5


def test_source_catalog_aliases(tmp_path):
    p = tmp_path / "models.csv"
    p.write_text("Model ID,File Name,Model Type,LOD\nB1,b1.obj,Building,2\nW1,w1.obj,Wall,1\n")
    rows = read_source_catalog(str(p))
    assert [r.model_id for r in rows] == ["B1", "W1"]
    assert rows[0].lod == 2 and rows[1].model_type == "Wall"


def test_source_catalog_missing_column(tmp_path):
    p = tmp_path / "models.csv"
    p.write_text("Model ID,File Name,LOD\nB1,b1.obj,2\n")
    with pytest.raises(SchemaError, match="model_type"):
        read_source_catalog(str(p))


def _antenna_file(tmp_path, name, features):
    import json

    p = tmp_path / name
    p.write_text(json.dumps({"type": "FeatureCollection", "features": features}))
    return str(p)


def test_antennas_column_mapping(tmp_path):
    old = _antenna_file(tmp_path, "old.geojson", [
        {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-71.103, 42.357]},
         "properties": {"OBJECTID": 17, "Pole_Type": "wood"}},
    ])
    new = _antenna_file(tmp_path, "new.geojson", [
        {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-71.1030001, 42.3570001]},
         "properties": {"ID": 17, "New_Pole_Type": "steel"}},
    ])
    a = read_antennas(old, source="poles-2014")
    b = read_antennas(new, source="poles-2019")
    assert a[0].antenna_id == "17" and a[0].pole_type == "wood"
    assert b[0].pole_type == "steel"
    merged = merge_antenna_datasets([a, b])
    assert len(merged) == 1
    assert merged[0].pole_type == "steel"  # newer vintage wins the duplicate


def test_antennas_same_id_far_apart_kept(tmp_path):
    old = _antenna_file(tmp_path, "o.geojson", [
        {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-71.103, 42.357]},
         "properties": {"id": "A"}},
    ])
    new = _antenna_file(tmp_path, "n.geojson", [
        {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-71.104, 42.357]},
         "properties": {"id": "A"}},
    ])
    merged = merge_antenna_datasets([read_antennas(old), read_antennas(new)])
    assert len(merged) == 2  # ~80 m apart: distinct poles sharing an id


def test_antennas_round_trip(tmp_path):
    recs = [AntennaRecord("5", GeoCoord(-71.1, 42.35), "metal", "survey")]
    p = tmp_path / "a.geojson"
    write_antennas(p, recs)
    back = read_antennas(str(p))
    assert back[0].antenna_id == "5"
    assert back[0].pole_type == "metal"


def test_antennas_missing_id_column(tmp_path):
    bad = _antenna_file(tmp_path, "b.geojson", [
        {"type": "Feature", "geometry": {"type": "Point", "coordinates": [-71.1, 42.35]},
         "properties": {"kind": "x"}},
    ])
    with pytest.raises(SchemaError, match="antenna id"):
        read_antennas(bad)


def test_default_crs_anchor():
    g = DEFAULT_SOURCE_CRS.to_geo(0.0, 0.0)
    assert abs(g.lon - (-71.223391)) < 1e-4
    assert abs(g.lat - 42.213379) < 1e-4

"""Scene assembly: tile loading, disc extraction, devices, ground plane."""

import math

import numpy as np
import pytest

from cityrt.errors import EmptySceneError, NotFoundError, PlacementError
from cityrt.geodesy import M_PER_FT_US, GeoCoord, geo_to_local, local_to_geo
from cityrt.ingest import TILE_SIDE_M, read_catalog, tile_center
from cityrt.scene import (
    GROUND_MODEL_ID,
    RadioDevice,
    Scene,
    Sector,
    add_ground_plane,
    device_from_antenna,
    extract_scene,
    load_tile_scene,
    place_device,
)
from cityrt.scene.scene import antenna_height_from_pole_type, points_in_polygon

from .conftest import ANTENNAS, ANTENNAS_INSIDE, BUILDINGS, TILE, WALLS


@pytest.fixture
def scene(tile_dataset):
    return load_tile_scene(tile_dataset, TILE)


def test_tile_scene_shape(scene):
    assert scene.name == TILE
    assert len(scene.catalog_models) == len(BUILDINGS) + len(WALLS)
    assert scene.has_ground
    center = tile_center(TILE)
    assert scene.frame.origin.lon == pytest.approx(center.lon, abs=1e-12)
    assert scene.frame.origin.lat == pytest.approx(center.lat, abs=1e-12)
    # boundary is the tile square, expressed in the local frame
    lo = scene.boundary.min(axis=0)
    hi = scene.boundary.max(axis=0)
    assert hi - lo == pytest.approx([TILE_SIDE_M, TILE_SIDE_M], abs=1e-6)
    assert (lo + hi) / 2 == pytest.approx([0.0, 0.0], abs=1e-6)


def test_tile_scene_placements(scene):
    for mid, ((dx, dy), _, h) in {**BUILDINGS, **WALLS}.items():
        m = scene.model(mid)
        assert m.translation[:2] == pytest.approx(
            [dx * M_PER_FT_US, dy * M_PER_FT_US], abs=1e-4
        )
        assert m.translation[2] == 0.0
        world = m.world_mesh()
        # recentering: world footprint centroid must equal the translation
        assert world.vertices[:, 0].mean() == pytest.approx(m.translation[0], abs=1e-3)
        assert world.vertices[:, 1].mean() == pytest.approx(m.translation[1], abs=1e-3)
        assert world.vertices[:, 2].max() == pytest.approx(h * M_PER_FT_US, abs=1e-3)
        assert bool(scene.contains_xy(m.translation[:2].reshape(1, 2))[0])


def test_tile_scene_materials(scene):
    for mid in BUILDINGS:
        assert scene.model(mid).material.name == "itu_concrete"
    for mid in WALLS:
        assert scene.model(mid).material.name == "itu_brick"
    assert scene.model(GROUND_MODEL_ID).material.name == "itu_medium_dry_ground"


def test_tile_scene_antenna_filter(scene):
    assert sorted(a.antenna_id for a in scene.antennas) == sorted(ANTENNAS_INSIDE)


def test_unknown_tile(tile_dataset):
    with pytest.raises(NotFoundError, match=TILE):
        load_tile_scene(tile_dataset, "BOS_A_1")


def test_ground_plane_geometry(scene):
    ground = scene.model(GROUND_MODEL_ID)
    assert ground.mesh.n_triangles == 2
    assert np.all(ground.mesh.vertices[:, 2] == 0.0)
    lo, hi = ground.mesh.bounds()
    assert hi[0] - lo[0] == pytest.approx(TILE_SIDE_M * 1.1, rel=1e-9)
    assert hi[1] - lo[1] == pytest.approx(TILE_SIDE_M * 1.1, rel=1e-9)


def test_ground_plane_idempotent(scene):
    n = len(scene.models)
    add_ground_plane(scene)
    add_ground_plane(scene)
    assert len(scene.models) == n
    assert sum(1 for m in scene.models if m.model_id == GROUND_MODEL_ID) == 1


def test_extract_single_building(tile_dataset):
    records = {r.model_id: r for r in read_catalog(tile_dataset / "city3d" / f"{TILE}.geojson")}
    sub = extract_scene(tile_dataset, records["B1"].centroid, 1.0)
    assert [m.model_id for m in sub.catalog_models] == ["B1"]
    assert sub.model("B1").translation[:2] == pytest.approx([0.0, 0.0], abs=1e-6)
    # boundary is the disc's bounding square
    assert sub.boundary.min(axis=0) == pytest.approx([-1.0, -1.0])
    assert sub.boundary.max(axis=0) == pytest.approx([1.0, 1.0])


def test_extract_matches_brute_force_filter(tile_dataset):
    center = tile_center(TILE)
    radius = 150.0
    sub = extract_scene(tile_dataset, center, radius)
    # oracle: distance test on the generator layout, in exact dataset feet
    expect = {
        mid
        for mid, ((dx, dy), _, _) in {**BUILDINGS, **WALLS}.items()
        if math.hypot(dx, dy) * M_PER_FT_US <= radius
    }
    assert expect == {"B1", "B2", "W1"}  # fixture layout puts exactly these in range
    assert {m.model_id for m in sub.catalog_models} == expect
    ants = {
        aid
        for aid, ((dx, dy), _) in ANTENNAS.items()
        if math.hypot(dx, dy) * M_PER_FT_US <= radius
    }
    assert {a.antenna_id for a in sub.antennas} == ants


def test_extract_empty_location(tile_dataset):
    center = tile_center(TILE)
    lonely = local_to_geo(
        (20.0, 20.0, 0.0),
        load_tile_scene(tile_dataset, TILE).frame,
    )
    with pytest.raises(EmptySceneError):
        extract_scene(tile_dataset, lonely, 0.001)
    # a disc that misses every tile is also empty
    far = GeoCoord(center.lon + 1.0, center.lat)
    with pytest.raises(EmptySceneError):
        extract_scene(tile_dataset, far, 5.0)
    with pytest.raises(PlacementError):
        extract_scene(tile_dataset, center, 0.0)


def test_place_tx_defaults(scene):
    dev = place_device(scene, (0.0, 0.0), "tx")
    assert dev.device_id == "tx0"
    assert np.array_equal(dev.position, [0.0, 0.0, 10.0])
    assert [s.azimuth_deg for s in dev.sectors] == [0.0, 120.0, 240.0]
    assert all(s.width_deg == 120.0 for s in dev.sectors)


def test_place_rx_defaults(scene):
    dev = place_device(scene, (5.0, 5.0), "rx")
    assert np.array_equal(dev.position, [5.0, 5.0, 1.5])
    assert dev.sectors == []


def test_place_height_resolution(scene):
    assert place_device(scene, (1.0, 0.0, 4.0), "rx").position[2] == 4.0
    assert place_device(scene, (2.0, 0.0, 4.0), "rx", height_m=2.5).position[2] == 2.5
    assert place_device(scene, (3.0, 0.0), "tx", height_m=25.0).position[2] == 25.0


def test_place_geographic_roundtrip(scene):
    geo = local_to_geo((40.0, -30.0, 0.0), scene.frame)
    dev = place_device(scene, GeoCoord(geo.lon, geo.lat), "tx")
    back = local_to_geo(dev.position, scene.frame)
    assert back.lon == pytest.approx(geo.lon, abs=1e-9)
    assert back.lat == pytest.approx(geo.lat, abs=1e-9)
    assert dev.position[2] == 10.0


def test_place_outside_boundary(scene):
    with pytest.raises(PlacementError):
        place_device(scene, (TILE_SIDE_M, 0.0), "rx")


def test_place_duplicate_id(scene):
    place_device(scene, (0.0, 0.0), "rx", device_id="a")
    with pytest.raises(PlacementError, match="'a'"):
        place_device(scene, (1.0, 1.0), "rx", device_id="a")


def test_device_invariants():
    with pytest.raises(PlacementError):
        RadioDevice("d", "relay", np.zeros(3))
    with pytest.raises(PlacementError):
        RadioDevice("d", "rx", [0.0, 0.0, -1.0])
    tx = RadioDevice("d", "tx", [0.0, 0.0, 10.0])
    assert len(tx.sectors) == 3  # default sectors filled in


def test_pole_height_lookup():
    assert antenna_height_from_pole_type("anything") == 10.0
    assert antenna_height_from_pole_type(None) == 10.0
    assert antenna_height_from_pole_type("Utility_Pole", {"utility_pole": 8.0}) == 8.0
    assert antenna_height_from_pole_type("odd", {"default": 7.0}) == 7.0


def test_device_from_antenna(scene):
    dev = device_from_antenna(scene, "A1", heights={"wood": 8.0})
    assert dev.device_id == "tx_A1"
    assert dev.source == "catalog-antenna"
    assert dev.position[2] == 8.0
    (dx, dy), _ = ANTENNAS["A1"]
    assert dev.position[:2] == pytest.approx(
        [dx * M_PER_FT_US, dy * M_PER_FT_US], abs=1e-4
    )
    # A2 has no pole type: default height
    assert device_from_antenna(scene, "A2").position[2] == 10.0
    with pytest.raises(NotFoundError, match="A3"):
        device_from_antenna(scene, "A3")  # outside the tile, not in the scene


def test_lookup_errors_list_available(scene):
    with pytest.raises(NotFoundError, match="B1"):
        scene.model("nope")
    with pytest.raises(NotFoundError):
        scene.device("nope")


def test_points_in_polygon_closed_membership():
    square = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0], [0.0, 0.0]]
    pts = [
        [1.0, 1.0],  # interior
        [0.0, 0.0],  # corner
        [1.0, 0.0],  # edge midpoint
        [2.0, 2.0],  # far corner
        [2.0 + 1e-6, 1.0],  # just outside
        [3.0, 3.0],
    ]
    got = points_in_polygon(pts, square)
    assert got.tolist() == [True, True, True, True, False, False]


def test_scene_boundary_must_close():
    from cityrt.geodesy import LocalFrame

    ring = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    s = Scene("s", LocalFrame(origin=tile_center(TILE)), ring)
    assert np.array_equal(s.boundary[0], s.boundary[-1])

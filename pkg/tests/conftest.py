"""Shared fixtures: a small converted dataset with known ground truth."""

import pytest

from cityrt.geodesy import DEFAULT_SOURCE_CRS
from cityrt.ingest import AntennaRecord, convert_tile, tile_center_ft, write_antennas

TILE = "BOS_F_4"

# model -> (center offset from tile center (ft), footprint (ft), height (ft))
BUILDINGS = {
    "B1": ((-200.0, 100.0), (40.0, 60.0), 80.0),
    "B2": ((300.0, -50.0), (30.0, 30.0), 33.0),
    "B3": ((900.0, 800.0), (50.0, 50.0), 50.0),
}
WALLS = {
    "W1": ((0.0, -300.0), (100.0, 2.0), 10.0),
}

# antenna -> (offset from tile center (ft), pole type); tile side is 5000 ft
ANTENNAS = {
    "A1": ((-100.0, 150.0), "wood"),
    "A2": ((400.0, -120.0), None),
    "A3": ((6000.0, 0.0), "metal"),  # outside the tile
}
ANTENNAS_INSIDE = ("A1", "A2")


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


@pytest.fixture(scope="session")
def tile_dataset(tmp_path_factory):
    """One converted BOS_F_4 tile: 3 buildings, 1 wall, 3 antennas (2 inside)."""
    root = tmp_path_factory.mktemp("dataset")
    raw = root / "raw"
    raw.mkdir()
    ce, cn = tile_center_ft(TILE)
    rows = ["model_id,file_name,model_type,lod"]
    for mid, ((dx, dy), size, h) in BUILDINGS.items():
        write_box_obj(raw / f"{mid}.obj", (ce + dx, cn + dy), size, h)
        rows.append(f"{mid},{mid}.obj,Building,1")
    for mid, ((dx, dy), size, h) in WALLS.items():
        write_box_obj(raw / f"{mid}.obj", (ce + dx, cn + dy), size, h)
        rows.append(f"{mid},{mid}.obj,Wall,1")
    (raw / "models.csv").write_text("\n".join(rows) + "\n")
    report = convert_tile(str(raw / "models.csv"), str(raw), TILE, str(root))
    assert not report.skipped

    ant_dir = root / "antennas"
    ant_dir.mkdir()
    records = [
        AntennaRecord(
            antenna_id=aid,
            position=DEFAULT_SOURCE_CRS.to_geo(ce + dx, cn + dy),
            pole_type=pole,
            source="survey",
        )
        for aid, ((dx, dy), pole) in ANTENNAS.items()
    ]
    write_antennas(str(ant_dir / "antennas.geojson"), records)
    return root

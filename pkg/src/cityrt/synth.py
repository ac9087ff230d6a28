"""Synthetic city generator: a seeded block-grid town in dataset format.

The generator writes raw OBJ sources (dataset-relative ftUS, exactly like
the real survey data), a source CSV index, and an antennas GeoJSON, then
runs the normal conversion pipeline on its own output.  Every byte is a
pure function of the spec, so reruns are identical and tests can assert
against the ground-truth sidecar it leaves at the dataset root.

Layout under out_root:
    source/<model_id>.obj           raw meshes
    source/<tile>_models.csv        conversion index
    antennas/antennas.geojson       street poles
    city3d/...                      converted tile (see ingest.convert_tile)
    synth_truth.json                what the generator actually placed
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, SchemaError
from .geodesy import DEFAULT_SOURCE_CRS, M_PER_FT_US, SourceCrs
from .ingest import write_antennas, write_obj
from .ingest.antennas import AntennaRecord
from .ingest.convert import ConvertReport, convert_tile
from .ingest.tiles import TILE_SIDE_M, parse_tile_name, tile_center_ft

# every WALL_STRIDE-th block gets a freestanding wall on its south street
WALL_STRIDE = 5
WALL_PHASE = 2
WALL_THICKNESS_M = 0.4
WALL_HEIGHT_M = 2.5
POLE_TYPES = ("light", "utility", "traffic_signal")


@dataclass(frozen=True)
class SynthSpec:
    """Parameters of a synthetic block-grid city.

    Buildings sit one per block on a rows x cols grid of square blocks,
    streets of street_width_m between and around them, the whole city
    centered on the named tile.  Heights are uniform in [min, max].
    """

    tile_name: str = "BOS_F_4"
    seed: int = 0
    block_rows: int = 3
    block_cols: int = 3
    street_width_m: float = 12.0
    footprint_m: float = 30.0
    height_min_m: float = 8.0
    height_max_m: float = 40.0
    antennas_per_block: int = 1

    def __post_init__(self):
        parse_tile_name(self.tile_name)
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        for name in ("block_rows", "block_cols", "antennas_per_block"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        for name in ("street_width_m", "footprint_m", "height_min_m", "height_max_m"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be positive and finite, got {v!r}")
        if self.height_max_m < self.height_min_m:
            raise ConfigError(
                f"height_max_m ({self.height_max_m}) < height_min_m ({self.height_min_m})"
            )
        half = TILE_SIDE_M / 2.0
        if self.half_extent_x_m > half or self.half_extent_y_m > half:
            raise ConfigError(
                f"city extent {2 * self.half_extent_x_m:.1f} x {2 * self.half_extent_y_m:.1f} m "
                f"does not fit the {TILE_SIDE_M:.1f} m tile {self.tile_name}"
            )

    @property
    def pitch_m(self) -> float:
        """Block pitch: one building plus one street."""
        return self.footprint_m + self.street_width_m

    @property
    def half_extent_x_m(self) -> float:
        return ((self.block_cols - 1) / 2.0) * self.pitch_m + self.footprint_m / 2.0 + self.street_width_m

    @property
    def half_extent_y_m(self) -> float:
        return ((self.block_rows - 1) / 2.0) * self.pitch_m + self.footprint_m / 2.0 + self.street_width_m


_SPEC_KEYS = {
    "tile", "seed", "blocks", "street_width_m", "footprint_m", "height_m", "antennas_per_block",
}


def spec_from_json(text: str) -> SynthSpec:
    """Parse the spec file format.

    {
      "tile": "BOS_F_4", "seed": 7,
      "blocks": {"rows": 3, "cols": 3},      (or [rows, cols])
      "street_width_m": 12.0, "footprint_m": 30.0,
      "height_m": {"min": 8.0, "max": 40.0},
      "antennas_per_block": 1
    }

    Every key is optional; unknown keys are rejected so typos fail loudly.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("spec must be a JSON object")
    unknown = set(doc) - _SPEC_KEYS
    if unknown:
        raise SchemaError(f"unknown spec keys {sorted(unknown)}; valid keys: {sorted(_SPEC_KEYS)}")
    kwargs: dict = {}
    if "tile" in doc:
        kwargs["tile_name"] = str(doc["tile"])
    if "seed" in doc:
        kwargs["seed"] = _as_int(doc["seed"], "seed")
    if "blocks" in doc:
        blocks = doc["blocks"]
        if isinstance(blocks, dict):
            rows, cols = blocks.get("rows", 3), blocks.get("cols", 3)
        elif isinstance(blocks, (list, tuple)) and len(blocks) == 2:
            rows, cols = blocks
        else:
            raise SchemaError(f"blocks must be {{rows, cols}} or [rows, cols], got {blocks!r}")
        kwargs["block_rows"] = _as_int(rows, "blocks.rows")
        kwargs["block_cols"] = _as_int(cols, "blocks.cols")
    for key, attr in (("street_width_m", "street_width_m"), ("footprint_m", "footprint_m")):
        if key in doc:
            kwargs[attr] = _as_float(doc[key], key)
    if "height_m" in doc:
        h = doc["height_m"]
        if not isinstance(h, dict) or set(h) - {"min", "max"}:
            raise SchemaError(f"height_m must be {{min, max}}, got {h!r}")
        if "min" in h:
            kwargs["height_min_m"] = _as_float(h["min"], "height_m.min")
        if "max" in h:
            kwargs["height_max_m"] = _as_float(h["max"], "height_m.max")
    if "antennas_per_block" in doc:
        kwargs["antennas_per_block"] = _as_int(doc["antennas_per_block"], "antennas_per_block")
    return SynthSpec(**kwargs)


def spec_to_json(spec: SynthSpec) -> str:
    doc = {
        "tile": spec.tile_name,
        "seed": spec.seed,
        "blocks": {"rows": spec.block_rows, "cols": spec.block_cols},
        "street_width_m": spec.street_width_m,
        "footprint_m": spec.footprint_m,
        "height_m": {"min": spec.height_min_m, "max": spec.height_max_m},
        "antennas_per_block": spec.antennas_per_block,
    }
    return json.dumps(doc, indent=2) + "\n"


def _as_int(v, name: str) -> int:
    if isinstance(v, bool) or not isinstance(v, int):
        raise SchemaError(f"{name} must be an integer, got {v!r}")
    return v


def _as_float(v, name: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise SchemaError(f"{name} must be a number, got {v!r}")
    return float(v)


@dataclass(frozen=True)
class PlannedModel:
    model_id: str
    model_type: str  # Building | Wall
    lod: int
    center_m: tuple  # (x, y) tile-local meters
    size_m: tuple  # (sx, sy, sz)

    @property
    def file_name(self) -> str:
        return f"{self.model_id}.obj"


@dataclass(frozen=True)
class PlannedAntenna:
    antenna_id: str
    pole_type: str
    local_m: tuple  # (x, y) tile-local meters


@dataclass
class CityPlan:
    spec: SynthSpec
    models: list[PlannedModel] = field(default_factory=list)
    antennas: list[PlannedAntenna] = field(default_factory=list)

    @property
    def buildings(self) -> list[PlannedModel]:
        return [m for m in self.models if m.model_type == "Building"]

    @property
    def walls(self) -> list[PlannedModel]:
        return [m for m in self.models if m.model_type == "Wall"]


def plan_city(spec: SynthSpec) -> CityPlan:
    """Lay the city out in tile-local meters. Pure function of the spec.

    RNG draw order is fixed (all building heights row-major, then all
    antenna jitters) so adding model kinds never shifts existing ones.
    """
    rng = np.random.default_rng(spec.seed)
    pitch = spec.pitch_m
    x0 = -((spec.block_cols - 1) / 2.0) * pitch
    y0 = -((spec.block_rows - 1) / 2.0) * pitch
    plan = CityPlan(spec=spec)

    heights = rng.uniform(spec.height_min_m, spec.height_max_m, size=spec.block_rows * spec.block_cols)
    for r in range(spec.block_rows):
        for c in range(spec.block_cols):
            k = r * spec.block_cols + c
            plan.models.append(
                PlannedModel(
                    model_id=f"bldg_{r:03d}_{c:03d}",
                    model_type="Building",
                    lod=2,
                    center_m=(x0 + c * pitch, y0 + r * pitch),
                    size_m=(spec.footprint_m, spec.footprint_m, float(heights[k])),
                )
            )
    for r in range(spec.block_rows):
        for c in range(spec.block_cols):
            k = r * spec.block_cols + c
            if k % WALL_STRIDE != WALL_PHASE:
                continue
            plan.models.append(
                PlannedModel(
                    model_id=f"wall_{r:03d}_{c:03d}",
                    model_type="Wall",
                    lod=1,
                    center_m=(
                        x0 + c * pitch,
                        y0 + r * pitch - (spec.footprint_m + spec.street_width_m) / 2.0,
                    ),
                    size_m=(spec.footprint_m, WALL_THICKNESS_M, WALL_HEIGHT_M),
                )
            )

    # poles on the street ring around each block, rotating E/N/W/S
    ring = spec.footprint_m / 2.0 + spec.street_width_m / 2.0
    directions = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))
    jitter = rng.uniform(
        -spec.street_width_m / 4.0,
        spec.street_width_m / 4.0,
        size=spec.block_rows * spec.block_cols * spec.antennas_per_block,
    )
    idx = 0
    for r in range(spec.block_rows):
        for c in range(spec.block_cols):
            bx, by = x0 + c * pitch, y0 + r * pitch
            for j in range(spec.antennas_per_block):
                dx, dy = directions[(r + c + j) % 4]
                # jitter runs along the street, i.e. perpendicular to the offset
                jx, jy = -dy * jitter[idx], dx * jitter[idx]
                plan.antennas.append(
                    PlannedAntenna(
                        antenna_id=f"pole_{idx:04d}",
                        pole_type=POLE_TYPES[idx % len(POLE_TYPES)],
                        local_m=(bx + dx * ring + jx, by + dy * ring + jy),
                    )
                )
                idx += 1
    return plan


def _cuboid_ftus(center_m, size_m, tile_center_ftus):
    """Axis-aligned box sitting on z=0, as OBJ-ready ftUS vertices + quads."""
    cx, cy = center_m
    sx, sy, sz = size_m
    tx, ty = tile_center_ftus
    xs = ((cx - sx / 2.0) / M_PER_FT_US + tx, (cx + sx / 2.0) / M_PER_FT_US + tx)
    ys = ((cy - sy / 2.0) / M_PER_FT_US + ty, (cy + sy / 2.0) / M_PER_FT_US + ty)
    zs = (0.0, sz / M_PER_FT_US)
    verts = [
        (xs[0], ys[0], zs[0]), (xs[1], ys[0], zs[0]), (xs[1], ys[1], zs[0]), (xs[0], ys[1], zs[0]),
        (xs[0], ys[0], zs[1]), (xs[1], ys[0], zs[1]), (xs[1], ys[1], zs[1]), (xs[0], ys[1], zs[1]),
    ]
    faces = [
        [0, 3, 2, 1],  # bottom, outward -z
        [4, 5, 6, 7],  # top
        [0, 1, 5, 4],  # south
        [1, 2, 6, 5],  # east
        [2, 3, 7, 6],  # north
        [3, 0, 4, 7],  # west
    ]
    return np.array(verts, dtype=np.float64), faces


@dataclass
class SynthReport:
    spec: SynthSpec
    out_root: str
    source_dir: str
    source_csv: str
    antennas_path: str
    truth_path: str
    convert: ConvertReport

    @property
    def n_models(self) -> int:
        return len(self.convert.converted)

    @property
    def n_antennas(self) -> int:
        return len(json.load(open(self.truth_path))["antennas"])


def generate_dataset(
    spec: SynthSpec,
    out_root,
    crs: SourceCrs = DEFAULT_SOURCE_CRS,
    threads: int = 1,
) -> SynthReport:
    """Emit the synthetic dataset and convert it in place."""
    out_root = str(out_root)
    plan = plan_city(spec)
    tc = tile_center_ft(spec.tile_name)

    source_dir = os.path.join(out_root, "source")
    os.makedirs(source_dir, exist_ok=True)
    for m in plan.models:
        verts, faces = _cuboid_ftus(m.center_m, m.size_m, tc)
        write_obj(os.path.join(source_dir, m.file_name), verts, faces)
    source_csv = os.path.join(source_dir, f"{spec.tile_name}_models.csv")
    with open(source_csv, "w", encoding="utf-8", newline="") as fh:
        fh.write("model_id,file_name,model_type,lod\n")
        for m in plan.models:
            fh.write(f"{m.model_id},{m.file_name},{m.model_type},{m.lod}\n")

    ant_dir = os.path.join(out_root, "antennas")
    os.makedirs(ant_dir, exist_ok=True)
    antennas_path = os.path.join(ant_dir, "antennas.geojson")
    records = []
    geo_points = []
    for a in plan.antennas:
        geo = crs.to_geo(tc[0] + a.local_m[0] / M_PER_FT_US, tc[1] + a.local_m[1] / M_PER_FT_US)
        geo_points.append(geo)
        records.append(
            AntennaRecord(antenna_id=a.antenna_id, position=geo, pole_type=a.pole_type, source="synthetic")
        )
    write_antennas(antennas_path, records)

    report = convert_tile(source_csv, source_dir, spec.tile_name, out_root, crs=crs, threads=threads)

    truth_path = os.path.join(out_root, "synth_truth.json")
    truth = {
        "spec": json.loads(spec_to_json(spec)),
        "counts": {
            "buildings": len(plan.buildings),
            "walls": len(plan.walls),
            "models": len(plan.models),
            "antennas": len(plan.antennas),
            "triangles_per_model": 12,  # 6 quads fan-triangulated
        },
        "models": [
            {
                "model_id": m.model_id,
                "model_type": m.model_type,
                "lod": m.lod,
                "file_name": m.file_name,
                "center_local_m": [m.center_m[0], m.center_m[1]],
                "size_m": list(m.size_m),
            }
            for m in plan.models
        ],
        "antennas": [
            {
                "antenna_id": a.antenna_id,
                "pole_type": a.pole_type,
                "local_m": [a.local_m[0], a.local_m[1]],
                "lon": g.lon,
                "lat": g.lat,
            }
            for a, g in zip(plan.antennas, geo_points)
        ],
    }
    with open(truth_path, "w", encoding="utf-8") as fh:
        json.dump(truth, fh, indent=2)
        fh.write("\n")

    return SynthReport(
        spec=spec,
        out_root=out_root,
        source_dir=source_dir,
        source_csv=source_csv,
        antennas_path=antennas_path,
        truth_path=truth_path,
        convert=report,
    )

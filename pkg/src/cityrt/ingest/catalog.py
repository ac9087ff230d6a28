"""Tile catalogs and tile info files (GeoJSON), plus the source CSV index.

A tile catalog is a FeatureCollection of Point features, one per model,
holding the model id, type, LOD, mesh path, and triangle count.  Unknown
properties are preserved through a read/write cycle.  The tile info file
is a single Polygon feature with the tile's name, center, and side.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

from ..errors import SchemaError
from ..geodesy import GeoCoord

_VALID_LODS = (0, 1, 2, 3)


@dataclass
class ModelRecord:
    """One converted model in a tile catalog."""

    model_id: str
    model_type: str  # Wall | Building | Ground | anything the source uses
    lod: int
    mesh: str  # path relative to the tile directory, e.g. meshes/x.ply
    n_triangles: int
    centroid: GeoCoord
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.lod not in _VALID_LODS:
            raise SchemaError(f"model {self.model_id}: LOD {self.lod!r} not in {_VALID_LODS}")
        if self.n_triangles < 0:
            raise SchemaError(f"model {self.model_id}: negative triangle count")


@dataclass
class TileInfo:
    name: str
    center: GeoCoord
    side_m: float
    boundary: list[GeoCoord]  # closed ring

    def __post_init__(self):
        if self.side_m <= 0:
            raise SchemaError(f"tile {self.name}: side must be positive")
        if len(self.boundary) < 4:
            raise SchemaError(f"tile {self.name}: boundary ring needs at least 4 points")


def _dump(path, obj) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def _load(path) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read GeoJSON: {exc}")


def write_catalog(path, records: list[ModelRecord]) -> None:
    features = []
    for r in records:
        props = {
            "model_id": r.model_id,
            "model_type": r.model_type,
            "lod": r.lod,
            "mesh": r.mesh,
            "n_triangles": r.n_triangles,
        }
        props.update(r.extras)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [r.centroid.lon, r.centroid.lat]},
                "properties": props,
            }
        )
    _dump(path, {"type": "FeatureCollection", "features": features})


_KNOWN_PROPS = {"model_id", "model_type", "lod", "mesh", "n_triangles"}


def read_catalog(path) -> list[ModelRecord]:
    doc = _load(path)
    if doc.get("type") != "FeatureCollection" or not isinstance(doc.get("features"), list):
        raise SchemaError(f"{path}: not a FeatureCollection")
    records = []
    for i, feat in enumerate(doc["features"]):
        props = feat.get("properties") or {}
        label = props.get("model_id", f"feature #{i}")
        geom = feat.get("geometry") or {}
        if geom.get("type") != "Point" or len(geom.get("coordinates", ())) < 2:
            raise SchemaError(f"{path}: {label}: geometry must be a Point")
        missing = _KNOWN_PROPS - props.keys()
        if missing:
            raise SchemaError(f"{path}: {label}: missing properties {sorted(missing)}")
        lon, lat = geom["coordinates"][:2]
        records.append(
            ModelRecord(
                model_id=str(props["model_id"]),
                model_type=str(props["model_type"]),
                lod=int(props["lod"]),
                mesh=str(props["mesh"]),
                n_triangles=int(props["n_triangles"]),
                centroid=GeoCoord(float(lon), float(lat)),
                extras={k: v for k, v in props.items() if k not in _KNOWN_PROPS},
            )
        )
    return records


def write_tileinfo(path, info: TileInfo) -> None:
    ring = [[g.lon, g.lat] for g in info.boundary]
    _dump(
        path,
        {
            "type": "Feature",
            "geometry": {"type": "Polygon", "coordinates": [ring]},
            "properties": {
                "name": info.name,
                "center": [info.center.lon, info.center.lat],
                "side_m": info.side_m,
            },
        },
    )


def read_tileinfo(path) -> TileInfo:
    doc = _load(path)
    props = doc.get("properties") or {}
    geom = doc.get("geometry") or {}
    if doc.get("type") != "Feature" or geom.get("type") != "Polygon":
        raise SchemaError(f"{path}: tile info must be a Polygon feature")
    for key in ("name", "center", "side_m"):
        if key not in props:
            raise SchemaError(f"{path}: tile info missing property {key!r}")
    ring = geom.get("coordinates", [[]])[0]
    return TileInfo(
        name=str(props["name"]),
        center=GeoCoord(float(props["center"][0]), float(props["center"][1])),
        side_m=float(props["side_m"]),
        boundary=[GeoCoord(float(lon), float(lat)) for lon, lat in ring],
    )


@dataclass
class SourceModel:
    """A row of the source CSV index shipped with the raw OBJ files."""

    model_id: str
    file_name: str
    model_type: str
    lod: int


_CSV_ALIASES = {
    "model_id": ("model_id", "model id", "id"),
    "file_name": ("file_name", "file", "filename", "file name"),
    "model_type": ("model_type", "type", "model type"),
    "lod": ("lod", "level_of_detail", "level of detail"),
}


def read_source_catalog(path) -> list[SourceModel]:
    """Parse a source model index, CSV or GeoJSON, by file extension.

    CSV column names (and GeoJSON feature property names) match the
    alias table case-insensitively.
    """
    if str(path).lower().endswith((".geojson", ".json")):
        return _read_source_geojson(path)
    try:
        with open(path, "r", encoding="utf-8-sig", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise SchemaError(f"{path}: empty CSV")
            lookup = {}
            for want, aliases in _CSV_ALIASES.items():
                for col in reader.fieldnames:
                    if col.strip().lower().replace("-", "_") in aliases:
                        lookup[want] = col
                        break
                if want not in lookup:
                    raise SchemaError(f"{path}: missing column {want!r} (have {reader.fieldnames})")
            out = []
            for i, row in enumerate(reader, start=2):
                try:
                    lod = int(float(row[lookup["lod"]]))
                except (TypeError, ValueError):
                    raise SchemaError(f"{path}:{i}: bad LOD value {row[lookup['lod']]!r}")
                out.append(
                    SourceModel(
                        model_id=row[lookup["model_id"]].strip(),
                        file_name=row[lookup["file_name"]].strip(),
                        model_type=row[lookup["model_type"]].strip(),
                        lod=lod,
                    )
                )
            return out
    except OSError as exc:
        raise SchemaError(f"{path}: cannot read source catalog: {exc}")


def _read_source_geojson(path) -> list[SourceModel]:
    doc = _load(path)
    if doc.get("type") != "FeatureCollection" or "features" not in doc:
        raise SchemaError(f"{path}: expected a GeoJSON FeatureCollection")
    out = []
    for i, feat in enumerate(doc["features"]):
        props = feat.get("properties") or {}
        lowered = {str(k).strip().lower().replace("-", "_"): v for k, v in props.items()}
        row = {}
        for want, aliases in _CSV_ALIASES.items():
            for name in aliases:
                if name in lowered:
                    row[want] = lowered[name]
                    break
            if want not in row:
                raise SchemaError(f"{path}: feature {i}: missing property {want!r}")
        try:
            lod = int(float(row["lod"]))
        except (TypeError, ValueError):
            raise SchemaError(f"{path}: feature {i}: bad LOD value {row['lod']!r}")
        out.append(
            SourceModel(
                model_id=str(row["model_id"]).strip(),
                file_name=str(row["file_name"]).strip(),
                model_type=str(row["model_type"]).strip(),
                lod=lod,
            )
        )
    return out

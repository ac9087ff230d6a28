"""Antenna/pole registries: GeoJSON reading, column mapping, dataset merge.

City pole exports change column names across vintages; a configurable
alias table maps whatever the file uses onto the canonical fields.  Merging
keeps every distinct pole: records are duplicates only when they share an
id AND sit within 0.5 m, in which case the record from the later dataset
wins.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..errors import SchemaError
from ..geodesy import DEFAULT_SOURCE_CRS, M_PER_FT_US, GeoCoord, SourceCrs, lcc_forward

DUPLICATE_RADIUS_M = 0.5

# canonical field -> accepted source column spellings (lowercased)
DEFAULT_COLUMN_ALIASES = {
    "antenna_id": ("antenna_id", "id", "objectid", "object_id", "pole_id"),
    "pole_type": ("pole_type", "new_pole_type", "type", "poletype"),
}


@dataclass
class AntennaRecord:
    antenna_id: str
    position: GeoCoord
    pole_type: str | None = None
    source: str = ""
    extras: dict = field(default_factory=dict)


def _map_columns(props: dict, aliases: dict) -> dict:
    lowered = {str(k).lower(): k for k in props}
    out = {}
    for want, names in aliases.items():
        for name in names:
            if name in lowered:
                out[want] = props[lowered[name]]
                break
    return out


def read_antennas(path, source: str = "", aliases: dict | None = None) -> list[AntennaRecord]:
    """Read a Point FeatureCollection of antennas/poles."""
    aliases = aliases or DEFAULT_COLUMN_ALIASES
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"{path}: cannot read antennas: {exc}")
    if doc.get("type") != "FeatureCollection":
        raise SchemaError(f"{path}: not a FeatureCollection")
    out = []
    for i, feat in enumerate(doc.get("features", [])):
        geom = feat.get("geometry") or {}
        props = feat.get("properties") or {}
        if geom.get("type") != "Point":
            raise SchemaError(f"{path}: feature #{i}: geometry must be a Point")
        mapped = _map_columns(props, aliases)
        if "antenna_id" not in mapped:
            raise SchemaError(f"{path}: feature #{i}: no antenna id column (aliases: {aliases['antenna_id']})")
        lon, lat = geom["coordinates"][:2]
        pole = mapped.get("pole_type")
        out.append(
            AntennaRecord(
                antenna_id=str(mapped["antenna_id"]),
                position=GeoCoord(float(lon), float(lat)),
                pole_type=None if pole is None else str(pole),
                source=source,
                extras=dict(props),
            )
        )
    return out


def write_antennas(path, records: list[AntennaRecord]) -> None:
    features = []
    for r in records:
        props = {"antenna_id": r.antenna_id, "pole_type": r.pole_type, "source": r.source}
        for k, v in r.extras.items():
            props.setdefault(k, v)
        features.append(
            {
                "type": "Feature",
                "geometry": {"type": "Point", "coordinates": [r.position.lon, r.position.lat]},
                "properties": props,
            }
        )
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"type": "FeatureCollection", "features": features}, fh, indent=2)
        fh.write("\n")


def _projected_m(g: GeoCoord, crs: SourceCrs) -> tuple[float, float]:
    p = lcc_forward(g, crs.lcc)
    s = M_PER_FT_US if crs.lcc.unit.value == "us-survey-foot" else 1.0
    return p.easting * s, p.northing * s


def merge_antenna_datasets(
    datasets: list[list[AntennaRecord]],
    crs: SourceCrs = DEFAULT_SOURCE_CRS,
) -> list[AntennaRecord]:
    """Merge ordered vintages (oldest first); later records win duplicates.

    Duplicate means same antenna_id and positions within 0.5 m on the
    projection plane.  Same id further apart stays as separate records
    (distinct physical poles reusing an id).
    """
    merged: list[AntennaRecord] = []
    coords: list[tuple[float, float]] = []
    for records in datasets:
        for rec in records:
            xy = _projected_m(rec.position, crs)
            replaced = False
            for k, old in enumerate(merged):
                if old.antenna_id != rec.antenna_id:
                    continue
                if math.hypot(xy[0] - coords[k][0], xy[1] - coords[k][1]) <= DUPLICATE_RADIUS_M:
                    merged[k] = rec  # newer vintage wins
                    coords[k] = xy
                    replaced = True
                    break
            if not replaced:
                merged.append(rec)
                coords.append(xy)
    return merged

"""Tile naming: <PREFIX>_<letter>_<row> squares on the dataset grid.

Tiles are 5000 ftUS squares anchored at the dataset's custom origin:
column letters advance east (A is the first column), row numbers advance
south.  The tile center sits at

    origin + ((col + 0.5) * 5000, (14.5 - row) * 5000)   [ftUS]

with col(A) = 1, a convention recovered by fitting the published tile
centers (all 31 reference tiles land within 9e-6 degrees).
"""

from __future__ import annotations

import re

from ..errors import InputError
from ..geodesy import DEFAULT_SOURCE_CRS, M_PER_FT_US, GeoCoord, SourceCrs

TILE_SIDE_FT = 5000.0
TILE_SIDE_M = TILE_SIDE_FT * M_PER_FT_US  # 1524.003 m
_ROW_ANCHOR = 14.5  # grid rows count southward from the top of the lettered block

_NAME_RE = re.compile(r"^([A-Za-z0-9]+)_([A-Z])_([0-9]{1,3})$")


def parse_tile_name(name: str) -> tuple[str, int, int]:
    """Split a tile name into (prefix, column index from 1, row number)."""
    m = _NAME_RE.match(name)
    if not m:
        raise InputError(
            f"bad tile name {name!r}: expected <PREFIX>_<column letter>_<row number>, e.g. BOS_F_4"
        )
    prefix, letter, row = m.groups()
    return prefix, ord(letter) - ord("A") + 1, int(row)


def tile_center_ft(name: str) -> tuple[float, float]:
    """Tile center in dataset-relative ftUS."""
    _, col, row = parse_tile_name(name)
    return ((col + 0.5) * TILE_SIDE_FT, (_ROW_ANCHOR - row) * TILE_SIDE_FT)


def tile_bounds_ft(name: str) -> tuple[float, float, float, float]:
    """(min_e, min_n, max_e, max_n) in dataset-relative ftUS."""
    ce, cn = tile_center_ft(name)
    h = TILE_SIDE_FT / 2.0
    return (ce - h, cn - h, ce + h, cn + h)


def tile_center(name: str, crs: SourceCrs = DEFAULT_SOURCE_CRS) -> GeoCoord:
    """Geographic tile center."""
    ce, cn = tile_center_ft(name)
    return crs.to_geo(ce, cn)


def tile_boundary(name: str, crs: SourceCrs = DEFAULT_SOURCE_CRS) -> list[GeoCoord]:
    """Closed geographic ring (5 points) of the tile square."""
    e0, n0, e1, n1 = tile_bounds_ft(name)
    corners = [(e0, n0), (e1, n0), (e1, n1), (e0, n1), (e0, n0)]
    return [crs.to_geo(e, n) for e, n in corners]

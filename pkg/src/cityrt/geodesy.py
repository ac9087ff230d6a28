"""Coordinate systems: map projection, source CRS, local scene frames.

The source data lives in a Lambert Conformal Conic state-plane zone
expressed in US survey feet, with a dataset-specific false origin
subtracted.  Scenes work in a local east/north/up meter frame anchored at
a geographic origin; conversion goes through the projection in meters, so
local frames inherit the (small) conic distortion instead of introducing
a second approximation.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

# US survey foot, exact by definition
FT_US_PER_M = 3937.0 / 1200.0
M_PER_FT_US = 1200.0 / 3937.0


class Unit(str, enum.Enum):
    METER = "meter"
    US_SURVEY_FOOT = "us-survey-foot"


def length_to_meters(value: float, unit: Unit) -> float:
    """Convert a length in the given unit to meters (exact ratios)."""
    if unit == Unit.METER:
        return float(value)
    if unit == Unit.US_SURVEY_FOOT:
        return float(value) * M_PER_FT_US
    raise DomainError(f"unknown length unit: {unit!r}")


@dataclass(frozen=True)
class GeoCoord:
    """Geographic position, degrees east/north, ellipsoidal meters up."""

    lon: float
    lat: float
    alt: float = 0.0

    def __post_init__(self):
        if not (-180.0 <= self.lon <= 180.0):
            raise DomainError(f"longitude out of range: {self.lon}")
        if not (-90.0 <= self.lat <= 90.0):
            raise DomainError(f"latitude out of range: {self.lat}")


@dataclass(frozen=True)
class ProjectedCoord:
    """Position on the projection plane, in the zone's unit."""

    easting: float
    northing: float
    unit: Unit = Unit.US_SURVEY_FOOT


@dataclass(frozen=True)
class LccSpec:
    """Lambert Conformal Conic, two standard parallels, on GRS80.

    False easting/northing are stored in `unit`; all internal math is
    metric.  Matches the EPSG two-parallel formulation.
    """

    phi1_deg: float
    phi2_deg: float
    phi0_deg: float
    lon0_deg: float
    false_easting: float
    false_northing: float
    unit: Unit = Unit.US_SURVEY_FOOT
    a: float = 6378137.0
    inv_flattening: float = 298.257222101

    def __post_init__(self):
        if math.isclose(self.phi1_deg, -self.phi2_deg):
            raise DomainError("standard parallels must not be symmetric about the equator")


@lru_cache(maxsize=8)
def _derived(spec: LccSpec):
    """Projection constants n, F, r0 and ellipsoid e, e2 for a spec."""
    a = spec.a
    f = 1.0 / spec.inv_flattening
    e2 = 2.0 * f - f * f
    e = math.sqrt(e2)

    def m_of(phi):
        return math.cos(phi) / math.sqrt(1.0 - e2 * math.sin(phi) ** 2)

    def t_of(phi):
        h = ((1.0 - e * math.sin(phi)) / (1.0 + e * math.sin(phi))) ** (e / 2.0)
        return math.tan(math.pi / 4.0 - phi / 2.0) / h

    phi1 = math.radians(spec.phi1_deg)
    phi2 = math.radians(spec.phi2_deg)
    phi0 = math.radians(spec.phi0_deg)
    m1, m2 = m_of(phi1), m_of(phi2)
    t1, t2 = t_of(phi1), t_of(phi2)
    if math.isclose(phi1, phi2):
        n = math.sin(phi1)
    else:
        n = (math.log(m1) - math.log(m2)) / (math.log(t1) - math.log(t2))
    F = m1 / (n * t1 ** n)
    r0 = a * F * t_of(phi0) ** n
    to_unit = 1.0 if spec.unit == Unit.METER else FT_US_PER_M
    return a, e, e2, n, F, r0, math.radians(spec.lon0_deg), to_unit


def lcc_forward_arrays(lon_deg, lat_deg, spec: LccSpec):
    """Vectorized forward projection; returns (easting, northing) in spec.unit."""
    a, e, e2, n, F, r0, lam0, to_unit = _derived(spec)
    lam = np.radians(np.asarray(lon_deg, dtype=np.float64))
    phi = np.radians(np.asarray(lat_deg, dtype=np.float64))
    sphi = np.sin(phi)
    h = ((1.0 - e * sphi) / (1.0 + e * sphi)) ** (e / 2.0)
    t = np.tan(np.pi / 4.0 - phi / 2.0) / h
    r = a * F * t ** n
    th = n * (lam - lam0)
    E = spec.false_easting + (r * np.sin(th)) * to_unit
    N = spec.false_northing + (r0 - r * np.cos(th)) * to_unit
    return E, N


def lcc_inverse_arrays(easting, northing, spec: LccSpec):
    """Vectorized inverse projection; returns (lon_deg, lat_deg)."""
    a, e, e2, n, F, r0, lam0, to_unit = _derived(spec)
    E = (np.asarray(easting, dtype=np.float64) - spec.false_easting) / to_unit
    N = (np.asarray(northing, dtype=np.float64) - spec.false_northing) / to_unit
    rp = np.hypot(E, r0 - N)
    if n < 0:
        rp = -rp
    tp = (rp / (a * F)) ** (1.0 / n)
    lam = np.arctan2(E, r0 - N) / n + lam0
    phi = np.pi / 2.0 - 2.0 * np.arctan(tp)
    # fixed-point iteration from the EPSG formulation; converges fast, e is small
    for _ in range(24):
        sphi = np.sin(phi)
        h = ((1.0 - e * sphi) / (1.0 + e * sphi)) ** (e / 2.0)
        new = np.pi / 2.0 - 2.0 * np.arctan(tp * h)
        if np.all(np.abs(new - phi) < 1e-14):
            phi = new
            break
        phi = new
    return np.degrees(lam), np.degrees(phi)


def lcc_forward(geo: GeoCoord, spec: LccSpec) -> ProjectedCoord:
    """Project a geographic coordinate into the zone."""
    E, N = lcc_forward_arrays(geo.lon, geo.lat, spec)
    return ProjectedCoord(float(E), float(N), spec.unit)


def lcc_inverse(p: ProjectedCoord, spec: LccSpec) -> GeoCoord:
    """Unproject zone coordinates back to geographic degrees."""
    if p.unit != spec.unit:
        raise DomainError(f"coordinate unit {p.unit.value} does not match zone unit {spec.unit.value}")
    lon, lat = lcc_inverse_arrays(p.easting, p.northing, spec)
    return GeoCoord(float(lon), float(lat))


# NAD83 / Massachusetts Mainland (state plane), false origin in ftUS.
MASS_MAINLAND = LccSpec(
    phi1_deg=42.0 + 41.0 / 60.0,
    phi2_deg=41.0 + 43.0 / 60.0,
    phi0_deg=41.0,
    lon0_deg=-71.5,
    false_easting=200000.0 * FT_US_PER_M,
    false_northing=750000.0 * FT_US_PER_M,
    unit=Unit.US_SURVEY_FOOT,
)


@dataclass(frozen=True)
class SourceCrs:
    """CRS of the source dataset: a zone plus the dataset's false origin.

    Source model coordinates are zone coordinates minus `custom_origin`
    (same unit as the zone).
    """

    lcc: LccSpec = MASS_MAINLAND
    custom_origin: ProjectedCoord = ProjectedCoord(731100.0, 2902900.0, Unit.US_SURVEY_FOOT)

    def __post_init__(self):
        if self.custom_origin.unit != self.lcc.unit:
            raise DomainError("custom origin unit must match the zone unit")

    def dataset_to_zone(self, easting: float, northing: float) -> ProjectedCoord:
        return ProjectedCoord(
            easting + self.custom_origin.easting,
            northing + self.custom_origin.northing,
            self.lcc.unit,
        )

    def to_geo(self, easting: float, northing: float) -> GeoCoord:
        """Dataset-relative coordinates (zone unit) -> geographic."""
        return lcc_inverse(self.dataset_to_zone(easting, northing), self.lcc)


DEFAULT_SOURCE_CRS = SourceCrs()


@dataclass(frozen=True)
class LocalFrame:
    """Scene frame: east/north/up meters around a geographic origin.

    x/y are projected-coordinate differences in meters (not a tangent
    plane), so frames compose exactly with the source CRS.  z is altitude
    above the origin's altitude.
    """

    origin: GeoCoord
    crs: SourceCrs = field(default_factory=lambda: DEFAULT_SOURCE_CRS)
    unit: Unit = Unit.METER

    def __post_init__(self):
        if self.unit != Unit.METER:
            raise DomainError("local frames are metric")


def _origin_m(frame: LocalFrame):
    spec = frame.crs.lcc
    p = lcc_forward(frame.origin, spec)
    s = M_PER_FT_US if spec.unit == Unit.US_SURVEY_FOOT else 1.0
    return p.easting * s, p.northing * s


def geo_to_local(geo: GeoCoord, frame: LocalFrame) -> tuple[float, float, float]:
    """Geographic -> local (x east, y north, z up) meters."""
    spec = frame.crs.lcc
    p = lcc_forward(geo, spec)
    s = M_PER_FT_US if spec.unit == Unit.US_SURVEY_FOOT else 1.0
    ox, oy = _origin_m(frame)
    return (p.easting * s - ox, p.northing * s - oy, geo.alt - frame.origin.alt)


def local_to_geo(xyz, frame: LocalFrame) -> GeoCoord:
    """Local meters -> geographic; inverse of geo_to_local."""
    x, y, z = (float(v) for v in xyz)
    spec = frame.crs.lcc
    s = M_PER_FT_US if spec.unit == Unit.US_SURVEY_FOOT else 1.0
    ox, oy = _origin_m(frame)
    p = ProjectedCoord((x + ox) / s, (y + oy) / s, spec.unit)
    g = lcc_inverse(p, spec)
    return GeoCoord(g.lon, g.lat, z + frame.origin.alt)


def geo_to_local_arrays(lon_deg, lat_deg, alt, frame: LocalFrame):
    """Vectorized geo_to_local for coordinate arrays."""
    spec = frame.crs.lcc
    E, N = lcc_forward_arrays(lon_deg, lat_deg, spec)
    s = M_PER_FT_US if spec.unit == Unit.US_SURVEY_FOOT else 1.0
    ox, oy = _origin_m(frame)
    return E * s - ox, N * s - oy, np.asarray(alt, dtype=np.float64) - frame.origin.alt

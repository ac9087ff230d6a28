"""Scene assembly: placed meshes, antennas, and radio devices in a local frame.

A scene is built either from one tile (frame on the tile center) or from
a disc query across tiles (frame on the query center).  Membership is
decided by catalog centroid: a building straddling the disc edge is in
or out as a whole.  Both constructors add a ground plane.
"""

from __future__ import annotations

import glob
import logging
import math
import os
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptySceneError, NotFoundError, PlacementError
from ..geodesy import (
    DEFAULT_SOURCE_CRS,
    GeoCoord,
    LocalFrame,
    SourceCrs,
    geo_to_local,
    local_to_geo,
)
from ..ingest import AntennaRecord, ModelRecord, read_antennas, read_catalog, read_ply, read_tileinfo
from ..mesh import TriangleMesh
from .materials import Material, MaterialTable, assign_material, default_materials

log = logging.getLogger(__name__)

GROUND_MODEL_ID = "__ground__"
GROUND_MARGIN = 0.10  # ground rectangle exceeds the boundary bbox by this fraction

TX_DEFAULT_HEIGHT_M = 10.0
RX_DEFAULT_HEIGHT_M = 1.5
DEFAULT_POLE_HEIGHT_M = 10.0
DEFAULT_SECTOR_AZIMUTHS = (0.0, 120.0, 240.0)

CITY3D_DIR = "city3d"
ANTENNAS_FILE = os.path.join("antennas", "antennas.geojson")


@dataclass(frozen=True)
class Sector:
    """One transmit sector; azimuth 0 deg = local +y (north), clockwise.

    Positive downtilt points the boresight below the horizon.
    """

    azimuth_deg: float
    width_deg: float = 120.0
    downtilt_deg: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.width_deg <= 360.0:
            raise PlacementError(f"sector width must be in (0, 360], got {self.width_deg}")
        if not (math.isfinite(self.azimuth_deg) and math.isfinite(self.downtilt_deg)):
            raise PlacementError("sector azimuth and downtilt must be finite")


def default_sectors() -> list[Sector]:
    return [Sector(az) for az in DEFAULT_SECTOR_AZIMUTHS]


@dataclass
class RadioDevice:
    device_id: str
    role: str  # "tx" | "rx"
    position: np.ndarray  # (3,) local meters
    sectors: list = field(default_factory=list)
    source: str = "custom"  # "custom" | "catalog-antenna"

    def __post_init__(self):
        self.role = self.role.lower()
        if self.role not in ("tx", "rx"):
            raise PlacementError(f"device {self.device_id}: role must be tx or rx, got {self.role!r}")
        self.position = np.asarray(self.position, dtype=np.float64).reshape(3)
        if not np.all(np.isfinite(self.position)):
            raise PlacementError(f"device {self.device_id}: position must be finite")
        if self.position[2] < 0:
            raise PlacementError(f"device {self.device_id}: height {self.position[2]} below ground")
        if self.role == "tx" and not self.sectors:
            self.sectors = default_sectors()


@dataclass
class PlacedModel:
    model_id: str
    model_type: str
    lod: int
    mesh: TriangleMesh  # recentered, local meters
    translation: np.ndarray  # (3,) local meters
    material: Material
    mesh_file: str = ""  # source PLY path; empty for generated meshes

    def __post_init__(self):
        self.translation = np.asarray(self.translation, dtype=np.float64).reshape(3)

    def world_mesh(self) -> TriangleMesh:
        return self.mesh.translated(self.translation)


def points_in_polygon(points, ring, eps: float = 1e-9) -> np.ndarray:
    """Closed membership test (boundary points count as inside)."""
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))[:, :2]
    poly = np.asarray(ring, dtype=np.float64)[:, :2]
    if not np.array_equal(poly[0], poly[-1]):
        poly = np.vstack([poly, poly[:1]])
    a, b = poly[:-1], poly[1:]
    x, y = pts[:, 0:1], pts[:, 1:2]
    ax, ay, bx, by = a[:, 0], a[:, 1], b[:, 0], b[:, 1]
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = (bx - ax) * (y - ay) / (by - ay) + ax
        inside = (((ay > y) != (by > y)) & (x < x_cross)).sum(axis=1) % 2 == 1
    # points within eps of an edge are inside regardless of crossing parity
    e = b - a
    elen2 = np.maximum((e * e).sum(axis=1), 1e-30)
    t = np.clip(((pts[:, None, :] - a) * e).sum(axis=2) / elen2, 0.0, 1.0)
    closest = a + t[:, :, None] * e
    d2 = ((pts[:, None, :] - closest) ** 2).sum(axis=2)
    on_edge = (d2 <= eps * eps).any(axis=1)
    return inside | on_edge


@dataclass
class Scene:
    name: str
    frame: LocalFrame
    boundary: np.ndarray  # (m, 2) closed ring, local meters
    models: list[PlacedModel] = field(default_factory=list)
    antennas: list[AntennaRecord] = field(default_factory=list)
    devices: list[RadioDevice] = field(default_factory=list)

    def __post_init__(self):
        self.boundary = np.asarray(self.boundary, dtype=np.float64)
        if self.boundary.ndim != 2 or self.boundary.shape[1] != 2 or self.boundary.shape[0] < 4:
            raise PlacementError("boundary must be a closed (m, 2) ring with m >= 4")
        if not np.array_equal(self.boundary[0], self.boundary[-1]):
            self.boundary = np.vstack([self.boundary, self.boundary[:1]])

    @property
    def has_ground(self) -> bool:
        return any(m.model_id == GROUND_MODEL_ID for m in self.models)

    @property
    def catalog_models(self) -> list[PlacedModel]:
        """Models that came from a catalog (everything but the ground)."""
        return [m for m in self.models if m.model_id != GROUND_MODEL_ID]

    def contains_xy(self, points) -> np.ndarray:
        return points_in_polygon(points, self.boundary)

    def world_meshes(self) -> list[tuple[TriangleMesh, Material]]:
        return [(m.world_mesh(), m.material) for m in self.models]

    def model(self, model_id: str) -> PlacedModel:
        for m in self.models:
            if m.model_id == model_id:
                return m
        raise NotFoundError(
            f"model {model_id!r} not in scene {self.name}",
            available=[m.model_id for m in self.models],
        )

    def device(self, device_id: str) -> RadioDevice:
        for d in self.devices:
            if d.device_id == device_id:
                return d
        raise NotFoundError(
            f"device {device_id!r} not in scene {self.name}",
            available=[d.device_id for d in self.devices],
        )

    def antenna(self, antenna_id: str) -> AntennaRecord:
        for a in self.antennas:
            if a.antenna_id == antenna_id:
                return a
        raise NotFoundError(
            f"antenna {antenna_id!r} not in scene {self.name}",
            available=[a.antenna_id for a in self.antennas],
        )


def _city3d(root) -> str:
    return os.path.join(str(root), CITY3D_DIR)


def available_tiles(root) -> list[str]:
    infos = glob.glob(os.path.join(_city3d(root), "*_tileinfo.geojson"))
    return sorted(os.path.basename(p)[: -len("_tileinfo.geojson")] for p in infos)


def _place_models(
    root,
    records: list[ModelRecord],
    frame: LocalFrame,
    table: MaterialTable,
    type_materials: "dict | None",
) -> list[PlacedModel]:
    out = []
    for rec in records:
        mesh_file = os.path.join(_city3d(root), rec.mesh)
        if not os.path.exists(mesh_file):
            raise NotFoundError(f"model {rec.model_id}: mesh {rec.mesh!r} missing under {_city3d(root)}")
        out.append(
            PlacedModel(
                model_id=rec.model_id,
                model_type=rec.model_type,
                lod=rec.lod,
                mesh=read_ply(mesh_file),
                translation=geo_to_local(rec.centroid, frame),
                material=assign_material(rec.model_type, table, type_materials),
                mesh_file=mesh_file,
            )
        )
    return out


def _load_antennas(root) -> list[AntennaRecord]:
    path = os.path.join(str(root), ANTENNAS_FILE)
    if not os.path.exists(path):
        return []
    return read_antennas(path)


def _antenna_xy(rec: AntennaRecord, frame: LocalFrame) -> tuple[float, float]:
    x, y, _ = geo_to_local(rec.position, frame)
    return x, y


def load_tile_scene(
    root,
    tile_name: str,
    materials: "MaterialTable | None" = None,
    type_materials: "dict | None" = None,
) -> Scene:
    """Load one converted tile as a scene (ground plane included)."""
    info_path = os.path.join(_city3d(root), f"{tile_name}_tileinfo.geojson")
    if not os.path.exists(info_path):
        raise NotFoundError(f"tile {tile_name!r} not found under {root}", available=available_tiles(root))
    info = read_tileinfo(info_path)
    table = materials if materials is not None else default_materials()
    frame = LocalFrame(origin=GeoCoord(info.center.lon, info.center.lat))
    boundary = np.array([geo_to_local(g, frame)[:2] for g in info.boundary])
    scene = Scene(name=info.name, frame=frame, boundary=boundary)
    records = read_catalog(os.path.join(_city3d(root), f"{tile_name}.geojson"))
    scene.models = _place_models(root, records, frame, table, type_materials)
    all_antennas = _load_antennas(root)
    if all_antennas:
        xy = np.array([_antenna_xy(a, frame) for a in all_antennas])
        keep = points_in_polygon(xy, boundary)
        scene.antennas = [a for a, k in zip(all_antennas, keep) if k]
    add_ground_plane(scene, table.get("itu_medium_dry_ground"))
    return scene


def extract_scene(
    root,
    center: GeoCoord,
    radius_m: float,
    materials: "MaterialTable | None" = None,
    type_materials: "dict | None" = None,
) -> Scene:
    """Build a scene from every model within radius_m of center.

    Distance is measured between projected coordinates (meters); the
    scene boundary is the disc's bounding square.  Raises an empty-scene
    error when the disc misses every tile or captures no model.
    """
    if radius_m <= 0:
        raise PlacementError(f"radius must be positive, got {radius_m}")
    table = materials if materials is not None else default_materials()
    frame = LocalFrame(origin=GeoCoord(center.lon, center.lat))
    tiles = available_tiles(root)
    if not tiles:
        raise NotFoundError(f"no tiles under {root}")

    hit_records: list[ModelRecord] = []
    disc_hits_a_tile = False
    for tile in tiles:
        info = read_tileinfo(os.path.join(_city3d(root), f"{tile}_tileinfo.geojson"))
        ring = np.array([geo_to_local(g, frame)[:2] for g in info.boundary])
        lo, hi = ring.min(axis=0), ring.max(axis=0)
        # disc vs tile bbox: clamp the center into the box, compare distance
        nearest = np.clip([0.0, 0.0], lo, hi)
        if float(np.hypot(*nearest)) > radius_m:
            continue
        disc_hits_a_tile = True
        for rec in read_catalog(os.path.join(_city3d(root), f"{tile}.geojson")):
            x, y, _ = geo_to_local(rec.centroid, frame)
            if math.hypot(x, y) <= radius_m:
                hit_records.append(rec)
    if not disc_hits_a_tile:
        raise EmptySceneError(f"disc r={radius_m} m at ({center.lon}, {center.lat}) intersects no tile")
    if not hit_records:
        raise EmptySceneError(f"no model within {radius_m} m of ({center.lon}, {center.lat})")

    r = float(radius_m)
    boundary = np.array([[-r, -r], [r, -r], [r, r], [-r, r], [-r, -r]])
    name = f"extract_{center.lon:.6f}_{center.lat:.6f}_r{r:g}"
    scene = Scene(name=name, frame=frame, boundary=boundary)
    scene.models = _place_models(root, hit_records, frame, table, type_materials)
    for rec in _load_antennas(root):
        x, y = _antenna_xy(rec, frame)
        if math.hypot(x, y) <= r:
            scene.antennas.append(rec)
    add_ground_plane(scene, table.get("itu_medium_dry_ground"))
    return scene


def add_ground_plane(scene: Scene, material: "Material | None" = None) -> Scene:
    """Add a z=0 ground rectangle over the boundary bbox with 10% margin.

    Idempotent: a scene keeps exactly one ground no matter how often this
    is called.
    """
    if scene.has_ground:
        return scene
    if material is None:
        material = default_materials()["itu_medium_dry_ground"]
    lo = scene.boundary.min(axis=0)
    hi = scene.boundary.max(axis=0)
    cx, cy = (lo + hi) / 2.0
    half = (hi - lo) * (1.0 + GROUND_MARGIN) / 2.0
    x0, x1 = cx - half[0], cx + half[0]
    y0, y1 = cy - half[1], cy + half[1]
    mesh = TriangleMesh(
        np.array([[x0, y0, 0.0], [x1, y0, 0.0], [x1, y1, 0.0], [x0, y1, 0.0]]),
        np.array([[0, 1, 2], [0, 2, 3]]),
    )
    scene.models.append(
        PlacedModel(
            model_id=GROUND_MODEL_ID,
            model_type="Ground",
            lod=0,
            mesh=mesh,
            translation=np.zeros(3),
            material=material,
        )
    )
    return scene


def _role_default_height(role: str) -> float:
    return TX_DEFAULT_HEIGHT_M if role.lower() == "tx" else RX_DEFAULT_HEIGHT_M


def place_device(
    scene: Scene,
    location,
    role: str,
    height_m: "float | None" = None,
    sectors: "list[Sector] | None" = None,
    device_id: "str | None" = None,
    source: str = "custom",
) -> RadioDevice:
    """Place a TX or RX; location is a GeoCoord or a local (x,y[,z]) tuple.

    Height resolution: explicit height_m wins, then the z of a 3-tuple,
    then the role default (TX 10 m, RX 1.5 m).
    """
    role = role.lower()
    if isinstance(location, GeoCoord):
        x, y, _ = geo_to_local(location, scene.frame)
        z = height_m if height_m is not None else _role_default_height(role)
    else:
        loc = [float(v) for v in location]
        if len(loc) not in (2, 3):
            raise PlacementError(f"local location must have 2 or 3 coordinates, got {len(loc)}")
        x, y = loc[0], loc[1]
        if height_m is not None:
            z = height_m
        elif len(loc) == 3:
            z = loc[2]
        else:
            z = _role_default_height(role)
    if not bool(points_in_polygon([[x, y]], scene.boundary)[0]):
        raise PlacementError(f"({x:.3f}, {y:.3f}) is outside the boundary of scene {scene.name}")
    if device_id is None:
        n = sum(1 for d in scene.devices if d.role == role)
        device_id = f"{role}{n}"
    if any(d.device_id == device_id for d in scene.devices):
        raise PlacementError(f"device id {device_id!r} already placed")
    dev = RadioDevice(
        device_id=device_id,
        role=role,
        position=np.array([x, y, z]),
        sectors=list(sectors) if sectors else [],
        source=source,
    )
    scene.devices.append(dev)
    return dev


def antenna_height_from_pole_type(pole_type: "str | None", table: "dict | None" = None) -> float:
    """Pole type -> mount height via a config table; unknown types get 10 m."""
    key = (pole_type or "").strip().lower()
    if table:
        lowered = {str(k).strip().lower(): float(v) for k, v in table.items()}
        if key in lowered:
            return lowered[key]
        if "default" in lowered:
            return lowered["default"]
    return DEFAULT_POLE_HEIGHT_M


def device_from_antenna(
    scene: Scene,
    antenna_id: str,
    role: str = "tx",
    heights: "dict | None" = None,
    sectors: "list[Sector] | None" = None,
    device_id: "str | None" = None,
) -> RadioDevice:
    """Turn a surveyed antenna/pole into a placed radio device."""
    rec = scene.antenna(antenna_id)
    return place_device(
        scene,
        rec.position,
        role,
        height_m=antenna_height_from_pole_type(rec.pole_type, heights),
        sectors=sectors,
        device_id=device_id if device_id is not None else f"{role}_{antenna_id}",
        source="catalog-antenna",
    )


def device_geo(scene: Scene, device: RadioDevice) -> GeoCoord:
    """Geographic read-back of a device position."""
    return local_to_geo(device.position, scene.frame)

"""Scene assembly: materials, model placement, devices, descriptors."""

from .materials import (
    DEFAULT_TYPE_MATERIALS,
    Material,
    MaterialTable,
    assign_material,
    load_materials,
)
from .scene import (
    GROUND_MODEL_ID,
    PlacedModel,
    RadioDevice,
    Scene,
    Sector,
    add_ground_plane,
    antenna_height_from_pole_type,
    available_tiles,
    default_sectors,
    device_from_antenna,
    device_geo,
    extract_scene,
    load_tile_scene,
    place_device,
)
from .descriptor import load_descriptor, write_descriptor

__all__ = [
    "DEFAULT_TYPE_MATERIALS",
    "Material",
    "MaterialTable",
    "assign_material",
    "load_materials",
    "GROUND_MODEL_ID",
    "PlacedModel",
    "RadioDevice",
    "Scene",
    "Sector",
    "add_ground_plane",
    "antenna_height_from_pole_type",
    "available_tiles",
    "default_sectors",
    "device_from_antenna",
    "device_geo",
    "extract_scene",
    "load_tile_scene",
    "place_device",
    "load_descriptor",
    "write_descriptor",
]

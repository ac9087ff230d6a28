from .obj import ObjModel, parse_obj, triangulate_faces, write_obj
from .ply import read_ply, write_ply
from .catalog import ModelRecord, SourceModel, TileInfo, read_catalog, read_source_catalog, read_tileinfo, write_catalog, write_tileinfo
from .antennas import AntennaRecord, merge_antenna_datasets, read_antennas, write_antennas
from .tiles import TILE_SIDE_FT, TILE_SIDE_M, tile_boundary, tile_bounds_ft, tile_center, tile_center_ft
from .convert import ConvertReport, SkippedModel, convert_tile

__all__ = [
    "ObjModel",
    "parse_obj",
    "triangulate_faces",
    "write_obj",
    "read_ply",
    "write_ply",
    "ModelRecord",
    "SourceModel",
    "TileInfo",
    "read_catalog",
    "read_source_catalog",
    "read_tileinfo",
    "write_catalog",
    "write_tileinfo",
    "AntennaRecord",
    "merge_antenna_datasets",
    "read_antennas",
    "write_antennas",
    "TILE_SIDE_FT",
    "TILE_SIDE_M",
    "tile_boundary",
    "tile_bounds_ft",
    "tile_center",
    "tile_center_ft",
    "ConvertReport",
    "SkippedModel",
    "convert_tile",
]

"""Radio layer: antenna patterns, link budget, coverage maps, exports."""

from .coverage import (
    FLAG_INDOOR,
    FLAG_OUTAGE,
    CoverageMap,
    building_footprint_mask,
    coverage_map,
    threshold_map,
)
from .export import export_map, import_map_csv, threshold_to_pgm
from .link import (
    V2X_REQUIREMENT,
    XR_REQUIREMENT,
    RadioConfig,
    RateRequirement,
    min_snr_for_rate,
    noise_floor_dbm,
    received_power,
    sector_gain_fn,
    shannon_capacity,
    snr_db,
)
from .pattern import DEFAULT_PATTERN, ElementPattern, element_gain, sector_angles, sector_axes, tx_gain

__all__ = [
    "DEFAULT_PATTERN",
    "ElementPattern",
    "element_gain",
    "sector_angles",
    "sector_axes",
    "tx_gain",
    "RadioConfig",
    "RateRequirement",
    "XR_REQUIREMENT",
    "V2X_REQUIREMENT",
    "min_snr_for_rate",
    "noise_floor_dbm",
    "received_power",
    "sector_gain_fn",
    "shannon_capacity",
    "snr_db",
    "CoverageMap",
    "FLAG_INDOOR",
    "FLAG_OUTAGE",
    "building_footprint_mask",
    "coverage_map",
    "threshold_map",
    "export_map",
    "import_map_csv",
    "threshold_to_pgm",
]

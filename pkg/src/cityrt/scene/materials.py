"""Electromagnetic material models.

Materials follow single-term frequency power laws for permittivity and
conductivity, with an explicit validity band per material.  The packaged
table covers the building and ground materials used by city datasets;
custom tables can be loaded from any YAML file with the same layout.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import yaml

from ..errors import NotFoundError, SchemaError

log = logging.getLogger(__name__)

VACUUM_PERMITTIVITY = 8.8541878128e-12  # F/m

# Model type -> material name used when a catalog does not say otherwise.
DEFAULT_TYPE_MATERIALS = {
    "building": "itu_concrete",
    "wall": "itu_brick",
    "bridge": "itu_concrete",
    "ground": "itu_medium_dry_ground",
}
FALLBACK_MATERIAL = "itu_concrete"


@dataclass(frozen=True)
class Material:
    """Power-law material: eps_r = a*f_GHz^b, sigma = c*f_GHz^d [S/m]."""

    name: str
    a: float
    b: float
    c: float
    d: float
    f_min_hz: float
    f_max_hz: float

    def eps_r(self, frequency_hz: float) -> float:
        return self.a * (frequency_hz / 1e9) ** self.b

    def sigma(self, frequency_hz: float) -> float:
        return self.c * (frequency_hz / 1e9) ** self.d

    def in_band(self, frequency_hz: float) -> bool:
        return self.f_min_hz <= frequency_hz <= self.f_max_hz

    def eta(self, frequency_hz: float) -> complex:
        """Complex relative permittivity eps_r - j*sigma/(2*pi*f*eps0).

        Logs a warning (once per material/frequency pair) when the
        frequency falls outside the fitted band; the power law is still
        evaluated so out-of-band studies remain possible.
        """
        if not self.in_band(frequency_hz):
            key = (self.name, float(frequency_hz))
            if key not in _warned_bands:
                _warned_bands.add(key)
                log.warning(
                    "material %s evaluated at %.4g GHz, outside fitted band "
                    "%.4g-%.4g GHz; extrapolating",
                    self.name,
                    frequency_hz / 1e9,
                    self.f_min_hz / 1e9,
                    self.f_max_hz / 1e9,
                )
        loss = self.sigma(frequency_hz) / (
            2.0 * math.pi * frequency_hz * VACUUM_PERMITTIVITY
        )
        return complex(self.eps_r(frequency_hz), -loss)


_warned_bands: set = set()

MaterialTable = dict  # name -> Material


def _packaged_table_path() -> Path:
    return Path(resources.files("cityrt").joinpath("data/materials.yaml"))


_REQUIRED_KEYS = ("a", "b", "c", "d", "f_min_ghz", "f_max_ghz")


def load_materials(path: "str | Path | None" = None) -> MaterialTable:
    """Load a material table from YAML; defaults to the packaged table."""
    src = Path(path) if path is not None else _packaged_table_path()
    if not src.exists():
        raise NotFoundError(f"material table not found: {src}")
    raw = yaml.safe_load(src.read_text())
    if not isinstance(raw, dict) or "materials" not in raw:
        raise SchemaError(f"{src}: expected a mapping with a 'materials' key")
    if "version" not in raw:
        raise SchemaError(f"{src}: material table is missing a 'version' key")
    table: MaterialTable = {}
    for name, entry in raw["materials"].items():
        if not isinstance(entry, dict):
            raise SchemaError(f"{src}: material {name!r} is not a mapping")
        missing = [k for k in _REQUIRED_KEYS if k not in entry]
        if missing:
            raise SchemaError(
                f"{src}: material {name!r} is missing keys {missing}"
            )
        table[name] = Material(
            name=name,
            a=float(entry["a"]),
            b=float(entry["b"]),
            c=float(entry["c"]),
            d=float(entry["d"]),
            f_min_hz=float(entry["f_min_ghz"]) * 1e9,
            f_max_hz=float(entry["f_max_ghz"]) * 1e9,
        )
    return table


_default_table: "MaterialTable | None" = None


def default_materials() -> MaterialTable:
    """The packaged table, loaded once per process."""
    global _default_table
    if _default_table is None:
        _default_table = load_materials()
    return _default_table


_warned_types: set = set()


def assign_material(
    model_type: str,
    table: "MaterialTable | None" = None,
    type_materials: "dict | None" = None,
) -> Material:
    """Pick the material for a catalog model type.

    Unmapped types fall back to concrete with a logged warning rather
    than failing: city exports routinely contain a handful of exotic
    type strings and a wrong wall material is a smaller error than a
    missing building.
    """
    if table is None:
        table = default_materials()
    mapping = DEFAULT_TYPE_MATERIALS if type_materials is None else type_materials
    key = model_type.strip().lower()
    name = mapping.get(key)
    if name is None:
        name = FALLBACK_MATERIAL
        if key not in _warned_types:
            _warned_types.add(key)
            log.warning(
                "model type %r has no material mapping, using %s",
                model_type,
                FALLBACK_MATERIAL,
            )
    if name not in table:
        raise NotFoundError(
            f"material {name!r} not in table", available=sorted(table)
        )
    return table[name]

"""Tool configuration: one YAML file for everything a run depends on.

The file groups projection constants, the material table, radio and
tracer defaults, and the pole-height table.  Any subset of keys may be
present; omitted keys keep their defaults.  `config_to_yaml` renders the
complete effective configuration, and every pipeline run writes that
echo next to its outputs so results stay auditable.

The tracer default here is desk-scale (10^4 launch rays); survey-scale
runs raise it via `rt.n_launch_rays` or the CLI `--rays` flag.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .errors import SchemaError
from .geodesy import MASS_MAINLAND, LccSpec, ProjectedCoord, SourceCrs, Unit
from .radio import ElementPattern, RadioConfig
from .raytrace import RtConfig
from .scene import DEFAULT_TYPE_MATERIALS, MaterialTable, load_materials

DESK_DEFAULT_RAYS = 10_000

DEFAULT_POLE_HEIGHTS_M = {
    "light": 8.0,
    "utility": 10.0,
    "traffic_signal": 6.0,
    "default": 10.0,
}

_TOP_KEYS = {"crs", "materials", "type_materials", "radio", "rt", "pole_heights_m"}


@dataclass(frozen=True)
class ToolConfig:
    crs: SourceCrs = field(default_factory=SourceCrs)
    materials: MaterialTable = field(default_factory=load_materials)
    materials_path: "str | None" = None  # None = packaged table
    type_materials: dict = field(default_factory=lambda: dict(DEFAULT_TYPE_MATERIALS))
    radio: RadioConfig = field(default_factory=RadioConfig)
    rt: RtConfig = field(default_factory=lambda: RtConfig(n_launch_rays=DESK_DEFAULT_RAYS))
    pole_heights_m: dict = field(default_factory=lambda: dict(DEFAULT_POLE_HEIGHTS_M))


def default_config() -> ToolConfig:
    return ToolConfig()


def _require_map(value, where: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(f"{where} must be a mapping, got {type(value).__name__}")
    return value


def _check_keys(doc: dict, allowed: set, where: str) -> None:
    unknown = set(doc) - allowed
    if unknown:
        raise SchemaError(f"{where}: unknown keys {sorted(unknown)}; valid keys: {sorted(allowed)}")


_CRS_KEYS = {
    "standard_parallel_1_deg", "standard_parallel_2_deg", "latitude_of_origin_deg",
    "central_meridian_deg", "false_easting", "false_northing", "unit", "dataset_origin",
}


def _parse_crs(doc: dict) -> SourceCrs:
    _check_keys(doc, _CRS_KEYS, "crs")
    unit = Unit(doc.get("unit", MASS_MAINLAND.unit.value))
    lcc = LccSpec(
        phi1_deg=float(doc.get("standard_parallel_1_deg", MASS_MAINLAND.phi1_deg)),
        phi2_deg=float(doc.get("standard_parallel_2_deg", MASS_MAINLAND.phi2_deg)),
        phi0_deg=float(doc.get("latitude_of_origin_deg", MASS_MAINLAND.phi0_deg)),
        lon0_deg=float(doc.get("central_meridian_deg", MASS_MAINLAND.lon0_deg)),
        false_easting=float(doc.get("false_easting", MASS_MAINLAND.false_easting)),
        false_northing=float(doc.get("false_northing", MASS_MAINLAND.false_northing)),
        unit=unit,
    )
    default_origin = SourceCrs().custom_origin
    origin = doc.get("dataset_origin", [default_origin.easting, default_origin.northing])
    if not isinstance(origin, (list, tuple)) or len(origin) != 2:
        raise SchemaError(f"crs.dataset_origin must be [easting, northing], got {origin!r}")
    return SourceCrs(lcc=lcc, custom_origin=ProjectedCoord(float(origin[0]), float(origin[1]), unit))


_PATTERN_KEYS = {"theta_3db_deg", "phi_3db_deg", "sla_v_db", "a_max_db", "g_max_dbi"}
_RADIO_KEYS = {
    "f_c_hz", "bandwidth_hz", "tx_power_dbm", "noise_figure_db",
    "array", "element_spacing_wl", "coherent_sum", "pattern",
}


def _parse_radio(doc: dict, base: RadioConfig) -> RadioConfig:
    _check_keys(doc, _RADIO_KEYS, "radio")
    pattern = base.element_pattern
    if "pattern" in doc:
        pdoc = _require_map(doc["pattern"], "radio.pattern")
        _check_keys(pdoc, _PATTERN_KEYS, "radio.pattern")
        pattern = ElementPattern(
            theta_3db_deg=float(pdoc.get("theta_3db_deg", pattern.theta_3db_deg)),
            phi_3db_deg=float(pdoc.get("phi_3db_deg", pattern.phi_3db_deg)),
            sla_v_db=float(pdoc.get("sla_v_db", pattern.sla_v_db)),
            a_max_db=float(pdoc.get("a_max_db", pattern.a_max_db)),
            g_max_dbi=float(pdoc.get("g_max_dbi", pattern.g_max_dbi)),
        )
    array = doc.get("array", list(base.array))
    if not isinstance(array, (list, tuple)) or len(array) != 2:
        raise SchemaError(f"radio.array must be [rows, cols], got {array!r}")
    return RadioConfig(
        f_c_hz=float(doc.get("f_c_hz", base.f_c_hz)),
        bandwidth_hz=float(doc.get("bandwidth_hz", base.bandwidth_hz)),
        tx_power_dbm=float(doc.get("tx_power_dbm", base.tx_power_dbm)),
        noise_figure_db=float(doc.get("noise_figure_db", base.noise_figure_db)),
        array=(int(array[0]), int(array[1])),
        element_spacing_wl=float(doc.get("element_spacing_wl", base.element_spacing_wl)),
        element_pattern=pattern,
        coherent_sum=bool(doc.get("coherent_sum", base.coherent_sum)),
    )


_RT_KEYS = {
    "n_launch_rays", "max_reflections", "enable_diffraction",
    "enable_scattering", "capture_radius_mode", "capture_radius_m",
}


def _parse_rt(doc: dict, base: RtConfig) -> RtConfig:
    _check_keys(doc, _RT_KEYS, "rt")
    return RtConfig(
        n_launch_rays=int(doc.get("n_launch_rays", base.n_launch_rays)),
        max_reflections=int(doc.get("max_reflections", base.max_reflections)),
        enable_diffraction=bool(doc.get("enable_diffraction", base.enable_diffraction)),
        enable_scattering=bool(doc.get("enable_scattering", base.enable_scattering)),
        capture_radius_mode=str(doc.get("capture_radius_mode", base.capture_radius_mode)),
        capture_radius_m=float(doc.get("capture_radius_m", base.capture_radius_m)),
    )


def config_from_dict(doc: dict, base_dir: "Path | None" = None) -> ToolConfig:
    """Build a ToolConfig from parsed YAML content."""
    _require_map(doc, "config")
    _check_keys(doc, _TOP_KEYS, "config")
    cfg = default_config()
    kwargs: dict = {}
    if "crs" in doc:
        kwargs["crs"] = _parse_crs(_require_map(doc["crs"], "crs"))
    if "materials" in doc:
        mp = doc["materials"]
        if not isinstance(mp, str):
            raise SchemaError(f"materials must be a path to a material table, got {mp!r}")
        path = Path(mp)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        kwargs["materials"] = load_materials(path)
        kwargs["materials_path"] = str(path)
    if "type_materials" in doc:
        tm = _require_map(doc["type_materials"], "type_materials")
        kwargs["type_materials"] = {str(k).strip().lower(): str(v) for k, v in tm.items()}
    if "radio" in doc:
        kwargs["radio"] = _parse_radio(_require_map(doc["radio"], "radio"), cfg.radio)
    if "rt" in doc:
        kwargs["rt"] = _parse_rt(_require_map(doc["rt"], "rt"), cfg.rt)
    if "pole_heights_m" in doc:
        ph = _require_map(doc["pole_heights_m"], "pole_heights_m")
        kwargs["pole_heights_m"] = {str(k).strip().lower(): float(v) for k, v in ph.items()}
    return replace(cfg, **kwargs)


def load_config(path: "str | Path | None" = None) -> ToolConfig:
    """Load the tool config; None gives all defaults."""
    if path is None:
        return default_config()
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read config {p}: {exc}") from exc
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise SchemaError(f"{p}: invalid YAML: {exc}") from exc
    if doc is None:
        doc = {}
    return config_from_dict(doc, base_dir=p.parent)


def config_to_dict(cfg: ToolConfig) -> dict:
    """Complete effective configuration with every value explicit.

    The result reloads: config_from_dict(config_to_dict(cfg)) is
    equivalent to cfg, so an echoed file can drive a rerun as-is.
    """
    doc: dict = {
        "crs": {
            "standard_parallel_1_deg": cfg.crs.lcc.phi1_deg,
            "standard_parallel_2_deg": cfg.crs.lcc.phi2_deg,
            "latitude_of_origin_deg": cfg.crs.lcc.phi0_deg,
            "central_meridian_deg": cfg.crs.lcc.lon0_deg,
            "false_easting": cfg.crs.lcc.false_easting,
            "false_northing": cfg.crs.lcc.false_northing,
            "unit": cfg.crs.lcc.unit.value,
            "dataset_origin": [cfg.crs.custom_origin.easting, cfg.crs.custom_origin.northing],
        },
        "type_materials": dict(sorted(cfg.type_materials.items())),
        "radio": {
            "f_c_hz": cfg.radio.f_c_hz,
            "bandwidth_hz": cfg.radio.bandwidth_hz,
            "tx_power_dbm": cfg.radio.tx_power_dbm,
            "noise_figure_db": cfg.radio.noise_figure_db,
            "array": list(cfg.radio.array),
            "element_spacing_wl": cfg.radio.element_spacing_wl,
            "coherent_sum": cfg.radio.coherent_sum,
            "pattern": {
                "theta_3db_deg": cfg.radio.element_pattern.theta_3db_deg,
                "phi_3db_deg": cfg.radio.element_pattern.phi_3db_deg,
                "sla_v_db": cfg.radio.element_pattern.sla_v_db,
                "a_max_db": cfg.radio.element_pattern.a_max_db,
                "g_max_dbi": cfg.radio.element_pattern.g_max_dbi,
            },
        },
        "rt": {
            "n_launch_rays": cfg.rt.n_launch_rays,
            "max_reflections": cfg.rt.max_reflections,
            "enable_diffraction": cfg.rt.enable_diffraction,
            "enable_scattering": cfg.rt.enable_scattering,
            "capture_radius_mode": cfg.rt.capture_radius_mode,
            "capture_radius_m": cfg.rt.capture_radius_m,
        },
        "pole_heights_m": dict(sorted(cfg.pole_heights_m.items())),
    }
    if cfg.materials_path is not None:
        doc["materials"] = cfg.materials_path
    return doc


def config_to_yaml(cfg: ToolConfig) -> str:
    return yaml.safe_dump(config_to_dict(cfg), sort_keys=False, default_flow_style=False)


def write_effective_config(cfg: ToolConfig, path) -> str:
    """Write the YAML echo next to a run's outputs; returns the path."""
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(config_to_yaml(cfg), encoding="utf-8")
    return str(p)

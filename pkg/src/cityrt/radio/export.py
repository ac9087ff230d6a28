"""Coverage-map serialization: exact-value CSV and 16-bit PGM preview.

Both formats carry the full radio and tracer configuration as
``# key=value`` comment lines so a map file is self-describing.  CSV
floats are written with repr and re-import bit-exactly; the PGM is a
big-endian 16-bit grayscale image of SNR linearly quantized over a
range declared in its header (pixel 0 is reserved for no-data cells).
"""

from __future__ import annotations

import csv
import io

import numpy as np

from ..errors import DomainError, SchemaError
from ..raytrace import RtConfig
from .coverage import CoverageMap
from .link import RadioConfig, RateRequirement
from .pattern import ElementPattern

FORMAT_NAME = "cityrt-coverage"
CSV_COLUMNS = "x,y,best_tx,snr_db,capacity_bps,flags"

PGM_NO_DATA = 0  # reserved pixel value for indoor / outage cells
PGM_LEVELS = 65534  # SNR levels 1..65535


def _f(value) -> str:
    return repr(float(value))


def _header_lines(cov: CoverageMap) -> list[str]:
    r, t, p = cov.radio, cov.rt, cov.radio.element_pattern
    return [
        f"format={FORMAT_NAME}",
        f"scene={cov.scene_name}",
        "tx=" + ";".join(cov.tx_ids),
        f"map.origin_x={_f(cov.origin[0])}",
        f"map.origin_y={_f(cov.origin[1])}",
        f"map.cell_size_m={_f(cov.cell_size_m)}",
        f"map.rx_height_m={_f(cov.rx_height_m)}",
        f"map.nx={cov.nx}",
        f"map.ny={cov.ny}",
        f"radio.f_c_hz={_f(r.f_c_hz)}",
        f"radio.bandwidth_hz={_f(r.bandwidth_hz)}",
        f"radio.tx_power_dbm={_f(r.tx_power_dbm)}",
        f"radio.noise_figure_db={_f(r.noise_figure_db)}",
        f"radio.array_rows={r.array[0]}",
        f"radio.array_cols={r.array[1]}",
        f"radio.element_spacing_wl={_f(r.element_spacing_wl)}",
        f"radio.coherent_sum={r.coherent_sum}",
        f"radio.pattern.theta_3db_deg={_f(p.theta_3db_deg)}",
        f"radio.pattern.phi_3db_deg={_f(p.phi_3db_deg)}",
        f"radio.pattern.sla_v_db={_f(p.sla_v_db)}",
        f"radio.pattern.a_max_db={_f(p.a_max_db)}",
        f"radio.pattern.g_max_dbi={_f(p.g_max_dbi)}",
        f"rt.n_launch_rays={t.n_launch_rays}",
        f"rt.max_reflections={t.max_reflections}",
        f"rt.enable_diffraction={t.enable_diffraction}",
        f"rt.enable_scattering={t.enable_scattering}",
        f"rt.capture_radius_mode={t.capture_radius_mode}",
        f"rt.capture_radius_m={_f(t.capture_radius_m)}",
    ]


def export_map(cov: CoverageMap, format: str = "csv") -> bytes:
    fmt = format.strip().lower()
    if fmt == "csv":
        return _to_csv(cov)
    if fmt == "pgm":
        return _to_pgm(cov)
    raise DomainError(f"unknown map format {format!r}; use csv or pgm")


def _to_csv(cov: CoverageMap) -> bytes:
    buf = io.StringIO()
    for line in _header_lines(cov):
        buf.write(f"# {line}\n")
    buf.write(CSV_COLUMNS + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    centers = cov.cell_centers()
    for iy in range(cov.ny):
        for ix in range(cov.nx):
            writer.writerow(
                [
                    _f(centers[iy, ix, 0]),
                    _f(centers[iy, ix, 1]),
                    cov.best_tx[iy, ix],
                    _f(cov.snr_db[iy, ix]),
                    _f(cov.capacity_bps[iy, ix]),
                    cov.flags[iy, ix],
                ]
            )
    return buf.getvalue().encode("utf-8")


def _to_pgm(cov: CoverageMap) -> bytes:
    finite = cov.snr_db[np.isfinite(cov.snr_db)]
    if finite.size:
        lo, hi = float(finite.min()), float(finite.max())
    else:
        lo, hi = 0.0, 1.0
    if hi <= lo:
        hi = lo + 1.0
    quant = np.zeros(cov.snr_db.shape, dtype=np.uint16)
    mask = np.isfinite(cov.snr_db)
    levels = np.rint((cov.snr_db[mask] - lo) / (hi - lo) * PGM_LEVELS)
    quant[mask] = (1 + np.clip(levels, 0, PGM_LEVELS)).astype(np.uint16)
    header = io.StringIO()
    header.write("P5\n")
    for line in _header_lines(cov):
        header.write(f"# {line}\n")
    header.write(f"# map.snr_lo_db={_f(lo)}\n")
    header.write(f"# map.snr_hi_db={_f(hi)}\n")
    header.write(f"# quant: 0 = no data; v -> snr_lo_db + (v - 1) / {PGM_LEVELS} * (snr_hi_db - snr_lo_db)\n")
    header.write("# raster rows run north to south (top row is the highest y)\n")
    header.write(f"{cov.nx} {cov.ny}\n65535\n")
    return header.getvalue().encode("ascii") + np.flipud(quant).astype(">u2").tobytes()


def threshold_to_pgm(cov: CoverageMap, mask: np.ndarray, requirement: RateRequirement) -> bytes:
    """Boolean rate-feasibility raster: 1 where the requirement is met.

    Same orientation and header conventions as the SNR raster; the
    requirement is recorded so the file is self-describing.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != cov.snr_db.shape:
        raise DomainError(f"mask shape {mask.shape} does not match map {cov.snr_db.shape}")
    header = io.StringIO()
    header.write("P5\n")
    for line in _header_lines(cov):
        header.write(f"# {line}\n")
    header.write(f"# requirement.name={requirement.name}\n")
    header.write(f"# requirement.rate_bps={_f(requirement.rate_bps)}\n")
    header.write("# quant: 1 = requirement met, 0 = not met (or indoor/outage)\n")
    header.write("# raster rows run north to south (top row is the highest y)\n")
    header.write(f"{cov.nx} {cov.ny}\n1\n")
    return header.getvalue().encode("ascii") + np.flipud(mask).astype(np.uint8).tobytes()


def _meta_value(meta: dict, key: str, source: str) -> str:
    if key not in meta:
        raise SchemaError(f"{source}: missing header line {key!r}")
    return meta[key]


def _bool(text: str) -> bool:
    return text == "True"


def import_map_csv(data) -> CoverageMap:
    """Rebuild a CoverageMap from export_map(..., "csv") output, exactly."""
    text = data.decode("utf-8") if isinstance(data, (bytes, bytearray)) else str(data)
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            stripped = line[1:].strip()
            if "=" in stripped:
                key, _, value = stripped.partition("=")
                meta[key] = value
        elif line.strip():
            body.append(line)
    src = "coverage csv"
    if meta.get("format") != FORMAT_NAME:
        raise SchemaError(f"{src}: not a {FORMAT_NAME} file")
    if not body or body[0] != CSV_COLUMNS:
        raise SchemaError(f"{src}: missing column header {CSV_COLUMNS!r}")

    nx = int(_meta_value(meta, "map.nx", src))
    ny = int(_meta_value(meta, "map.ny", src))
    rows = list(csv.reader(body[1:]))
    if len(rows) != nx * ny:
        raise SchemaError(f"{src}: expected {nx * ny} rows, found {len(rows)}")

    pattern = ElementPattern(
        theta_3db_deg=float(_meta_value(meta, "radio.pattern.theta_3db_deg", src)),
        phi_3db_deg=float(_meta_value(meta, "radio.pattern.phi_3db_deg", src)),
        sla_v_db=float(_meta_value(meta, "radio.pattern.sla_v_db", src)),
        a_max_db=float(_meta_value(meta, "radio.pattern.a_max_db", src)),
        g_max_dbi=float(_meta_value(meta, "radio.pattern.g_max_dbi", src)),
    )
    radio = RadioConfig(
        f_c_hz=float(_meta_value(meta, "radio.f_c_hz", src)),
        bandwidth_hz=float(_meta_value(meta, "radio.bandwidth_hz", src)),
        tx_power_dbm=float(_meta_value(meta, "radio.tx_power_dbm", src)),
        noise_figure_db=float(_meta_value(meta, "radio.noise_figure_db", src)),
        array=(int(_meta_value(meta, "radio.array_rows", src)), int(_meta_value(meta, "radio.array_cols", src))),
        element_spacing_wl=float(_meta_value(meta, "radio.element_spacing_wl", src)),
        element_pattern=pattern,
        coherent_sum=_bool(_meta_value(meta, "radio.coherent_sum", src)),
    )
    rt = RtConfig(
        n_launch_rays=int(_meta_value(meta, "rt.n_launch_rays", src)),
        max_reflections=int(_meta_value(meta, "rt.max_reflections", src)),
        enable_diffraction=_bool(_meta_value(meta, "rt.enable_diffraction", src)),
        enable_scattering=_bool(_meta_value(meta, "rt.enable_scattering", src)),
        capture_radius_mode=_meta_value(meta, "rt.capture_radius_mode", src),
        capture_radius_m=float(_meta_value(meta, "rt.capture_radius_m", src)),
    )

    best_tx = np.full(nx * ny, "", dtype=object)
    snr = np.empty(nx * ny)
    capacity = np.empty(nx * ny)
    flags = np.full(nx * ny, "", dtype=object)
    for i, row in enumerate(rows):
        if len(row) != 6:
            raise SchemaError(f"{src}: row {i + 1} has {len(row)} fields, expected 6")
        best_tx[i] = row[2]
        snr[i] = float(row[3])
        capacity[i] = float(row[4])
        flags[i] = row[5]

    tx_field = _meta_value(meta, "tx", src)
    return CoverageMap(
        origin=np.array([float(_meta_value(meta, "map.origin_x", src)), float(_meta_value(meta, "map.origin_y", src))]),
        cell_size_m=float(_meta_value(meta, "map.cell_size_m", src)),
        rx_height_m=float(_meta_value(meta, "map.rx_height_m", src)),
        best_tx=best_tx.reshape(ny, nx),
        snr_db=snr.reshape(ny, nx),
        capacity_bps=capacity.reshape(ny, nx),
        flags=flags.reshape(ny, nx),
        radio=radio,
        rt=rt,
        scene_name=_meta_value(meta, "scene", src),
        tx_ids=tuple(tx_field.split(";")) if tx_field else (),
    )

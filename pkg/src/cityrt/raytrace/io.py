"""Path list export."""

from __future__ import annotations

import io
import math

from .types import PropagationPath

CSV_HEADER = (
    "type_sequence,length_m,delay_ns,gain_db,"
    "aod_theta_rad,aod_phi_rad,aoa_theta_rad,aoa_phi_rad"
)


def _signature_text(path: PropagationPath) -> str:
    if not path.interactions:
        return "LOS"
    return "|".join(f"{i.kind[0].upper()}{i.index}" for i in path.interactions)


def paths_csv(paths: list[PropagationPath]) -> str:
    """One row per path; gain is the vertical-to-vertical coupling and
    is empty when amplitudes have not been attached."""
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for p in paths:
        if p.amplitude is None:
            gain = ""
        else:
            mag = abs(p.amplitude[0, 0])
            gain = repr(20.0 * math.log10(mag)) if mag > 0 else "-inf"
        row = [
            _signature_text(p),
            repr(float(p.length)),
            repr(float(p.delay * 1e9)),
            gain,
            repr(float(p.departure[0])),
            repr(float(p.departure[1])),
            repr(float(p.arrival[0])),
            repr(float(p.arrival[1])),
        ]
        buf.write(",".join(row) + "\n")
    return buf.getvalue()

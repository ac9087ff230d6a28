"""Link budget: path summation, noise, SNR, Shannon capacity and rates.

Paths are summed coherently with their carrier phase e^{-j 2 pi f tau}
(the traced amplitudes exclude it) under vertical polarization, i.e.
each path contributes its theta-theta coupling.  A power-sum mode is
available for stability studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError
from ..raytrace import C0
from .pattern import DEFAULT_PATTERN, ElementPattern, tx_gain

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class RadioConfig:
    """Network-side parameters: carrier, bandwidth, per-sector TX power,
    receiver noise figure, and the sector antenna array."""

    f_c_hz: float = 12.7e9
    bandwidth_hz: float = 400e6
    tx_power_dbm: float = 30.0
    noise_figure_db: float = 7.0
    array: tuple = (4, 4)
    element_spacing_wl: float = 0.5
    element_pattern: ElementPattern = DEFAULT_PATTERN
    coherent_sum: bool = True

    def __post_init__(self):
        if self.f_c_hz <= 0:
            raise DomainError(f"carrier frequency must be positive, got {self.f_c_hz}")
        if self.bandwidth_hz <= 0:
            raise DomainError(f"bandwidth must be positive, got {self.bandwidth_hz}")
        if not (math.isfinite(self.tx_power_dbm) and math.isfinite(self.noise_figure_db)):
            raise DomainError("tx power and noise figure must be finite")
        try:
            rows, cols = self.array
        except (TypeError, ValueError):
            raise DomainError(f"array must be (rows, cols), got {self.array!r}")
        if int(rows) < 1 or int(cols) < 1 or rows != int(rows) or cols != int(cols):
            raise DomainError(f"array dims must be integers >= 1, got {self.array!r}")
        object.__setattr__(self, "array", (int(rows), int(cols)))
        if self.element_spacing_wl <= 0:
            raise DomainError(f"element spacing must be positive, got {self.element_spacing_wl}")

    @property
    def wavelength_m(self) -> float:
        return C0 / self.f_c_hz

    @property
    def n_elements(self) -> int:
        return self.array[0] * self.array[1]


@dataclass(frozen=True)
class RateRequirement:
    """A named downlink rate requirement in bit/s."""

    name: str
    rate_bps: float

    def __post_init__(self):
        if not (math.isfinite(self.rate_bps) and self.rate_bps > 0):
            raise DomainError(f"rate must be positive and finite, got {self.rate_bps}")


XR_REQUIREMENT = RateRequirement("XR", 30e6)
V2X_REQUIREMENT = RateRequirement("V2X", 700e6)


def noise_floor_dbm(config: RadioConfig) -> float:
    """Thermal noise power over the configured bandwidth, in dBm."""
    return -174.0 + 10.0 * math.log10(config.bandwidth_hz) + config.noise_figure_db


def received_power(paths, config: RadioConfig, tx_gain_fn=None, rx_gain_fn=None) -> float:
    """Received power in dBm from a set of traced paths.

    tx_gain_fn / rx_gain_fn map an (n, 3) array of unit departure /
    arrival directions to dBi; None means isotropic.  Zero paths (or a
    fully cancelled sum) is an outage and returns -inf.
    """
    paths = list(paths)
    if not paths:
        return -math.inf
    if any(p.amplitude is None for p in paths):
        raise DomainError("paths carry no amplitudes; trace with frequency_hz set")
    amp = np.array([p.amplitude[0, 0] for p in paths])
    delay = np.array([p.delay for p in paths])
    gain_db = np.zeros(len(paths))
    if tx_gain_fn is not None:
        gain_db += np.asarray(tx_gain_fn(np.stack([p.departure_direction() for p in paths])), dtype=np.float64)
    if rx_gain_fn is not None:
        gain_db += np.asarray(rx_gain_fn(np.stack([p.arrival_direction() for p in paths])), dtype=np.float64)
    contrib = 10.0 ** (gain_db / 20.0) * amp * np.exp(-2j * np.pi * config.f_c_hz * delay)
    if config.coherent_sum:
        power = abs(complex(contrib.sum())) ** 2
    else:
        power = float((np.abs(contrib) ** 2).sum())
    if power <= 0.0:
        return -math.inf
    return config.tx_power_dbm + 10.0 * math.log10(power)


def sector_gain_fn(sector, config: RadioConfig):
    """Bind a sector into a direction -> dBi function for received_power."""
    return lambda directions: tx_gain(directions, sector, config)


def snr_db(p_rx_dbm, config: RadioConfig):
    """SNR over the configured bandwidth; accepts scalars or arrays."""
    out = np.asarray(p_rx_dbm, dtype=np.float64) - noise_floor_dbm(config)
    if out.ndim == 0:
        return float(out)
    return out


def shannon_capacity(snr, bandwidth_hz: float):
    """Shannon capacity B*log2(1 + snr_linear) in bit/s; snr in dB.

    Outage (-inf dB) maps to 0.  Accepts scalars or arrays.
    """
    if bandwidth_hz <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz}")
    snr_lin = 10.0 ** (np.asarray(snr, dtype=np.float64) / 10.0)
    cap = bandwidth_hz * np.log1p(snr_lin) / LOG2
    if cap.ndim == 0:
        return float(cap)
    return cap


def min_snr_for_rate(rate_bps: float, bandwidth_hz: float) -> float:
    """Exact inverse of shannon_capacity: the SNR in dB at which the
    capacity equals rate_bps."""
    if rate_bps <= 0:
        raise DomainError(f"rate must be positive, got {rate_bps}")
    if bandwidth_hz <= 0:
        raise DomainError(f"bandwidth must be positive, got {bandwidth_hz}")
    with np.errstate(over="ignore"):  # unreachable rates map to +inf dB
        snr_lin = float(np.expm1(rate_bps / bandwidth_hz * LOG2))
    return 10.0 * math.log10(snr_lin)

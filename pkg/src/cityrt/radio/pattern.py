"""Sector antenna model: directional element pattern and sector framing.

The element pattern is the standard parabolic-rolloff model with a
vertical side-lobe floor and a global front-to-back cap; angles are in
degrees, theta from the antenna's up axis (boresight sits at 90), phi
from boresight in azimuth.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DomainError


@dataclass(frozen=True)
class ElementPattern:
    theta_3db_deg: float = 65.0
    phi_3db_deg: float = 65.0
    sla_v_db: float = 30.0
    a_max_db: float = 30.0
    g_max_dbi: float = 8.0

    def __post_init__(self):
        values = (
            self.theta_3db_deg,
            self.phi_3db_deg,
            self.sla_v_db,
            self.a_max_db,
            self.g_max_dbi,
        )
        if not all(math.isfinite(v) for v in values):
            raise DomainError("element pattern values must be finite")
        if self.theta_3db_deg <= 0 or self.phi_3db_deg <= 0:
            raise DomainError("3 dB beamwidths must be positive")
        if self.sla_v_db < 0 or self.a_max_db < 0:
            raise DomainError("attenuation limits must be >= 0")


DEFAULT_PATTERN = ElementPattern()


def element_gain(theta_deg, phi_deg, pattern: ElementPattern = DEFAULT_PATTERN):
    """Directional element gain in dBi; scalars or arrays.

    theta_deg is the polar angle from the antenna up axis in [0, 180],
    phi_deg the azimuth offset from boresight (wrapped into +-180).
    """
    theta = np.asarray(theta_deg, dtype=np.float64)
    phi = (np.asarray(phi_deg, dtype=np.float64) + 180.0) % 360.0 - 180.0
    a_v = -np.minimum(12.0 * ((theta - 90.0) / pattern.theta_3db_deg) ** 2, pattern.sla_v_db)
    a_h = -np.minimum(12.0 * (phi / pattern.phi_3db_deg) ** 2, pattern.a_max_db)
    g = pattern.g_max_dbi - np.minimum(-(a_v + a_h), pattern.a_max_db)
    if g.ndim == 0:
        return float(g)
    return g


def sector_axes(sector) -> np.ndarray:
    """Rows (boresight, left, up) of the sector antenna frame.

    Sector azimuth is measured clockwise from local +y (north); positive
    downtilt rotates boresight below the horizon and tips the up axis
    forward with it.
    """
    az = math.radians(sector.azimuth_deg)
    dt = math.radians(getattr(sector, "downtilt_deg", 0.0))
    horiz = np.array([math.sin(az), math.cos(az), 0.0])
    left = np.array([-math.cos(az), math.sin(az), 0.0])
    up = np.array([0.0, 0.0, 1.0])
    bore = math.cos(dt) * horiz - math.sin(dt) * up
    tilted_up = math.cos(dt) * up + math.sin(dt) * horiz
    return np.stack([bore, left, tilted_up])


def sector_angles(direction, sector):
    """Pattern angles (theta_deg, phi_deg) of unit direction(s) in a
    sector's antenna frame; accepts (3,) or (n, 3)."""
    d = np.asarray(direction, dtype=np.float64)
    proj = d @ sector_axes(sector).T
    cos_theta = np.clip(proj[..., 2], -1.0, 1.0)
    theta = np.degrees(np.arccos(cos_theta))
    phi = np.degrees(np.arctan2(proj[..., 1], proj[..., 0]))
    return theta, phi


def tx_gain(direction, sector, config):
    """Transmit gain toward direction(s): element pattern in the sector
    frame plus the ideal per-link beam-steering bonus 10*log10(elements)."""
    theta, phi = sector_angles(direction, sector)
    rows, cols = config.array
    g = element_gain(theta, phi, config.element_pattern) + 10.0 * math.log10(rows * cols)
    if np.ndim(g) == 0:
        return float(g)
    return g

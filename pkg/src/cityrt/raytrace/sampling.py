"""Direction sampling for ray launching."""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def fibonacci_directions(n: int) -> np.ndarray:
    """n unit vectors on a golden-angle spiral covering the sphere.

    Deterministic and nearly equal-area: band i gets z = 1 - (2i+1)/n and
    azimuth i times the golden angle.
    """
    if n < 1:
        raise DomainError(f"need at least one ray, got {n}")
    i = np.arange(n, dtype=np.float64)
    z = 1.0 - (2.0 * i + 1.0) / n
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * GOLDEN_ANGLE
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])

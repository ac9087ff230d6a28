"""Path and configuration types for the ray tracer."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DomainError

C0 = 299792458.0

LOS = "LOS"
REFLECT = "reflect"
DIFFRACT = "diffract"


@dataclass(frozen=True)
class RtConfig:
    """Tracer settings.

    capture_radius_mode "auto" grows the capture disc with travelled
    distance so the expected number of captures per physical path stays
    of order one; "fixed" uses capture_radius_m everywhere.
    """

    n_launch_rays: int = 1_000_000
    max_reflections: int = 3
    enable_diffraction: bool = True
    enable_scattering: bool = False
    capture_radius_mode: str = "auto"
    capture_radius_m: float = 1.0

    def __post_init__(self) -> None:
        if self.n_launch_rays < 1:
            raise DomainError(f"n_launch_rays must be >= 1, got {self.n_launch_rays}")
        if self.max_reflections < 0:
            raise DomainError(f"max_reflections must be >= 0, got {self.max_reflections}")
        if self.enable_scattering:
            raise DomainError("diffuse scattering is not implemented")
        if self.capture_radius_mode not in ("auto", "fixed"):
            raise DomainError(f"unknown capture_radius_mode {self.capture_radius_mode!r}")
        if self.capture_radius_mode == "fixed" and self.capture_radius_m <= 0:
            raise DomainError("capture_radius_m must be positive in fixed mode")

    def capture_radius(self, travelled_m):
        """Capture radius after travelled_m metres of flight."""
        if self.capture_radius_mode == "fixed":
            return np.broadcast_to(self.capture_radius_m, np.shape(travelled_m)).copy()
        return np.asarray(travelled_m) * math.sqrt(4.0 * math.pi / self.n_launch_rays)


@dataclass(frozen=True)
class Interaction:
    """One surface event: kind is "reflect" (index = triangle id) or
    "diffract" (index = edge id)."""

    kind: str
    index: int

    def __post_init__(self) -> None:
        if self.kind not in (REFLECT, DIFFRACT):
            raise DomainError(f"unknown interaction kind {self.kind!r}")


def direction_angles(d: np.ndarray) -> tuple[float, float]:
    """(theta, phi) of a unit direction: theta from +z, phi from +x in xy."""
    theta = math.acos(min(1.0, max(-1.0, float(d[2]))))
    phi = math.atan2(float(d[1]), float(d[0]))
    return theta, phi


@dataclass
class PropagationPath:
    """A single propagation path from TX to RX.

    vertices runs [tx, interaction points..., rx]; amplitude is the 2x2
    complex coupling between (theta, phi) polarization at departure and
    arrival, spherical spreading included, carrier delay phase excluded.
    """

    vertices: np.ndarray
    interactions: tuple[Interaction, ...]
    length: float
    delay: float
    departure: tuple[float, float]
    arrival: tuple[float, float]
    amplitude: np.ndarray | None = field(default=None, repr=False)

    @property
    def kind(self) -> str:
        if not self.interactions:
            return LOS
        if any(i.kind == DIFFRACT for i in self.interactions):
            return DIFFRACT
        return REFLECT

    @property
    def signature(self) -> tuple:
        """Hashable identity of the surface sequence."""
        return tuple((i.kind, i.index) for i in self.interactions)

    def departure_direction(self) -> np.ndarray:
        d = self.vertices[1] - self.vertices[0]
        return d / np.linalg.norm(d)

    def arrival_direction(self) -> np.ndarray:
        d = self.vertices[-1] - self.vertices[-2]
        return d / np.linalg.norm(d)

    def sort_key(self) -> tuple:
        return (len(self.interactions), self.signature, self.length)


def make_path(vertices: np.ndarray, interactions: tuple[Interaction, ...]) -> PropagationPath:
    """Fill in lengths, delay and endpoint angles from the vertex chain."""
    vertices = np.asarray(vertices, dtype=np.float64)
    seg = np.diff(vertices, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    length = float(seg_len.sum())
    dep = seg[0] / seg_len[0]
    arr = seg[-1] / seg_len[-1]
    return PropagationPath(
        vertices=vertices,
        interactions=tuple(interactions),
        length=length,
        delay=length / C0,
        departure=direction_angles(dep),
        arrival=direction_angles(arr),
    )

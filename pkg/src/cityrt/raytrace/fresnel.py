"""Fresnel reflection coefficients at a planar dielectric boundary."""

from __future__ import annotations

import numpy as np

from ..errors import DomainError


def fresnel_coefficients(cos_theta_i, eta) -> tuple[np.ndarray, np.ndarray]:
    """Reflection coefficients (gamma_te, gamma_tm) off a half-space.

    cos_theta_i is the cosine of the incidence angle from the surface
    normal, in [0, 1]; eta is the complex relative permittivity of the
    reflecting medium.  TE has the E-field perpendicular to the plane of
    incidence, TM parallel to it.  Accepts scalars or arrays.
    """
    c = np.asarray(cos_theta_i, dtype=np.float64)
    if np.any(c < -1e-9) or np.any(c > 1.0 + 1e-9):
        raise DomainError("cos_theta_i must lie in [0, 1]")
    c = np.clip(c, 0.0, 1.0)
    eta = complex(eta)
    sin2 = 1.0 - c * c
    root = np.sqrt(np.asarray(eta - sin2, dtype=np.complex128))
    den_te = c + root
    den_tm = eta * c + root
    # eta = 1 at grazing leaves 0/0; the no-contrast limit is zero
    with np.errstate(invalid="ignore", divide="ignore"):
        gamma_te = np.where(den_te == 0, 0.0, (c - root) / np.where(den_te == 0, 1.0, den_te))
        gamma_tm = np.where(den_tm == 0, 0.0, (eta * c - root) / np.where(den_tm == 0, 1.0, den_tm))
    if np.ndim(cos_theta_i) == 0:
        return complex(gamma_te), complex(gamma_tm)
    return gamma_te, gamma_tm

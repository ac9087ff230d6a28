"""Polarimetric path amplitudes.

Each path carries a 2x2 complex matrix coupling the (theta, phi)
spherical polarization basis of the departing ray to that of the
arriving ray.  Spherical spreading and interaction losses are included;
the carrier delay phase exp(-j*2*pi*f*tau) is applied by the link
budget, not here.
"""

from __future__ import annotations

import math

import numpy as np

from ..errors import DomainError
from .fresnel import fresnel_coefficients
from .geometry import SceneGeometry
from .types import DIFFRACT, REFLECT, C0, PropagationPath

_EYE2 = np.eye(2, dtype=np.complex128)


def spherical_basis(k: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit (e_theta, e_phi) transverse to propagation direction k.

    theta is measured from +z, phi from +x; (e_theta, e_phi, k) is
    right-handed.  Along +-z the azimuth is degenerate and phi = 0 is
    used.
    """
    st = math.hypot(k[0], k[1])
    if st < 1e-12:
        sign = 1.0 if k[2] > 0 else -1.0
        return np.array([sign, 0.0, 0.0]), np.array([0.0, 1.0, 0.0])
    e_phi = np.array([-k[1], k[0], 0.0]) / st
    e_theta = np.cross(e_phi, k)
    return e_theta, e_phi


def reflection_matrix(k_in, k_out, normal, eta, bases_in, bases_out) -> np.ndarray:
    """2x2 coupling across one specular reflection.

    Decomposes the incoming field into TE/TM components of the local
    incidence plane, applies the Fresnel coefficients, and projects back
    onto the outgoing spherical basis.
    """
    n = normal if float(normal @ k_in) < 0 else -normal
    cos_i = float(np.clip(-(k_in @ n), 0.0, 1.0))
    perp = np.cross(k_in, n)
    norm = np.linalg.norm(perp)
    if norm < 1e-9:
        # normal incidence: the incidence plane is degenerate, any
        # transverse axis works and TE = TM
        perp = bases_in[0]
    else:
        perp = perp / norm
    par_in = np.cross(perp, k_in)
    par_out = np.cross(perp, k_out)
    gamma_te, gamma_tm = fresnel_coefficients(cos_i, eta)

    u_in, v_in = bases_in
    u_out, v_out = bases_out
    m_in = np.array([[perp @ u_in, perp @ v_in], [par_in @ u_in, par_in @ v_in]])
    m_out = np.array([[u_out @ perp, u_out @ par_out], [v_out @ perp, v_out @ par_out]])
    gam = np.array([[gamma_te, 0.0], [0.0, gamma_tm]], dtype=np.complex128)
    return m_out @ gam @ m_in


def path_amplitude(path: PropagationPath, frequency_hz: float, geometry: SceneGeometry) -> np.ndarray:
    """Compute and attach the 2x2 amplitude of one path."""
    if frequency_hz <= 0:
        raise DomainError(f"frequency must be positive, got {frequency_hz}")
    lam = C0 / frequency_hz
    verts = path.vertices
    seg = np.diff(verts, axis=0)
    seg_len = np.linalg.norm(seg, axis=1)
    dirs = seg / seg_len[:, None]

    kinds = [i.kind for i in path.interactions]
    if DIFFRACT in kinds:
        if kinds != [DIFFRACT]:
            raise DomainError("diffraction paths carry exactly one edge interaction")
        from .diffraction import diffraction_matrix

        mat = diffraction_matrix(geometry, path.interactions[0].index, verts[0], verts[2], frequency_hz)
        s_in, s_out = float(seg_len[0]), float(seg_len[1])
        spread = 1.0 / math.sqrt(s_in * s_out * (s_in + s_out))
        amp = (lam / (4.0 * math.pi)) * spread * mat
    else:
        acc = _EYE2.copy()
        for i, inter in enumerate(path.interactions):
            if inter.kind != REFLECT:
                raise DomainError(f"unknown interaction kind {inter.kind!r}")
            acc = reflection_matrix(
                dirs[i],
                dirs[i + 1],
                geometry.bvh.tri_normal[inter.index],
                geometry.triangle_eta(inter.index, frequency_hz),
                spherical_basis(dirs[i]),
                spherical_basis(dirs[i + 1]),
            ) @ acc
        amp = (lam / (4.0 * math.pi * path.length)) * acc
    path.amplitude = amp
    return amp


def attach_amplitudes(paths, frequency_hz: float, geometry: SceneGeometry) -> None:
    for p in paths:
        path_amplitude(p, frequency_hz, geometry)

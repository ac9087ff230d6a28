"""Independent reference implementations used to check the package.

Everything here is written from the underlying math, not from the package
code, so the tests compare two separately derived answers:

- high-precision Lambert Conformal Conic (2SP) via mpmath
- brute-force ray/triangle intersection over every triangle
- exhaustive image-method path enumeration for rectangle scenes
- knife-edge diffraction loss from the Fresnel integral
- two-ray ground-reflection field
"""

from __future__ import annotations

import math

import mpmath as mp
import numpy as np
from scipy.special import fresnel as _fresnel

mp.mp.dps = 40

FT_US = 1200.0 / 3937.0  # US survey foot in meters, exact ratio


# ---------------------------------------------------------------------------
# Lambert Conformal Conic, two standard parallels, ellipsoidal (mpmath)

class LccReference:
    """40-digit LCC 2SP on GRS80 for the Massachusetts Mainland zone."""

    def __init__(self, phi1_deg, phi2_deg, phi0_deg, lon0_deg, fe_unit, fn_unit, unit_m):
        self.a = mp.mpf(6378137)
        f = 1 / mp.mpf("298.257222101")
        self.e2 = 2 * f - f * f
        self.e = mp.sqrt(self.e2)
        self.unit_m = mp.mpf(unit_m)
        self.fe = mp.mpf(fe_unit)
        self.fn = mp.mpf(fn_unit)
        self.lam0 = mp.radians(mp.mpf(lon0_deg))
        phi1 = mp.radians(mp.mpf(phi1_deg))
        phi2 = mp.radians(mp.mpf(phi2_deg))
        phi0 = mp.radians(mp.mpf(phi0_deg))
        m1, m2 = self._m(phi1), self._m(phi2)
        t1, t2 = self._t(phi1), self._t(phi2)
        self.n = (mp.log(m1) - mp.log(m2)) / (mp.log(t1) - mp.log(t2))
        self.F = m1 / (self.n * t1 ** self.n)
        self.r0 = self.a * self.F * self._t(phi0) ** self.n

    def _m(self, phi):
        return mp.cos(phi) / mp.sqrt(1 - self.e2 * mp.sin(phi) ** 2)

    def _t(self, phi):
        h = ((1 - self.e * mp.sin(phi)) / (1 + self.e * mp.sin(phi))) ** (self.e / 2)
        return mp.tan(mp.pi / 4 - phi / 2) / h

    def forward(self, lon_deg, lat_deg):
        """Geographic degrees -> projected coords in the zone unit."""
        lam = mp.radians(mp.mpf(repr(float(lon_deg))))
        phi = mp.radians(mp.mpf(repr(float(lat_deg))))
        r = self.a * self.F * self._t(phi) ** self.n
        th = self.n * (lam - self.lam0)
        E = self.fe + (r * mp.sin(th)) / self.unit_m
        N = self.fn + (self.r0 - r * mp.cos(th)) / self.unit_m
        return float(E), float(N)

    def inverse(self, easting, northing):
        """Projected coords in the zone unit -> geographic degrees."""
        E = (mp.mpf(repr(float(easting))) - self.fe) * self.unit_m
        N = (mp.mpf(repr(float(northing))) - self.fn) * self.unit_m
        rp = mp.sqrt(E * E + (self.r0 - N) ** 2)
        if self.n < 0:
            rp = -rp
        tp = (rp / (self.a * self.F)) ** (1 / self.n)
        lam = mp.atan2(E, self.r0 - N) / self.n + self.lam0
        phi = mp.pi / 2 - 2 * mp.atan(tp)
        for _ in range(60):
            h = ((1 - self.e * mp.sin(phi)) / (1 + self.e * mp.sin(phi))) ** (self.e / 2)
            phi = mp.pi / 2 - 2 * mp.atan(tp * h)
        return float(mp.degrees(lam)), float(mp.degrees(phi))


def mass_mainland_reference() -> LccReference:
    # EPSG:2249 parameters; false origin stated in US survey feet.
    return LccReference(
        phi1_deg=mp.mpf(42) + mp.mpf(41) / 60,
        phi2_deg=mp.mpf(41) + mp.mpf(43) / 60,
        phi0_deg=41,
        lon0_deg=mp.mpf("-71.5"),
        fe_unit=mp.mpf(200000) * 3937 / 1200,
        fn_unit=mp.mpf(750000) * 3937 / 1200,
        unit_m=mp.mpf(1200) / 3937,
    )


# ---------------------------------------------------------------------------
# Brute-force ray casting (every triangle, then take the smallest t)

def brute_force_hit(origin, direction, vertices, triangles, eps=1e-4):
    """Nearest hit by testing every triangle with Moller-Trumbore.

    Returns (t, triangle_index) or (inf, -1).  Ties on t go to the lowest
    triangle index.  No backface culling: triangles are two-sided.
    """
    o = np.asarray(origin, dtype=np.float64)
    d = np.asarray(direction, dtype=np.float64)
    v0 = vertices[triangles[:, 0]]
    e1 = vertices[triangles[:, 1]] - v0
    e2 = vertices[triangles[:, 2]] - v0
    pvec = np.cross(d, e2)
    det = np.einsum("ij,ij->i", e1, pvec)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_det = 1.0 / det
        tvec = o - v0
        u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
        qvec = np.cross(tvec, e1)
        v = np.einsum("ij,j->i", qvec, d) * inv_det
        t = np.einsum("ij,ij->i", e2, qvec) * inv_det
    ok = (np.abs(det) > 1e-12) & (u >= 0) & (v >= 0) & (u + v <= 1) & (t > eps)
    ok &= np.isfinite(t)
    if not ok.any():
        return np.inf, -1
    idx = np.nonzero(ok)[0]
    ts = t[idx]
    best = np.lexsort((idx, ts))[0]
    return float(ts[best]), int(idx[best])


# ---------------------------------------------------------------------------
# Exhaustive image-method enumeration over planar rectangles

class Rect:
    """Axis-oriented rectangle wall: point, two in-plane edges, outward normal."""

    def __init__(self, corner, edge_u, edge_v):
        self.p0 = np.asarray(corner, dtype=np.float64)
        self.u = np.asarray(edge_u, dtype=np.float64)
        self.v = np.asarray(edge_v, dtype=np.float64)
        n = np.cross(self.u, self.v)
        self.normal = n / np.linalg.norm(n)
        self.d = float(self.normal @ self.p0)

    def mirror(self, p):
        return p - 2.0 * ((p @ self.normal) - self.d) * self.normal

    def contains(self, p, tol=1e-9):
        rel = p - self.p0
        uu, vv = self.u @ self.u, self.v @ self.v
        s = (rel @ self.u) / uu
        t = (rel @ self.v) / vv
        return -tol <= s <= 1 + tol and -tol <= t <= 1 + tol

    def intersect_segment(self, a, b, tol=1e-9):
        """Parameter s in (tol, 1-tol) where segment a->b crosses the plane
        inside the rectangle, or None."""
        da = (a @ self.normal) - self.d
        db = (b @ self.normal) - self.d
        if da * db >= 0:
            return None
        s = da / (da - db)
        if s <= tol or s >= 1 - tol:
            return None
        p = a + s * (b - a)
        return s if self.contains(p, tol=1e-7) else None


def enumerate_specular_paths(tx, rx, rects, max_order):
    """All valid specular reflection paths up to max_order, by image method.

    Returns a list of (sequence, points) where sequence is a tuple of
    rectangle indices and points is the full vertex list tx..rx.  Includes
    the LOS path as ((), [tx, rx]) when unobstructed.  A sequence never
    repeats the same rectangle twice in a row.
    """
    tx = np.asarray(tx, dtype=np.float64)
    rx = np.asarray(rx, dtype=np.float64)
    out = []

    def blocked(a, b, skip=()):
        for k, r in enumerate(rects):
            if k in skip:
                continue
            if r.intersect_segment(a, b) is not None:
                return True
        return False

    if not blocked(tx, rx):
        out.append(((), [tx.copy(), rx.copy()]))

    def sequences(order):
        seqs = [()]
        for _ in range(order):
            seqs = [s + (k,) for s in seqs for k in range(len(rects)) if not s or s[-1] != k]
        return [s for s in seqs if len(s) == order]

    for order in range(1, max_order + 1):
        for seq in sequences(order):
            images = [tx.copy()]
            for k in seq:
                images.append(rects[k].mirror(images[-1]))
            pts = [rx.copy()]
            good = True
            cur = rx.copy()
            # walk back: P_k = segment (cur -> image_k) crossing plane seq[k-1]
            for k in range(order, 0, -1):
                r = rects[seq[k - 1]]
                da = (cur @ r.normal) - r.d
                db = (images[k] @ r.normal) - r.d
                if da == db:
                    good = False
                    break
                s = da / (da - db)
                if not (1e-12 < s < 1 - 1e-12):
                    good = False
                    break
                p = cur + s * (images[k] - cur)
                if not r.contains(p, tol=1e-9):
                    good = False
                    break
                pts.append(p)
                cur = p
            if not good:
                continue
            pts.append(tx.copy())
            pts = pts[::-1]  # tx, hit_1..hit_order, rx
            # reflection points must be distinct from endpoints
            ok = True
            for i in range(len(pts) - 1):
                if np.linalg.norm(pts[i + 1] - pts[i]) < 1e-9:
                    ok = False
                    break
            if not ok:
                continue
            # occlusion: each leg must cross nothing except its own endpoints' walls
            for i in range(len(pts) - 1):
                a, b = pts[i], pts[i + 1]
                skip = set()
                if i > 0:
                    skip.add(seq[i - 1])
                if i < order:
                    skip.add(seq[i])
                if blocked(a, b, skip=skip):
                    ok = False
                    break
            if ok:
                out.append((seq, pts))
    return out


# ---------------------------------------------------------------------------
# Knife-edge diffraction (absorbing screen, Fresnel integral)

def knife_edge_loss_db(nu: float) -> float:
    """Excess loss over free space for diffraction parameter nu.

    Field ratio (1+j)/2 * integral_nu^inf exp(-j pi t^2 / 2) dt; at nu = 0
    this is 6.02 dB.
    """
    s, c = _fresnel(nu)
    re = 0.5 - c
    im = 0.5 - s
    mag = math.sqrt(0.5) * math.hypot(re, im)
    return -20.0 * math.log10(mag)


def fresnel_nu(h: float, d1: float, d2: float, wavelength: float) -> float:
    """Diffraction parameter for edge clearance h above the TX-RX line."""
    return h * math.sqrt(2.0 * (d1 + d2) / (wavelength * d1 * d2))


# ---------------------------------------------------------------------------
# Two-ray ground reflection

def reflection_coefficient(cos_theta: complex, eta: complex, pol: str) -> complex:
    """Plane-wave reflection off a half-space, angle measured from normal."""
    sin2 = 1.0 - cos_theta * cos_theta
    root = np.sqrt(eta - sin2 + 0j)
    if pol == "TE":
        return (cos_theta - root) / (cos_theta + root)
    if pol == "TM":
        return (eta * cos_theta - root) / (eta * cos_theta + root)
    raise ValueError(pol)


def two_ray_power_dbm(p_tx_dbm, f_hz, d_ground, h_tx, h_rx, eta, pol="TM"):
    """Received power (isotropic ends) of LOS + single ground bounce.

    Vertical dipole-style V-pol maps to TM at the ground for the spec
    formulas.  d_ground is the horizontal separation in meters.
    """
    c0 = 299792458.0
    lam = c0 / f_hz
    k = 2.0 * math.pi / lam
    d_los = math.hypot(d_ground, h_tx - h_rx)
    d_ref = math.hypot(d_ground, h_tx + h_rx)
    cos_inc = (h_tx + h_rx) / d_ref  # angle from the vertical ground normal
    gam = reflection_coefficient(cos_inc, eta, pol)
    field = np.exp(-1j * k * d_los) / d_los + gam * np.exp(-1j * k * d_ref) / d_ref
    amp = (lam / (4.0 * math.pi)) * abs(field)
    return p_tx_dbm + 20.0 * math.log10(amp)

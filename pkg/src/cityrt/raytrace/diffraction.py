"""Single-edge wedge diffraction (uniform theory, heuristic dielectric).

Candidate edges are silhouette edges (faces straddle the source) plus
boundary edges of open meshes, treated as knife edges.  Each candidate
contributes at most one path through the Keller stationary point.  The
diffraction coefficient is the four-term uniform wedge solution with
Fresnel reflection coefficients of the two faces standing in for the
perfectly conducting signs; both face angles enter through a min/max
rule so the coefficient is reciprocal.

Face winding is assumed outward; edges whose faces disagree with that,
and concave edges, are skipped.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import fresnel as _fresnel_integrals

from .amplitude import spherical_basis
from .fresnel import fresnel_coefficients
from .geometry import SceneGeometry
from .types import DIFFRACT, C0, Interaction, PropagationPath, make_path

# tolerances, metres and radians
_EDGE_MARGIN = 1e-9
_OCCLUSION_EPS = 1e-4
_SB_EPS = 1e-5


@dataclass
class WedgeFrame:
    """Edge-fixed frame: o-face tangent/normal pair (t0, m0), n-face
    (t1, m1), exterior wedge index n in (1, 2]."""

    origin: np.ndarray
    e_hat: np.ndarray
    length: float
    t0: np.ndarray
    m0: np.ndarray
    t1: np.ndarray
    m1: np.ndarray
    n_wedge: float
    tri0: int
    tri1: int


def candidate_edge_ids(geometry: SceneGeometry, source: np.ndarray) -> np.ndarray:
    """Edges that can diffract rays from the given source point."""
    edges = geometry.edges
    if edges.n_edges == 0:
        return np.zeros(0, dtype=np.int64)
    src = np.asarray(source, dtype=np.float64)
    normals = geometry.bvh.tri_normal
    anchors = geometry.bvh.v0
    s0 = np.einsum("ij,ij->i", src - anchors[edges.tri0], normals[edges.tri0])
    boundary = edges.tri1 == -1
    shared = edges.tri1 >= 0
    other = np.where(shared, edges.tri1, 0)
    s1 = np.einsum("ij,ij->i", src - anchors[other], normals[other])
    silhouette = shared & (s0 * s1 < 0.0)
    return np.nonzero(boundary | silhouette)[0]


def _face_tangent(geometry: SceneGeometry, tri: int, origin: np.ndarray, e_hat: np.ndarray):
    """In-face unit vector perpendicular to the edge, pointing into the face."""
    verts = geometry.triangle_vertices(tri)
    rel = verts - origin
    perp = rel - np.outer(rel @ e_hat, e_hat)
    dist = np.linalg.norm(perp, axis=1)
    far = int(np.argmax(dist))
    if dist[far] < 1e-9:
        return None
    return perp[far] / dist[far]


def wedge_frame(geometry: SceneGeometry, edge_id: int) -> WedgeFrame | None:
    """Geometry of one diffracting wedge, or None when the edge cannot
    diffract (flat, concave, non-manifold or degenerate)."""
    edges = geometry.edges
    origin = edges.a[edge_id]
    span = edges.b[edge_id] - origin
    length = float(np.linalg.norm(span))
    if length < 1e-9:
        return None
    e_hat = span / length
    tri0 = int(edges.tri0[edge_id])
    tri1 = int(edges.tri1[edge_id])
    if tri1 == -2:
        return None
    t0 = _face_tangent(geometry, tri0, origin, e_hat)
    if t0 is None:
        return None
    m0 = geometry.bvh.tri_normal[tri0].copy()
    if tri1 < 0:
        # open boundary: a zero-thickness knife, both faces coincide
        return WedgeFrame(origin, e_hat, length, t0, m0, t0.copy(), -m0, 2.0, tri0, tri0)
    t1 = _face_tangent(geometry, tri1, origin, e_hat)
    if t1 is None:
        return None
    m1 = geometry.bvh.tri_normal[tri1].copy()
    interior = math.acos(float(np.clip(t0 @ t1, -1.0, 1.0)))
    n_wedge = (2.0 * math.pi - interior) / math.pi
    if n_wedge <= 1.0 + 1e-6:
        return None
    # outward-wound convex wedge: each face points away from the other
    if float(m0 @ t1) > -1e-9 or float(m1 @ t0) > -1e-9:
        return None
    return WedgeFrame(origin, e_hat, length, t0, m0, t1, m1, n_wedge, tri0, tri1)


class _WedgeTable:
    """Per-edge wedge frames, cached on the geometry they describe.

    Frames depend only on the mesh, so each edge is computed once and
    reused across every TX/RX query; rows are packed into arrays so the
    path search can filter whole candidate sets at once."""

    __slots__ = (
        "frames", "built", "valid", "origin", "e_hat", "length",
        "t0", "m0", "t1", "m1", "n_wedge", "tri0", "tri1",
    )

    def __init__(self, n_edges: int):
        self.frames: list[WedgeFrame | None] = [None] * n_edges
        self.built = np.zeros(n_edges, dtype=bool)
        self.valid = np.zeros(n_edges, dtype=bool)
        self.origin = np.zeros((n_edges, 3))
        self.e_hat = np.zeros((n_edges, 3))
        self.length = np.zeros(n_edges)
        self.t0 = np.zeros((n_edges, 3))
        self.m0 = np.zeros((n_edges, 3))
        self.t1 = np.zeros((n_edges, 3))
        self.m1 = np.zeros((n_edges, 3))
        self.n_wedge = np.zeros(n_edges)
        self.tri0 = np.full(n_edges, -1, dtype=np.int64)
        self.tri1 = np.full(n_edges, -1, dtype=np.int64)

    def ensure(self, geometry: SceneGeometry, edge_ids: np.ndarray) -> None:
        missing = edge_ids[~self.built[edge_ids]]
        for e in missing:
            e = int(e)
            frame = wedge_frame(geometry, e)
            self.frames[e] = frame
            self.built[e] = True
            if frame is None:
                continue
            self.valid[e] = True
            self.origin[e] = frame.origin
            self.e_hat[e] = frame.e_hat
            self.length[e] = frame.length
            self.t0[e] = frame.t0
            self.m0[e] = frame.m0
            self.t1[e] = frame.t1
            self.m1[e] = frame.m1
            self.n_wedge[e] = frame.n_wedge
            self.tri0[e] = frame.tri0
            self.tri1[e] = frame.tri1


def wedge_table(geometry: SceneGeometry) -> _WedgeTable:
    table = getattr(geometry, "_wedge_table", None)
    if table is None:
        table = _WedgeTable(geometry.edges.n_edges)
        geometry._wedge_table = table
    return table


def cached_wedge_frame(geometry: SceneGeometry, edge_id: int) -> WedgeFrame | None:
    """wedge_frame through the per-geometry cache; use on hot paths."""
    table = wedge_table(geometry)
    edge_id = int(edge_id)
    if not table.built[edge_id]:
        table.ensure(geometry, np.array([edge_id]))
    return table.frames[edge_id]


def _face_angle(frame: WedgeFrame, point: np.ndarray, apex: np.ndarray):
    """(angle from o-face through the exterior, perpendicular distance)."""
    w = point - apex
    w = w - (w @ frame.e_hat) * frame.e_hat
    r = float(np.linalg.norm(w))
    if r < 1e-9:
        return None
    phi = math.atan2(float(w @ frame.m0), float(w @ frame.t0))
    if phi < 0.0:
        phi += 2.0 * math.pi
    limit = frame.n_wedge * math.pi
    if phi > limit:
        if phi > 2.0 * math.pi - 1e-9:
            phi = 0.0
        elif phi < limit + 1e-9:
            phi = limit
        else:
            return None
    return phi, r


def _exterior_ok(table: _WedgeTable, ids: np.ndarray, point: np.ndarray, apex: np.ndarray) -> np.ndarray:
    """Vectorized acceptance half of _face_angle: True where the point
    sits inside the wedge exterior (with the same wrap/clamp slack)."""
    e_hat = table.e_hat[ids]
    w = point - apex
    w = w - np.einsum("ij,ij->i", w, e_hat)[:, None] * e_hat
    r = np.linalg.norm(w, axis=1)
    phi = np.arctan2(
        np.einsum("ij,ij->i", w, table.m0[ids]),
        np.einsum("ij,ij->i", w, table.t0[ids]),
    )
    phi = np.where(phi < 0.0, phi + 2.0 * math.pi, phi)
    limit = table.n_wedge[ids] * math.pi
    over = phi > limit
    wrap = phi > 2.0 * math.pi - 1e-9
    near = phi < limit + 1e-9
    return (r >= 1e-9) & (~over | wrap | near)


def stationary_point(frame: WedgeFrame, tx: np.ndarray, rx: np.ndarray):
    """Point on the edge where the two legs obey Keller's cone.

    Minimizes leg-length sum along the edge; closed form from unfolding
    the two perpendicular distances.  Returns None when the point falls
    outside the open edge segment.
    """
    rel_t = tx - frame.origin
    rel_r = rx - frame.origin
    along_t = float(rel_t @ frame.e_hat)
    along_r = float(rel_r @ frame.e_hat)
    perp_t = float(np.linalg.norm(rel_t - along_t * frame.e_hat))
    perp_r = float(np.linalg.norm(rel_r - along_r * frame.e_hat))
    if perp_t < 1e-9 or perp_r < 1e-9:
        return None
    s = (along_t * perp_r + along_r * perp_t) / (perp_t + perp_r)
    margin = _EDGE_MARGIN * frame.length
    if not (margin < s < frame.length - margin):
        return None
    return frame.origin + s * frame.e_hat


def _segments_blocked(
    geometry: SceneGeometry,
    starts: np.ndarray,
    ends: np.ndarray,
    ignore0: np.ndarray,
    ignore1: np.ndarray,
) -> np.ndarray:
    """Occlusion per segment, skipping each wedge's own two faces.

    Walks every ray at once: rows that hit one of their ignored
    triangles step past it (at most 8 times) and re-test; a row that
    exhausts its steps counts as blocked."""
    starts = np.array(starts, dtype=np.float64)
    ends = np.asarray(ends, dtype=np.float64)
    blocked = np.zeros(starts.shape[0], dtype=bool)
    d = ends - starts
    total = np.linalg.norm(d, axis=1)
    walking = total >= 1e-9
    dirs = d / np.where(total == 0.0, 1.0, total)[:, None]
    remaining = total.copy()
    origin = starts
    for _ in range(8):
        walking &= remaining > _OCCLUSION_EPS
        rows = np.nonzero(walking)[0]
        if rows.size == 0:
            return blocked
        t, tri, _, _ = geometry.bvh.intersect_batch(
            origin[rows], dirs[rows], t_max=remaining[rows] - _OCCLUSION_EPS
        )
        miss = tri < 0
        own = ~miss & ((tri == ignore0[rows]) | (tri == ignore1[rows]))
        hit = ~miss & ~own
        blocked[rows[hit]] = True
        walking[rows[miss]] = False
        walking[rows[hit]] = False
        step_rows = rows[own]
        if step_rows.size:
            step = t[own] + _OCCLUSION_EPS
            origin[step_rows] += step[:, None] * dirs[step_rows]
            remaining[step_rows] -= step
    blocked[walking] = True
    return blocked


def diffraction_paths_geometry(
    geometry: SceneGeometry,
    tx: np.ndarray,
    rx: np.ndarray,
    candidates: np.ndarray | None = None,
) -> list[PropagationPath]:
    """All valid single-edge diffraction paths between two points.

    Default candidates are edges silhouetted against either endpoint;
    the union keeps the path set invariant under TX/RX exchange.  The
    whole candidate set is filtered with array ops against the cached
    wedge table, so repeated queries on one geometry stay cheap.
    """
    tx = np.asarray(tx, dtype=np.float64)
    rx = np.asarray(rx, dtype=np.float64)
    if candidates is None:
        candidates = np.union1d(
            candidate_edge_ids(geometry, tx), candidate_edge_ids(geometry, rx)
        )
    ids = np.asarray(candidates, dtype=np.int64)
    if ids.size == 0:
        return []
    table = wedge_table(geometry)
    table.ensure(geometry, ids)
    ids = ids[table.valid[ids]]
    if ids.size == 0:
        return []
    origin = table.origin[ids]
    e_hat = table.e_hat[ids]
    length = table.length[ids]

    # Keller stationary point on every candidate edge at once
    rel_t = tx - origin
    rel_r = rx - origin
    along_t = np.einsum("ij,ij->i", rel_t, e_hat)
    along_r = np.einsum("ij,ij->i", rel_r, e_hat)
    perp_t = np.linalg.norm(rel_t - along_t[:, None] * e_hat, axis=1)
    perp_r = np.linalg.norm(rel_r - along_r[:, None] * e_hat, axis=1)
    keep = (perp_t >= 1e-9) & (perp_r >= 1e-9)
    denom = np.where(keep, perp_t + perp_r, 1.0)
    s = (along_t * perp_r + along_r * perp_t) / denom
    margin = _EDGE_MARGIN * length
    keep &= (s > margin) & (s < length - margin)
    apex = origin + s[:, None] * e_hat

    keep &= _exterior_ok(table, ids, tx, apex)
    keep &= _exterior_ok(table, ids, rx, apex)

    # grazing incidence parallel to the edge has no diffraction cone
    k_in = apex - tx
    k_norm = np.linalg.norm(k_in, axis=1)
    k_unit = k_in / np.where(k_norm == 0.0, 1.0, k_norm)[:, None]
    sin_b0 = np.linalg.norm(np.cross(k_unit, e_hat), axis=1)
    keep &= ~(sin_b0 < 1e-6)

    idx = np.nonzero(keep)[0]
    if idx.size == 0:
        return []
    apex_k = apex[idx]
    ig0 = table.tri0[ids[idx]]
    ig1 = table.tri1[ids[idx]]
    shape = apex_k.shape
    blocked = _segments_blocked(geometry, np.broadcast_to(tx, shape), apex_k, ig0, ig1)
    blocked |= _segments_blocked(geometry, apex_k, np.broadcast_to(rx, shape), ig0, ig1)

    paths = [
        make_path(
            np.stack([tx, apex[i], rx]),
            (Interaction(DIFFRACT, int(ids[i])),),
        )
        for i in idx[~blocked]
    ]
    paths.sort(key=lambda p: p.sort_key())
    return paths


def diffraction_paths(scene, tx, rx_point) -> list[PropagationPath]:
    """Single-edge diffraction paths in a scene (compiles geometry first)."""
    from .geometry import compile_geometry
    from .tracer import _device_position

    geometry = scene if isinstance(scene, SceneGeometry) else compile_geometry(scene)
    return diffraction_paths_geometry(
        geometry, _device_position(tx), np.asarray(rx_point, dtype=np.float64)
    )


def transition_function(x) -> complex:
    """Uniform-theory transition function F(x) for real x >= 0."""
    if x < 0:
        x = 0.0
    v = math.sqrt(2.0 * x / math.pi)
    s_int, c_int = _fresnel_integrals(v)
    tail = math.sqrt(math.pi / 2.0) * complex(0.5 - c_int, -(0.5 - s_int))
    return 2j * math.sqrt(x) * cmath.exp(1j * x) * tail


def _cot_term(beta: float, sign: float, n_wedge: float, k_times_l: float) -> complex:
    """One cot * F term with the shadow-boundary limit built in."""
    g = math.pi + sign * beta
    n_int = round(g / (2.0 * n_wedge * math.pi))
    eps = g - 2.0 * n_wedge * math.pi * n_int
    if abs(eps) < _SB_EPS:
        sgn = 1.0 if eps >= 0 else -1.0
        root = math.sqrt(2.0 * math.pi * k_times_l)
        return (
            n_wedge
            * (root * sgn - 2.0 * k_times_l * eps * cmath.exp(1j * math.pi / 4.0))
            * cmath.exp(1j * math.pi / 4.0)
        )
    a = 2.0 * math.sin(eps / 2.0) ** 2
    cot = math.cos(eps / (2.0 * n_wedge)) / math.sin(eps / (2.0 * n_wedge))
    return cot * transition_function(k_times_l * a)


def utd_coefficients(
    n_wedge: float,
    phi_in: float,
    phi_out: float,
    s_in: float,
    s_out: float,
    sin_b0: float,
    k_wave: float,
    eta_face0: complex,
    eta_facen: complex,
) -> tuple[complex, complex]:
    """(D_parallel, D_perpendicular) for the edge-fixed incidence plane.

    Parallel means the E-field lies in the plane containing the edge and
    the ray; its face reflections follow the TM coefficient, the
    perpendicular component the TE coefficient.
    """
    dist = s_in * s_out * sin_b0 * sin_b0 / (s_in + s_out)
    k_times_l = k_wave * dist
    pref = -cmath.exp(-1j * math.pi / 4.0) / (
        2.0 * n_wedge * math.sqrt(2.0 * math.pi * k_wave) * sin_b0
    )
    diff = phi_out - phi_in
    total = phi_out + phi_in
    t1 = _cot_term(diff, 1.0, n_wedge, k_times_l)
    t2 = _cot_term(diff, -1.0, n_wedge, k_times_l)
    t3 = _cot_term(total, 1.0, n_wedge, k_times_l)
    t4 = _cot_term(total, -1.0, n_wedge, k_times_l)
    # grazing angles onto each face; min/max keeps the coefficient
    # symmetric under swapping the endpoints
    psi0 = min(phi_in, phi_out)
    psin = n_wedge * math.pi - max(phi_in, phi_out)
    cos0 = min(1.0, abs(math.sin(psi0)))
    cosn = min(1.0, abs(math.sin(psin)))
    r0_te, r0_tm = fresnel_coefficients(cos0, eta_face0)
    rn_te, rn_tm = fresnel_coefficients(cosn, eta_facen)
    d_par = pref * (t1 + t2 + rn_tm * t3 + r0_tm * t4)
    d_perp = pref * (t1 + t2 + rn_te * t3 + r0_te * t4)
    return d_par, d_perp


def diffraction_matrix(
    geometry: SceneGeometry,
    edge_id: int,
    tx: np.ndarray,
    rx: np.ndarray,
    frequency_hz: float,
) -> np.ndarray:
    """2x2 (theta, phi) coupling of one edge diffraction, spreading excluded."""
    frame = cached_wedge_frame(geometry, edge_id)
    if frame is None:
        raise ValueError(f"edge {edge_id} cannot diffract")
    apex = stationary_point(frame, tx, rx)
    if apex is None:
        raise ValueError(f"no stationary point on edge {edge_id}")
    in_vec = apex - tx
    out_vec = rx - apex
    s_in = float(np.linalg.norm(in_vec))
    s_out = float(np.linalg.norm(out_vec))
    k_in = in_vec / s_in
    k_out = out_vec / s_out
    angle_in = _face_angle(frame, tx, apex)
    angle_out = _face_angle(frame, rx, apex)
    if angle_in is None or angle_out is None:
        raise ValueError(f"endpoint inside the wedge of edge {edge_id}")
    sin_b0 = float(np.linalg.norm(np.cross(k_in, frame.e_hat)))
    k_wave = 2.0 * math.pi * frequency_hz / C0
    d_par, d_perp = utd_coefficients(
        frame.n_wedge,
        angle_in[0],
        angle_out[0],
        s_in,
        s_out,
        sin_b0,
        k_wave,
        geometry.triangle_eta(frame.tri0, frequency_hz),
        geometry.triangle_eta(frame.tri1, frequency_hz),
    )

    perp_in = np.cross(frame.e_hat, k_in)
    perp_in = perp_in / np.linalg.norm(perp_in)
    par_in = np.cross(perp_in, k_in)
    perp_out = np.cross(frame.e_hat, k_out)
    perp_out = perp_out / np.linalg.norm(perp_out)
    par_out = np.cross(perp_out, k_out)
    u_in, v_in = spherical_basis(k_in)
    u_out, v_out = spherical_basis(k_out)
    m_in = np.array([[par_in @ u_in, par_in @ v_in], [perp_in @ u_in, perp_in @ v_in]])
    m_out = np.array([[u_out @ par_out, u_out @ perp_out], [v_out @ par_out, v_out @ perp_out]])
    coeff = np.array([[d_par, 0.0], [0.0, d_perp]], dtype=np.complex128)
    return m_out @ coeff @ m_in

"""Hybrid path tracer: SBR discovery, image-method refinement.

A Fibonacci fan launched from each endpoint discovers candidate
reflection surface sequences; every discovered sequence is then solved
exactly by mirroring through the surface planes and validated with
occlusion tests, so reported geometry carries no capture-sphere bias.
Launching from both endpoints keeps the discovered set symmetric under
TX/RX exchange.
"""

from __future__ import annotations

import numpy as np

from ..errors import DomainError
from ..mesh.bvh import Bvh
from ..scene.scene import Scene
from .amplitude import attach_amplitudes
from .diffraction import candidate_edge_ids, diffraction_paths_geometry
from .geometry import SceneGeometry, compile_geometry
from .sampling import fibonacci_directions
from .types import REFLECT, Interaction, PropagationPath, RtConfig, make_path

# length agreement between a refined leg and its occlusion hit, metres
_LEG_EPS = 1e-6
# pair budget per capture-test chunk, keeps memory modest
_CHUNK_PAIRS = 2_000_000


def _as_geometry(scene: Scene, bvh) -> SceneGeometry:
    if isinstance(bvh, SceneGeometry):
        return bvh
    return compile_geometry(scene)


def _device_position(tx) -> np.ndarray:
    pos = getattr(tx, "position", tx)
    return np.asarray(pos, dtype=np.float64)


def _los_clear(geometry: SceneGeometry, a: np.ndarray, b: np.ndarray) -> bool:
    d = b - a
    dist = float(np.linalg.norm(d))
    if dist < 1e-9:
        return False
    if geometry.n_triangles == 0:
        return True
    blocked = geometry.bvh.occluded_batch(
        a[None, :], (d / dist)[None, :], t_max=np.array([dist - _LEG_EPS])
    )
    return not bool(blocked[0])


def _discover_sequences(
    geometry: SceneGeometry,
    source: np.ndarray,
    targets: np.ndarray,
    cfg: RtConfig,
) -> list[set]:
    """Per-target sets of candidate reflection sequences (triangle tuples).

    Shoots the Fibonacci fan from source, bounces it specularly up to
    max_reflections times, and registers a candidate whenever a bounced
    ray segment passes a target within the capture radius.
    """
    n_targets = targets.shape[0]
    found: list[set] = [set() for _ in range(n_targets)]
    if geometry.n_triangles == 0 or cfg.max_reflections == 0 or n_targets == 0:
        return found
    n = cfg.n_launch_rays
    dirs = fibonacci_directions(n)
    origins = np.broadcast_to(source, (n, 3)).copy()
    travelled = np.zeros(n)
    seq = np.full((n, cfg.max_reflections), -1, dtype=np.int64)
    alive = np.arange(n, dtype=np.int64)
    chunk_rows = max(1, _CHUNK_PAIRS // n_targets)

    for depth in range(cfg.max_reflections):
        t, tri, _, _ = geometry.bvh.intersect_batch(origins[alive], dirs[alive])
        hit = tri >= 0
        alive = alive[hit]
        if alive.size == 0:
            break
        t_hit = t[hit]
        tri_hit = tri[hit]
        d_in = dirs[alive]
        points = origins[alive] + t_hit[:, None] * d_in
        normal = geometry.bvh.tri_normal[tri_hit]
        facing = np.einsum("ij,ij->i", normal, d_in) > 0
        normal = np.where(facing[:, None], -normal, normal)
        d_out = d_in - 2.0 * np.einsum("ij,ij->i", d_in, normal)[:, None] * normal

        seq[alive, depth] = tri_hit
        travelled[alive] += t_hit
        origins[alive] = points
        dirs[alive] = d_out

        for lo in range(0, alive.size, chunk_rows):
            rows = alive[lo : lo + chunk_rows]
            org = origins[rows]
            dcn = dirs[rows]
            trav = travelled[rows]
            diff = targets[None, :, :] - org[:, None, :]
            along = np.einsum("apk,ak->ap", diff, dcn)
            along = np.maximum(along, 0.0)
            miss = np.linalg.norm(diff - along[:, :, None] * dcn[:, None, :], axis=2)
            radius = cfg.capture_radius(trav[:, None] + along)
            ray_i, tgt_i = np.nonzero(miss <= radius)
            if ray_i.size == 0:
                continue
            combo = np.concatenate(
                [tgt_i[:, None], seq[rows[ray_i], : depth + 1]], axis=1
            )
            for row in np.unique(combo, axis=0):
                found[int(row[0])].add(tuple(int(x) for x in row[1:]))
    return found


def _refine_sequence(geometry, tx, rx, sequence) -> np.ndarray | None:
    """Exact specular solution for one triangle sequence, or None.

    Mirrors the source through each surface plane, walks the reflection
    points back from the receiver, and accepts only if every point lands
    on its triangle and every leg is free of other geometry.
    """
    seq = np.asarray(sequence, dtype=np.int64)
    k = seq.size
    normals = geometry.bvh.tri_normal[seq]
    anchors = geometry.bvh.v0[seq]

    images = np.empty((k + 1, 3))
    images[0] = tx
    for i in range(k):
        dist = float(normals[i] @ (images[i] - anchors[i]))
        images[i + 1] = images[i] - 2.0 * dist * normals[i]

    pts = np.empty((k + 2, 3))
    pts[-1] = rx
    cur = rx
    for i in range(k, 0, -1):
        n_i = normals[i - 1]
        a_i = anchors[i - 1]
        da = float(n_i @ (cur - a_i))
        db = float(n_i @ (images[i] - a_i))
        if da * db >= 0.0:
            return None
        p = cur + (da / (da - db)) * (images[i] - cur)
        e1 = geometry.bvh.e1[seq[i - 1]]
        e2 = geometry.bvh.e2[seq[i - 1]]
        rel = p - a_i
        g11 = float(e1 @ e1)
        g12 = float(e1 @ e2)
        g22 = float(e2 @ e2)
        det = g11 * g22 - g12 * g12
        if abs(det) < 1e-18:
            return None
        b1 = float(rel @ e1)
        b2 = float(rel @ e2)
        u = (g22 * b1 - g12 * b2) / det
        v = (g11 * b2 - g12 * b1) / det
        if u < -1e-9 or v < -1e-9 or u + v > 1.0 + 1e-9:
            return None
        pts[i] = p
        cur = p
    pts[0] = tx

    legs = np.diff(pts, axis=0)
    lengths = np.linalg.norm(legs, axis=1)
    if np.any(lengths < 1e-9):
        return None
    dirs = legs / lengths[:, None]
    t_max = lengths + 1e-3
    t_max[-1] = max(lengths[-1] - _LEG_EPS, 0.0)
    t, tri, _, _ = geometry.bvh.intersect_batch(pts[:-1], dirs, t_max=t_max)
    for i in range(k):
        if tri[i] != seq[i] or abs(t[i] - lengths[i]) > _LEG_EPS * (1.0 + lengths[i]):
            return None
    if tri[k] >= 0:
        return None
    return pts


def trace_paths(scene: Scene, bvh, tx, rx_point, cfg: RtConfig, frequency_hz: float | None = None) -> list[PropagationPath]:
    """All propagation paths from a transmitter to one receive point.

    bvh may be a compiled SceneGeometry (reused as-is, the fast route
    for repeated calls) or anything else, in which case the geometry is
    compiled from the scene.  The result is sorted by (interaction
    count, surface signature, length) and is deterministic for a given
    scene and config.  When frequency_hz is given, 2x2 polarimetric
    amplitudes are attached to every path.
    """
    if cfg.enable_scattering:
        raise DomainError("diffuse scattering is not implemented")
    geometry = _as_geometry(scene, bvh)
    tx_pos = _device_position(tx)
    rx = np.asarray(rx_point, dtype=np.float64)

    paths: list[PropagationPath] = []
    if _los_clear(geometry, tx_pos, rx):
        paths.append(make_path(np.stack([tx_pos, rx]), ()))

    if cfg.max_reflections > 0 and geometry.n_triangles > 0:
        forward = _discover_sequences(geometry, tx_pos, rx[None, :], cfg)[0]
        backward = _discover_sequences(geometry, rx, tx_pos[None, :], cfg)[0]
        sequences = forward | {tuple(reversed(s)) for s in backward}
        for seq in sorted(sequences):
            pts = _refine_sequence(geometry, tx_pos, rx, seq)
            if pts is not None:
                paths.append(
                    make_path(pts, tuple(Interaction(REFLECT, int(t)) for t in seq))
                )

    if cfg.enable_diffraction:
        paths.extend(diffraction_paths_geometry(geometry, tx_pos, rx))

    paths.sort(key=lambda p: p.sort_key())
    if frequency_hz is not None:
        attach_amplitudes(paths, frequency_hz, geometry)
    return paths


def trace_to_grid(
    scene: Scene,
    bvh,
    tx,
    points: np.ndarray,
    cfg: RtConfig,
    frequency_hz: float | None = None,
) -> list[list[PropagationPath]]:
    """Paths from one transmitter to many receive points.

    Discovery runs a single transmitter-side fan shared by all points;
    refinement, diffraction and amplitudes are then exact per point.
    """
    if cfg.enable_scattering:
        raise DomainError("diffuse scattering is not implemented")
    geometry = _as_geometry(scene, bvh)
    tx_pos = _device_position(tx)
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise DomainError("points must have shape (n, 3)")

    n_pts = pts.shape[0]
    deltas = pts - tx_pos
    dists = np.linalg.norm(deltas, axis=1)
    safe = np.where(dists > 1e-9, dists, 1.0)
    los_blocked = geometry.bvh.occluded_batch(
        np.broadcast_to(tx_pos, pts.shape), deltas / safe[:, None], t_max=np.maximum(dists - _LEG_EPS, 0.0)
    )
    sequences = _discover_sequences(geometry, tx_pos, pts, cfg)
    if cfg.enable_diffraction and geometry.edges.n_edges:
        tx_candidates = candidate_edge_ids(geometry, tx_pos)
    else:
        tx_candidates = np.zeros(0, dtype=np.int64)

    out: list[list[PropagationPath]] = []
    for i in range(n_pts):
        rx = pts[i]
        paths: list[PropagationPath] = []
        if dists[i] > 1e-9 and not los_blocked[i]:
            paths.append(make_path(np.stack([tx_pos, rx]), ()))
        for seq in sorted(sequences[i]):
            refined = _refine_sequence(geometry, tx_pos, rx, seq)
            if refined is not None:
                paths.append(
                    make_path(refined, tuple(Interaction(REFLECT, int(t)) for t in seq))
                )
        if cfg.enable_diffraction and geometry.edges.n_edges:
            cand = np.union1d(tx_candidates, candidate_edge_ids(geometry, rx))
            paths.extend(diffraction_paths_geometry(geometry, tx_pos, rx, cand))
        paths.sort(key=lambda p: p.sort_key())
        if frequency_hz is not None:
            attach_amplitudes(paths, frequency_hz, geometry)
        out.append(paths)
    return out

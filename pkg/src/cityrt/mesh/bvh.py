"""Bounding volume hierarchy with batched ray queries.

Binned-SAH build over the concatenated triangle soup of the input meshes;
traversal is breadth-first over (ray, node) pairs so large ray batches run
as numpy array ops.  Results are deterministic: ties on hit distance go to
the lowest global triangle index, and the build is a pure function of the
input order.

Triangles are two-sided; there is no backface culling.  Rays start at
t = t_min (default 1e-4 m) to step over the surface they originate on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from .core import TriangleMesh

LEAF_SIZE = 4
N_BINS = 16
T_MIN = 1e-4  # m, self-intersection offset
_DET_EPS = 1e-12


def _cross_rows(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise cross product; np.cross minus its axis bookkeeping, which
    dominates the cost for the small batches the traversal produces."""
    out = np.empty_like(a)
    out[:, 0] = a[:, 1] * b[:, 2] - a[:, 2] * b[:, 1]
    out[:, 1] = a[:, 2] * b[:, 0] - a[:, 0] * b[:, 2]
    out[:, 2] = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    return out


@dataclass
class RayHit:
    """Nearest intersection along a ray."""

    t: float
    triangle: int  # global index into the BVH triangle soup
    mesh: int
    u: float
    v: float
    point: np.ndarray
    normal: np.ndarray  # unit geometric normal, facing the ray origin
    material: int  # -1 when the mesh carries no material


class Bvh:
    """Immutable acceleration structure over placed triangle meshes."""

    def __init__(self, meshes: list[TriangleMesh], materials: list[int] | None = None):
        if materials is not None and len(materials) != len(meshes):
            raise InputError("materials list must match meshes")
        v0s, e1s, e2s, mesh_ids, mat_ids = [], [], [], [], []
        for mi, mesh in enumerate(meshes):
            if mesh.n_triangles == 0:
                continue
            v0 = mesh.vertices[mesh.triangles[:, 0]]
            v1 = mesh.vertices[mesh.triangles[:, 1]]
            v2 = mesh.vertices[mesh.triangles[:, 2]]
            v0s.append(v0)
            e1s.append(v1 - v0)
            e2s.append(v2 - v0)
            mesh_ids.append(np.full(mesh.n_triangles, mi, dtype=np.int64))
            mat = materials[mi] if materials is not None else -1
            mat_ids.append(np.full(mesh.n_triangles, mat, dtype=np.int64))
        if v0s:
            self.v0 = np.ascontiguousarray(np.concatenate(v0s))
            self.e1 = np.ascontiguousarray(np.concatenate(e1s))
            self.e2 = np.ascontiguousarray(np.concatenate(e2s))
            self.tri_mesh = np.concatenate(mesh_ids)
            self.tri_material = np.concatenate(mat_ids)
        else:
            self.v0 = np.zeros((0, 3))
            self.e1 = np.zeros((0, 3))
            self.e2 = np.zeros((0, 3))
            self.tri_mesh = np.zeros(0, dtype=np.int64)
            self.tri_material = np.zeros(0, dtype=np.int64)
        n = np.cross(self.e1, self.e2)
        ln = np.linalg.norm(n, axis=1, keepdims=True)
        with np.errstate(invalid="ignore"):
            self.tri_normal = np.where(ln > 0, n / np.where(ln == 0, 1.0, ln), 0.0)
        self._build()

    @property
    def n_triangles(self) -> int:
        return int(self.v0.shape[0])

    def _build(self):
        T = self.n_triangles
        p1 = self.v0 + self.e1
        p2 = self.v0 + self.e2
        tb_min = np.minimum(np.minimum(self.v0, p1), p2)
        tb_max = np.maximum(np.maximum(self.v0, p1), p2)
        cen = (tb_min + tb_max) * 0.5
        order = np.arange(T, dtype=np.int64)

        bmin, bmax, left, right, start, count = [], [], [], [], [], []

        def alloc():
            bmin.append(None)
            bmax.append(None)
            left.append(-1)
            right.append(-1)
            start.append(0)
            count.append(0)
            return len(bmin) - 1

        if T > 0:
            stack = [(0, T, alloc())]
        else:
            stack = []
        while stack:
            s, e, nid = stack.pop()
            ids = order[s:e]
            nb_min = tb_min[ids].min(axis=0)
            nb_max = tb_max[ids].max(axis=0)
            bmin[nid], bmax[nid] = nb_min, nb_max
            n = e - s
            if n <= LEAF_SIZE:
                start[nid], count[nid] = s, n
                continue
            mid = self._split(ids, cen, tb_min, tb_max)
            if mid is None:
                # all centroids coincide: halve arbitrarily but deterministically
                half = n // 2
                part = np.concatenate([ids[:half], ids[half:]])
                mid_abs = s + half
            else:
                part, mid_abs = mid[0], s + mid[1]
            order[s:e] = part
            li, ri = alloc(), alloc()
            left[nid], right[nid] = li, ri
            stack.append((mid_abs, e, ri))
            stack.append((s, mid_abs, li))

        if bmin:
            self.node_min = np.array(bmin)
            self.node_max = np.array(bmax)
        else:
            self.node_min = np.zeros((0, 3))
            self.node_max = np.zeros((0, 3))
        self.node_left = np.array(left, dtype=np.int64)
        self.node_right = np.array(right, dtype=np.int64)
        self.node_start = np.array(start, dtype=np.int64)
        self.node_count = np.array(count, dtype=np.int64)
        self.order = order

    @staticmethod
    def _split(ids, cen, tb_min, tb_max):
        """Binned SAH split; returns (partitioned ids, local mid) or None."""
        c = cen[ids]
        best_cost = np.inf
        best = None
        for axis in range(3):
            lo, hi = c[:, axis].min(), c[:, axis].max()
            if hi - lo < 1e-12:
                continue
            bins = np.minimum(
                ((c[:, axis] - lo) * (N_BINS / (hi - lo))).astype(np.int64), N_BINS - 1
            )
            cnt = np.bincount(bins, minlength=N_BINS)
            gmin = np.full((N_BINS, 3), np.inf)
            gmax = np.full((N_BINS, 3), -np.inf)
            np.minimum.at(gmin, bins, tb_min[ids])
            np.maximum.at(gmax, bins, tb_max[ids])
            # prefix/suffix accumulated bounds and counts
            lmin, lmax = np.minimum.accumulate(gmin, 0), np.maximum.accumulate(gmax, 0)
            rmin = np.minimum.accumulate(gmin[::-1], 0)[::-1]
            rmax = np.maximum.accumulate(gmax[::-1], 0)[::-1]
            lcnt = np.cumsum(cnt)
            rcnt = np.cumsum(cnt[::-1])[::-1]

            def sa(mn, mx):
                d = np.maximum(mx - mn, 0.0)
                return d[:, 0] * d[:, 1] + d[:, 1] * d[:, 2] + d[:, 2] * d[:, 0]

            for k in range(1, N_BINS):
                nl, nr = lcnt[k - 1], rcnt[k]
                if nl == 0 or nr == 0:
                    continue
                cost = sa(lmin[k - 1 : k], lmax[k - 1 : k])[0] * nl + sa(rmin[k : k + 1], rmax[k : k + 1])[0] * nr
                if cost < best_cost:
                    best_cost = cost
                    best = (axis, lo, hi, k)
        if best is None:
            return None
        axis, lo, hi, k = best
        bins = np.minimum(((c[:, axis] - lo) * (N_BINS / (hi - lo))).astype(np.int64), N_BINS - 1)
        mask = bins < k
        part = np.concatenate([ids[mask], ids[~mask]])
        return part, int(mask.sum())

    # -- queries ------------------------------------------------------------

    def intersect_batch(self, origins, directions, t_max=None, t_min: float = T_MIN):
        """Nearest hits for a ray batch.

        Returns (t, tri, u, v) arrays; tri is -1 (and t inf) on miss.  Ties
        on t resolve to the lowest triangle index.
        """
        o = np.atleast_2d(np.asarray(origins, dtype=np.float64))
        d = np.atleast_2d(np.asarray(directions, dtype=np.float64))
        N = o.shape[0]
        if t_max is None:
            best_t = np.full(N, np.inf)
        else:
            best_t = np.broadcast_to(np.asarray(t_max, dtype=np.float64), (N,)).copy()
        best_tri = np.full(N, -1, dtype=np.int64)
        best_u = np.zeros(N)
        best_v = np.zeros(N)
        if self.n_triangles == 0 or N == 0:
            return best_t, best_tri, best_u, best_v

        with np.errstate(divide="ignore"):
            inv = 1.0 / d

        ray = np.arange(N, dtype=np.int64)
        node = np.zeros(N, dtype=np.int64)
        while ray.size:
            ob = o[ray]
            ib = inv[ray]
            with np.errstate(invalid="ignore"):
                t1 = (self.node_min[node] - ob) * ib
                t2 = (self.node_max[node] - ob) * ib
            # 0 * inf: origin sits on a slab plane with a parallel ray, so
            # that axis constrains nothing
            nan = np.isnan(t1) | np.isnan(t2)
            t1 = np.where(nan, -np.inf, t1)
            t2 = np.where(nan, np.inf, t2)
            tlo = np.minimum(t1, t2).max(axis=1)
            thi = np.maximum(t1, t2).min(axis=1)
            live = (tlo <= thi) & (thi >= t_min) & (tlo <= best_t[ray]) & (tlo < np.inf)
            ray, node = ray[live], node[live]
            if ray.size == 0:
                break
            is_leaf = self.node_count[node] > 0
            # leaves: expand to (ray, triangle) pairs and run Moller-Trumbore
            if is_leaf.any():
                lr, ln = ray[is_leaf], node[is_leaf]
                cnts = self.node_count[ln]
                starts = self.node_start[ln]
                total = int(cnts.sum())
                rep = np.repeat(np.arange(lr.size), cnts)
                offs = np.arange(total) - np.repeat(np.cumsum(cnts) - cnts, cnts)
                pr = lr[rep]
                pt = self.order[starts[rep] + offs]
                self._mt_reduce(o, d, pr, pt, t_min, best_t, best_tri, best_u, best_v)
            inner = ~is_leaf
            ir, inode = ray[inner], node[inner]
            ray = np.concatenate([ir, ir])
            node = np.concatenate([self.node_left[inode], self.node_right[inode]])
        return best_t, best_tri, best_u, best_v

    def _mt_reduce(self, o, d, pr, pt, t_min, best_t, best_tri, best_u, best_v):
        """Moller-Trumbore on (ray, tri) pairs, then per-ray best update."""
        v0, e1, e2 = self.v0[pt], self.e1[pt], self.e2[pt]
        ob, db = o[pr], d[pr]
        pvec = _cross_rows(db, e2)
        det = np.einsum("ij,ij->i", e1, pvec)
        with np.errstate(divide="ignore", invalid="ignore"):
            inv_det = 1.0 / det
            tvec = ob - v0
            u = np.einsum("ij,ij->i", tvec, pvec) * inv_det
            qvec = _cross_rows(tvec, e1)
            v = np.einsum("ij,ij->i", qvec, db) * inv_det
            t = np.einsum("ij,ij->i", e2, qvec) * inv_det
            ok = (
                (np.abs(det) > _DET_EPS)
                & (u >= 0.0)
                & (v >= 0.0)
                & (u + v <= 1.0)
                & (t >= t_min)
                & np.isfinite(t)
                & (t <= best_t[pr])
            )
        if not ok.any():
            return
        pr, pt, t, u, v = pr[ok], pt[ok], t[ok], u[ok], v[ok]
        # per-ray minimum of (t, tri)
        sel = np.lexsort((pt, t, pr))
        pr, pt, t, u, v = pr[sel], pt[sel], t[sel], u[sel], v[sel]
        first = np.ones(pr.size, dtype=bool)
        first[1:] = pr[1:] != pr[:-1]
        pr, pt, t, u, v = pr[first], pt[first], t[first], u[first], v[first]
        better = (t < best_t[pr]) | ((t == best_t[pr]) & ((best_tri[pr] < 0) | (pt < best_tri[pr])))
        pr, pt, t, u, v = pr[better], pt[better], t[better], u[better], v[better]
        best_t[pr] = t
        best_tri[pr] = pt
        best_u[pr] = u
        best_v[pr] = v

    def intersect(self, origin, direction, t_max: float = np.inf, t_min: float = T_MIN) -> RayHit | None:
        """Nearest hit of a single ray, or None."""
        t, tri, u, v = self.intersect_batch(
            np.asarray(origin, dtype=np.float64)[None, :],
            np.asarray(direction, dtype=np.float64)[None, :],
            t_max=np.array([t_max]),
            t_min=t_min,
        )
        if tri[0] < 0:
            return None
        return self.hit_from(int(tri[0]), float(t[0]), float(u[0]), float(v[0]), origin, direction)

    def hit_from(self, tri: int, t: float, u: float, v: float, origin, direction) -> RayHit:
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        n = self.tri_normal[tri]
        if n @ d > 0:
            n = -n
        return RayHit(
            t=t,
            triangle=tri,
            mesh=int(self.tri_mesh[tri]),
            u=u,
            v=v,
            point=o + t * d,
            normal=n.copy(),
            material=int(self.tri_material[tri]),
        )

    def occluded_batch(self, origins, directions, t_max, t_min: float = T_MIN) -> np.ndarray:
        """True where anything lies on the ray within (t_min, t_max)."""
        t, tri, _, _ = self.intersect_batch(origins, directions, t_max=t_max, t_min=t_min)
        return tri >= 0


def build_bvh(meshes, materials: list[int] | None = None) -> Bvh:
    """Build a BVH over one mesh or a list of placed meshes."""
    if isinstance(meshes, TriangleMesh):
        meshes = [meshes]
    return Bvh(list(meshes), materials)

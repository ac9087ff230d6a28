"""Coverage maps: best-server SNR and capacity over a ground grid.

The grid is anchored at the scene boundary's bounding-box corner and
sized (ceil) to cover it.  Every outdoor cell center is traced once per
transmitter (sectors of one TX share the traced paths and differ only in
antenna weighting); the (TX, sector) pair with the highest received
power serves the cell, ties going to the lowest device id.  Cells whose
center lies inside a building footprint are flagged indoor and skipped.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DomainError
from ..raytrace import RtConfig, compile_geometry, trace_to_grid
from .link import RadioConfig, RateRequirement, min_snr_for_rate, noise_floor_dbm, shannon_capacity
from .pattern import tx_gain

FLAG_INDOOR = "indoor"
FLAG_OUTAGE = "outage"

_FOOTPRINT_CHUNK = 4_000_000  # triangle*point pairs per containment block


@dataclass
class CoverageMap:
    """Grid of best-server results at a fixed receive height.

    snr_db is -inf for outage cells and NaN for indoor (untraced)
    cells; capacity_bps is 0 for both.  Row iy runs south to north,
    column ix west to east; cell (iy, ix) is centered at
    origin + ((ix + 0.5), (iy + 0.5)) * cell_size_m.
    """

    origin: np.ndarray  # (2,) local m, boundary bbox min corner
    cell_size_m: float
    rx_height_m: float
    best_tx: np.ndarray  # (ny, nx) object, "" where no server
    snr_db: np.ndarray  # (ny, nx) float64
    capacity_bps: np.ndarray  # (ny, nx) float64
    flags: np.ndarray  # (ny, nx) object: "", "indoor", "outage"
    radio: RadioConfig
    rt: RtConfig
    scene_name: str = ""
    tx_ids: tuple = field(default_factory=tuple)

    @property
    def ny(self) -> int:
        return self.snr_db.shape[0]

    @property
    def nx(self) -> int:
        return self.snr_db.shape[1]

    def cell_centers(self) -> np.ndarray:
        """(ny, nx, 2) array of cell center coordinates, local meters."""
        xs = self.origin[0] + (np.arange(self.nx) + 0.5) * self.cell_size_m
        ys = self.origin[1] + (np.arange(self.ny) + 0.5) * self.cell_size_m
        cx, cy = np.meshgrid(xs, ys)
        return np.stack([cx, cy], axis=-1)


def _cross2(u, v):
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


def building_footprint_mask(scene, points_xy) -> np.ndarray:
    """True where a point lies inside the xy projection of any building
    triangle (vertical faces project to zero area and are ignored)."""
    pts = np.atleast_2d(np.asarray(points_xy, dtype=np.float64))[:, :2]
    inside = np.zeros(pts.shape[0], dtype=bool)
    tris = []
    for m in scene.models:
        if m.model_type.strip().lower() != "building":
            continue
        world = m.world_mesh()
        tris.append(world.vertices[world.triangles][:, :, :2])
    if not tris:
        return inside
    t = np.concatenate(tris)
    a, b, c = t[:, 0], t[:, 1], t[:, 2]
    keep = np.abs(_cross2(b - a, c - a)) > 1e-9
    a, b, c = a[keep], b[keep], c[keep]
    if a.shape[0] == 0:
        return inside
    step = max(1, _FOOTPRINT_CHUNK // pts.shape[0])
    for lo in range(0, a.shape[0], step):
        aa, bb, cc = a[lo : lo + step, None], b[lo : lo + step, None], c[lo : lo + step, None]
        s1 = _cross2(bb - aa, pts[None] - aa)
        s2 = _cross2(cc - bb, pts[None] - bb)
        s3 = _cross2(aa - cc, pts[None] - cc)
        pos = (s1 >= -1e-9) & (s2 >= -1e-9) & (s3 >= -1e-9)
        neg = (s1 <= 1e-9) & (s2 <= 1e-9) & (s3 <= 1e-9)
        inside |= (pos | neg).any(axis=0)
    return inside


def _select_transmitters(scene, tx_ids):
    if tx_ids is None:
        txs = [d for d in scene.devices if d.role == "tx"]
    else:
        txs = []
        for dev_id in dict.fromkeys(tx_ids):
            dev = scene.device(dev_id)
            if dev.role != "tx":
                raise ConfigError(f"device {dev_id!r} has role {dev.role!r}; coverage needs transmitters")
            txs.append(dev)
    if not txs:
        raise ConfigError(f"scene {scene.name!r} has no transmitter to map coverage from")
    return sorted(txs, key=lambda d: d.device_id)


def _tx_best_power(scene, geometry, tx, pts3, rt, radio) -> np.ndarray:
    """Per-cell received power (dBm) from tx, max over its sectors."""
    n = pts3.shape[0]
    per_point = trace_to_grid(scene, geometry, tx, pts3, rt, frequency_hz=radio.f_c_hz)
    cell_of, amp, delay, deps = [], [], [], []
    for j, paths in enumerate(per_point):
        for p in paths:
            cell_of.append(j)
            amp.append(p.amplitude[0, 0])
            delay.append(p.delay)
            deps.append(p.departure_direction())
    if not cell_of:
        return np.full(n, -np.inf)
    cell_of = np.asarray(cell_of, dtype=np.int64)
    base = np.asarray(amp) * np.exp(-2j * np.pi * radio.f_c_hz * np.asarray(delay))
    deps = np.vstack(deps)
    best = np.full(n, -np.inf)
    for sector in tx.sectors:
        weight = 10.0 ** (np.asarray(tx_gain(deps, sector, radio)) / 20.0)
        contrib = weight * base
        if radio.coherent_sum:
            re = np.bincount(cell_of, weights=contrib.real, minlength=n)
            im = np.bincount(cell_of, weights=contrib.imag, minlength=n)
            power = re * re + im * im
        else:
            power = np.bincount(cell_of, weights=np.abs(contrib) ** 2, minlength=n)
        with np.errstate(divide="ignore"):
            np.maximum(best, radio.tx_power_dbm + 10.0 * np.log10(power), out=best)
    return best


def coverage_map(
    scene,
    radio_cfg: "RadioConfig | None" = None,
    rt_cfg: "RtConfig | None" = None,
    cell_size_m: float = 5.0,
    rx_height_m: float = 1.5,
    tx_ids=None,
    threads: int = 1,
) -> CoverageMap:
    """Trace a best-server coverage map over the scene boundary.

    With threads > 1 the per-transmitter traces run on a thread pool;
    results merge in device-id order either way, so the map (including
    tie-breaks) does not depend on the thread count.
    """
    radio = radio_cfg if radio_cfg is not None else RadioConfig()
    rt = rt_cfg if rt_cfg is not None else RtConfig()
    if cell_size_m <= 0:
        raise DomainError(f"cell size must be positive, got {cell_size_m}")
    if rx_height_m < 0:
        raise DomainError(f"rx height must be >= 0, got {rx_height_m}")
    txs = _select_transmitters(scene, tx_ids)

    lo = scene.boundary.min(axis=0)
    hi = scene.boundary.max(axis=0)
    nx = max(1, math.ceil((hi[0] - lo[0]) / cell_size_m - 1e-9))
    ny = max(1, math.ceil((hi[1] - lo[1]) / cell_size_m - 1e-9))
    xs = lo[0] + (np.arange(nx) + 0.5) * cell_size_m
    ys = lo[1] + (np.arange(ny) + 0.5) * cell_size_m
    cx, cy = np.meshgrid(xs, ys)
    centers = np.column_stack([cx.ravel(), cy.ravel()])

    indoor = building_footprint_mask(scene, centers)
    out_idx = np.nonzero(~indoor)[0]
    pts3 = np.column_stack([centers[out_idx], np.full(out_idx.size, float(rx_height_m))])

    geometry = compile_geometry(scene)
    best_power = np.full(out_idx.size, -np.inf)
    best_tx = np.full(out_idx.size, "", dtype=object)

    if out_idx.size:
        if threads > 1 and len(txs) > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                powers = list(pool.map(lambda tx: _tx_best_power(scene, geometry, tx, pts3, rt, radio), txs))
        else:
            powers = [_tx_best_power(scene, geometry, tx, pts3, rt, radio) for tx in txs]
        for tx, p_rx in zip(txs, powers):
            better = p_rx > best_power
            best_power[better] = p_rx[better]
            best_tx[better] = tx.device_id

    snr_out = best_power - noise_floor_dbm(radio)
    n_cells = centers.shape[0]
    snr = np.full(n_cells, np.nan)
    capacity = np.zeros(n_cells)
    flags = np.full(n_cells, FLAG_INDOOR, dtype=object)
    server = np.full(n_cells, "", dtype=object)
    snr[out_idx] = snr_out
    capacity[out_idx] = shannon_capacity(snr_out, radio.bandwidth_hz)
    flags[out_idx] = np.where(np.isfinite(snr_out), "", FLAG_OUTAGE).astype(object)
    server[out_idx] = best_tx

    return CoverageMap(
        origin=lo.copy(),
        cell_size_m=float(cell_size_m),
        rx_height_m=float(rx_height_m),
        best_tx=server.reshape(ny, nx),
        snr_db=snr.reshape(ny, nx),
        capacity_bps=capacity.reshape(ny, nx),
        flags=flags.reshape(ny, nx),
        radio=radio,
        rt=rt,
        scene_name=scene.name,
        tx_ids=tuple(d.device_id for d in txs),
    )


def threshold_map(cov: CoverageMap, req: RateRequirement) -> np.ndarray:
    """Boolean pass grid: capacity meets req.rate_bps.

    Evaluated as snr >= inverse-Shannon threshold, the same set by
    monotonicity; indoor (NaN) and outage (-inf) cells never pass.
    """
    threshold = min_snr_for_rate(req.rate_bps, cov.radio.bandwidth_hz)
    with np.errstate(invalid="ignore"):
        return np.asarray(cov.snr_db >= threshold)

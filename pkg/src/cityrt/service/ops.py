"""Pipeline operations behind the service endpoints.

Each op takes a validated request plus the tool config, does the work,
writes its outputs, and returns a response model.  Every op also leaves
two artifacts next to its primary output: a machine-readable run summary
(JSON) and the effective-config echo (YAML).  Neither contains clocks or
host state, so reruns stay byte-identical.
"""

from __future__ import annotations

import json
import math
import os
import shutil
from dataclasses import replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..config import ToolConfig, config_to_dict, load_config, write_effective_config
from ..errors import CityrtError, ConfigError, InputError
from ..ingest import read_ply, write_ply
from ..ingest.convert import ConvertReport, convert_tile
from ..ingest.tiles import parse_tile_name
from ..geodesy import GeoCoord
from ..mesh import simplify_qem, validate
from ..radio import (
    RateRequirement,
    coverage_map,
    export_map,
    min_snr_for_rate,
    threshold_map,
    threshold_to_pgm,
)
from ..scene import (
    default_sectors,
    device_from_antenna,
    extract_scene,
    load_descriptor,
    load_tile_scene,
    write_descriptor,
)
from ..synth import generate_dataset, spec_from_json
from . import schemas as S


def _effective_config(request_config: "str | None", server: ToolConfig) -> ToolConfig:
    return load_config(request_config) if request_config else server


def _write_artifacts(stem: Path, command: str, cfg: ToolConfig, summary: dict) -> S.RunArtifacts:
    """Run summary at <stem>.run.json, config echo at <stem>.config.yaml."""
    stem.parent.mkdir(parents=True, exist_ok=True)
    echo = write_effective_config(cfg, stem.with_name(stem.name + ".config.yaml"))
    run_path = stem.with_name(stem.name + ".run.json")
    doc = {"command": command, "version": __version__, **summary}
    run_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return S.RunArtifacts(run_summary=str(run_path), config_echo=echo)


def _convert_summary(report: ConvertReport) -> S.ConvertSummary:
    return S.ConvertSummary(
        tile=report.tile,
        n_converted=len(report.converted),
        n_skipped=len(report.skipped),
        skipped=[
            S.SkippedModelInfo(model_id=s.model_id, file_name=s.file_name, reason=s.reason)
            for s in report.skipped
        ],
        total_triangles=report.total_triangles,
        dropped_triangles=report.dropped_triangles,
        catalog=report.catalog_path,
        tileinfo=report.tileinfo_path,
        partial=bool(report.skipped),
    )


def synth_op(req: S.SynthRequest, server_cfg: ToolConfig) -> S.SynthResponse:
    cfg = _effective_config(req.config, server_cfg)
    spec = spec_from_json(json.dumps(req.spec))
    report = generate_dataset(spec, req.out_root, crs=cfg.crs, threads=max(1, req.threads))
    truth = json.loads(Path(report.truth_path).read_text())
    summary = _convert_summary(report.convert)
    artifacts = _write_artifacts(
        Path(req.out_root) / "synth",
        "synth",
        cfg,
        {
            "spec": truth["spec"],
            "counts": truth["counts"],
            "convert": summary.model_dump(),
            "effective_config": config_to_dict(cfg),
        },
    )
    return S.SynthResponse(
        tile=spec.tile_name,
        out_root=report.out_root,
        counts=S.SynthCounts(
            buildings=truth["counts"]["buildings"],
            walls=truth["counts"]["walls"],
            models=truth["counts"]["models"],
            antennas=truth["counts"]["antennas"],
        ),
        source_csv=report.source_csv,
        antennas_path=report.antennas_path,
        truth_path=report.truth_path,
        convert=summary,
        artifacts=artifacts,
    )


_INDEX_SUFFIXES = ("_models", "_index", "_catalog")


def infer_tile_name(catalog_path: str) -> str:
    """Tile name from an index file name, e.g. BOS_F_4_models.csv -> BOS_F_4."""
    stem = Path(catalog_path).stem
    for suffix in _INDEX_SUFFIXES:
        if stem.lower().endswith(suffix):
            stem = stem[: -len(suffix)]
            break
    try:
        parse_tile_name(stem)
    except InputError:
        raise ConfigError(
            f"cannot infer a tile name from {catalog_path!r} (tried {stem!r}); pass one explicitly"
        )
    return stem


def convert_op(req: S.ConvertRequest, server_cfg: ToolConfig) -> S.ConvertResponse:
    cfg = _effective_config(req.config, server_cfg)
    tile = req.tile or infer_tile_name(req.catalog)
    report = convert_tile(
        req.catalog, req.obj_dir, tile, req.out_root, crs=cfg.crs, threads=max(1, req.threads)
    )
    summary = _convert_summary(report)
    artifacts = _write_artifacts(
        Path(req.out_root) / f"convert_{tile}",
        "convert",
        cfg,
        {"summary": summary.model_dump(), "effective_config": config_to_dict(cfg)},
    )
    return S.ConvertResponse(summary=summary, artifacts=artifacts)


def scene_op(req: S.SceneBuildRequest, server_cfg: ToolConfig) -> S.SceneBuildResponse:
    cfg = _effective_config(req.config, server_cfg)
    has_tile = req.tile is not None
    has_disc = req.center is not None or req.radius_m is not None
    if has_tile == has_disc:
        raise ConfigError("pass either tile or center+radius_m, not both and not neither")
    if has_disc and (req.center is None or req.radius_m is None):
        raise ConfigError("center and radius_m go together")
    if has_tile:
        scene = load_tile_scene(req.root, req.tile, materials=cfg.materials, type_materials=cfg.type_materials)
    else:
        center = GeoCoord(float(req.center[0]), float(req.center[1]))
        scene = extract_scene(
            req.root, center, float(req.radius_m), materials=cfg.materials, type_materials=cfg.type_materials
        )
    if req.place_tx:
        for a in scene.antennas:
            device_from_antenna(scene, a.antenna_id, role="tx", heights=cfg.pole_heights_m, sectors=default_sectors())
    out = Path(req.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_descriptor(scene, out)
    n_triangles = sum(m.mesh.n_triangles for m in scene.catalog_models)
    artifacts = _write_artifacts(
        out.with_suffix(""),
        "scene",
        cfg,
        {
            "descriptor": str(out),
            "scene_name": scene.name,
            "n_models": len(scene.catalog_models),
            "n_antennas": len(scene.antennas),
            "n_devices": len(scene.devices),
            "n_triangles": n_triangles,
            "effective_config": config_to_dict(cfg),
        },
    )
    return S.SceneBuildResponse(
        descriptor=str(out),
        scene_name=scene.name,
        n_models=len(scene.catalog_models),
        n_antennas=len(scene.antennas),
        n_devices=len(scene.devices),
        n_triangles=n_triangles,
        artifacts=artifacts,
    )


_REQ_NAMES = {30.0: "XR", 700.0: "V2X"}


def _requirement(mbps: float) -> RateRequirement:
    name = _REQ_NAMES.get(float(mbps), f"{mbps:g}Mbps")
    return RateRequirement(name=name, rate_bps=float(mbps) * 1e6)


def coverage_op(req: S.CoverageRequest, server_cfg: ToolConfig) -> S.CoverageResponse:
    cfg = _effective_config(req.config, server_cfg)
    scene = load_descriptor(req.scene, materials=cfg.materials)
    rt_cfg = cfg.rt if req.rays is None else replace(cfg.rt, n_launch_rays=int(req.rays))
    if isinstance(req.tx, str):
        tx_ids = None if req.tx.strip().lower() == "all" else [t.strip() for t in req.tx.split(",") if t.strip()]
    else:
        tx_ids = list(req.tx)
    cov = coverage_map(
        scene,
        radio_cfg=cfg.radio,
        rt_cfg=rt_cfg,
        cell_size_m=float(req.grid_m),
        rx_height_m=float(req.rx_height_m),
        tx_ids=tx_ids,
        threads=max(1, req.threads),
    )
    prefix = Path(req.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    csv_path = prefix.with_name(prefix.name + ".csv")
    pgm_path = prefix.with_name(prefix.name + ".pgm")
    csv_path.write_bytes(export_map(cov, "csv"))
    pgm_path.write_bytes(export_map(cov, "pgm"))

    results = []
    for mbps in req.req_mbps:
        if mbps <= 0 or not math.isfinite(mbps):
            raise ConfigError(f"rate requirement must be positive and finite, got {mbps}")
        requirement = _requirement(mbps)
        mask = threshold_map(cov, requirement)
        map_path = prefix.with_name(prefix.name + f"_req{mbps:g}.pgm")
        map_path.write_bytes(threshold_to_pgm(cov, mask, requirement))
        results.append(
            S.RequirementResult(
                name=requirement.name,
                rate_mbps=float(mbps),
                min_snr_db=min_snr_for_rate(requirement.rate_bps, cfg.radio.bandwidth_hz),
                pass_cells=int(mask.sum()),
                pass_fraction=float(mask.mean()),
                map_path=str(map_path),
            )
        )

    finite = cov.snr_db[np.isfinite(cov.snr_db)]
    stats = S.CoverageStats(
        n_cells=int(cov.snr_db.size),
        indoor_cells=int((cov.flags == "indoor").sum()),
        outage_cells=int((cov.flags == "outage").sum()),
        covered_cells=int(finite.size),
        snr_min_db=float(finite.min()) if finite.size else None,
        snr_max_db=float(finite.max()) if finite.size else None,
        snr_mean_db=float(finite.mean()) if finite.size else None,
    )
    artifacts = _write_artifacts(
        prefix,
        "coverage",
        cfg,
        {
            "scene": str(req.scene),
            "scene_name": cov.scene_name,
            "tx_ids": list(cov.tx_ids),
            "nx": cov.nx,
            "ny": cov.ny,
            "cell_size_m": cov.cell_size_m,
            "rx_height_m": cov.rx_height_m,
            "rt": {"n_launch_rays": rt_cfg.n_launch_rays, "max_reflections": rt_cfg.max_reflections},
            "outputs": {
                "csv": str(csv_path),
                "pgm": str(pgm_path),
                "requirements": [r.model_dump() for r in results],
            },
            "stats": stats.model_dump(),
            "effective_config": config_to_dict(cfg),
        },
    )
    return S.CoverageResponse(
        scene_name=cov.scene_name,
        tx_ids=list(cov.tx_ids),
        nx=cov.nx,
        ny=cov.ny,
        cell_size_m=cov.cell_size_m,
        rx_height_m=cov.rx_height_m,
        csv_path=str(csv_path),
        pgm_path=str(pgm_path),
        requirements=results,
        stats=stats,
        artifacts=artifacts,
    )


def simplify_op(req: S.SimplifyRequest, server_cfg: ToolConfig) -> S.SimplifyResponse:
    cfg = _effective_config(req.config, server_cfg)
    if req.target < 1:
        raise ConfigError(f"target triangle count must be >= 1, got {req.target}")
    mesh = read_ply(req.in_ply)
    out = Path(req.out_ply)
    out.parent.mkdir(parents=True, exist_ok=True)
    if req.target >= mesh.n_triangles:
        # nothing to do: keep the file byte-identical
        if os.path.abspath(req.in_ply) != os.path.abspath(req.out_ply):
            shutil.copyfile(req.in_ply, req.out_ply)
        result, changed = mesh, False
    else:
        result = simplify_qem(mesh, req.target)
        check = validate(result)
        if not check.ok:
            # decimation produced garbage; that is our bug, not the caller's
            raise CityrtError(
                f"simplified mesh failed validation: {len(check.issues)} issue(s), "
                f"first: {check.issues[0].kind} at {check.issues[0].index}"
            )
        write_ply(out, result)
        changed = True
    artifacts = _write_artifacts(
        out.with_suffix(""),
        "simplify",
        cfg,
        {
            "in_ply": str(req.in_ply),
            "out_ply": str(out),
            "in_triangles": mesh.n_triangles,
            "out_triangles": result.n_triangles,
            "target": req.target,
            "changed": changed,
            "effective_config": config_to_dict(cfg),
        },
    )
    return S.SimplifyResponse(
        in_triangles=mesh.n_triangles,
        out_triangles=result.n_triangles,
        target=req.target,
        out_ply=str(out),
        changed=changed,
        artifacts=artifacts,
    )

"""Request/response models for the pipeline service.

Requests reference files by path: the service and its clients share a
filesystem (the CLI runs the app in-process by default).  Each mutating
request may carry `config`, a tool-config YAML path applied for that run
instead of the server's default.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


# ---------------------------------------------------------------- requests


class SynthRequest(_Strict):
    spec: dict = Field(default_factory=dict)  # SynthSpec JSON document
    out_root: str
    threads: int = 1
    config: "str | None" = None


class ConvertRequest(_Strict):
    obj_dir: str
    catalog: str  # CSV or GeoJSON model index
    out_root: str
    tile: "str | None" = None  # default: inferred from the catalog file name
    threads: int = 1
    config: "str | None" = None


class SceneBuildRequest(_Strict):
    root: str  # dataset root
    out: str  # descriptor path to write
    tile: "str | None" = None
    center: "tuple[float, float] | None" = None  # (lon, lat)
    radius_m: "float | None" = None
    place_tx: bool = True  # turn every antenna into a TX device
    config: "str | None" = None


class CoverageRequest(_Strict):
    scene: str  # descriptor path
    out_prefix: str
    tx: "str | list[str]" = "all"
    grid_m: float = 5.0
    rx_height_m: float = 1.5
    req_mbps: list[float] = Field(default_factory=list)
    rays: "int | None" = None  # overrides rt.n_launch_rays
    threads: int = 1
    config: "str | None" = None


class SimplifyRequest(_Strict):
    in_ply: str
    target: int
    out_ply: str
    config: "str | None" = None


# ---------------------------------------------------------------- responses


class HealthResponse(_Strict):
    status: str
    version: str


class MaterialInfo(_Strict):
    name: str
    a: float
    b: float
    c: float
    d: float
    f_min_hz: float
    f_max_hz: float


class SkippedModelInfo(_Strict):
    model_id: str
    file_name: str
    reason: str


class ConvertSummary(_Strict):
    tile: str
    n_converted: int
    n_skipped: int
    skipped: list[SkippedModelInfo]
    total_triangles: int
    dropped_triangles: int
    catalog: str
    tileinfo: str
    partial: bool  # any model skipped


class RunArtifacts(_Strict):
    run_summary: str
    config_echo: str


class ConvertResponse(_Strict):
    summary: ConvertSummary
    artifacts: RunArtifacts


class SynthCounts(_Strict):
    buildings: int
    walls: int
    models: int
    antennas: int


class SynthResponse(_Strict):
    tile: str
    out_root: str
    counts: SynthCounts
    source_csv: str
    antennas_path: str
    truth_path: str
    convert: ConvertSummary
    artifacts: RunArtifacts


class SceneBuildResponse(_Strict):
    descriptor: str
    scene_name: str
    n_models: int  # catalog models (ground excluded)
    n_antennas: int
    n_devices: int
    n_triangles: int  # over catalog models
    artifacts: RunArtifacts


class CoverageStats(_Strict):
    n_cells: int
    indoor_cells: int
    outage_cells: int
    covered_cells: int  # finite SNR
    snr_min_db: "float | None" = None  # over covered cells
    snr_max_db: "float | None" = None
    snr_mean_db: "float | None" = None


class RequirementResult(_Strict):
    name: str
    rate_mbps: float
    min_snr_db: float
    pass_cells: int
    pass_fraction: float
    map_path: str


class CoverageResponse(_Strict):
    scene_name: str
    tx_ids: list[str]
    nx: int
    ny: int
    cell_size_m: float
    rx_height_m: float
    csv_path: str
    pgm_path: str
    requirements: list[RequirementResult]
    stats: CoverageStats
    artifacts: RunArtifacts


class SimplifyResponse(_Strict):
    in_triangles: int
    out_triangles: int
    target: int
    out_ply: str
    changed: bool  # False when target >= input size (file copied verbatim)
    artifacts: RunArtifacts


class ErrorBody(_Strict):
    error: str
    kind: str  # exception class name

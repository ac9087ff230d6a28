"""Command-line front end.

Every command is a thin client of the pipeline service: arguments are
marshalled into a request, the response is printed, and the exit code
follows one contract everywhere:

    0  success
    1  partial result (some models skipped) or server-side failure
    2  caller error: bad arguments, bad files, unknown names

By default the service runs in-process, so no server is needed; point
--server (or CITYRT_SERVER) at a running instance to go over HTTP.  The
dataset root can come from CITYRT_DATASET_ROOT instead of flags.  Heavy
work writes a JSON run summary and a config echo next to its outputs.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import httpx

from . import __version__
from .service.client import make_client

ENV_SERVER = "CITYRT_SERVER"
ENV_DATASET_ROOT = "CITYRT_DATASET_ROOT"

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_USAGE = 2


class Session:
    def __init__(self, server: "str | None", config: "str | None", as_json: bool):
        self.server = server
        self.config = config
        self.as_json = as_json
        self._client: "httpx.Client | None" = None

    @property
    def client(self) -> httpx.Client:
        if self._client is None:
            # a remote server gets the config path per-request instead
            self._client = make_client(self.server, config_path=None if self.server else self.config)
        return self._client

    def post(self, path: str, payload: dict) -> dict:
        """POST and unwrap; exits with the contract code on failure."""
        if self.config is not None:
            payload = {**payload, "config": self.config}
        try:
            response = self.client.post(path, json=payload)
        except httpx.HTTPError as exc:
            click.echo(f"error: cannot reach service: {exc}", err=True)
            sys.exit(EXIT_PARTIAL)
        if response.status_code >= 400:
            detail = _error_text(response)
            click.echo(f"error: {detail}", err=True)
            sys.exit(EXIT_USAGE if response.status_code < 500 else EXIT_PARTIAL)
        body = response.json()
        if self.as_json:
            click.echo(json.dumps(body, indent=2))
        return body


def _error_text(response: httpx.Response) -> str:
    try:
        body = response.json()
    except ValueError:
        return response.text.strip() or f"HTTP {response.status_code}"
    if "error" in body:
        return body["error"]
    if "detail" in body:  # request-validation failures
        detail = body["detail"]
        if isinstance(detail, list):
            parts = []
            for item in detail:
                loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
                parts.append(f"{loc}: {item.get('msg', '?')}")
            return "; ".join(parts)
        return str(detail)
    return f"HTTP {response.status_code}"


def _echo_artifacts(body: dict) -> None:
    artifacts = body.get("artifacts") or {}
    if "run_summary" in artifacts:
        click.echo(f"run summary: {artifacts['run_summary']}")
    if "config_echo" in artifacts:
        click.echo(f"effective config: {artifacts['config_echo']}")


def _dataset_root(value: "str | None", flag: str) -> str:
    root = value or os.environ.get(ENV_DATASET_ROOT)
    if not root:
        click.echo(f"error: pass {flag} or set {ENV_DATASET_ROOT}", err=True)
        sys.exit(EXIT_USAGE)
    return root


@click.group()
@click.version_option(version=__version__, prog_name="cityrt")
@click.option("--server", envvar=ENV_SERVER, default=None, metavar="URL",
              help="Service URL; default runs the service in-process.")
@click.option("--config", "config_path", default=None, metavar="YAML",
              type=click.Path(), help="Tool config applied to this run.")
@click.option("--json", "as_json", is_flag=True, help="Also print the raw response JSON.")
@click.pass_context
def main(ctx: click.Context, server: "str | None", config_path: "str | None", as_json: bool) -> None:
    """City-scale mesh ingest, RF ray tracing, and coverage mapping."""
    ctx.obj = Session(server, config_path, as_json)


@main.command()
@click.option("--in", "obj_dir", required=True, type=click.Path(), metavar="DIR",
              help="Directory holding the raw OBJ models.")
@click.option("--catalog", required=True, type=click.Path(), metavar="FILE",
              help="Model index, CSV or GeoJSON.")
@click.option("--out", "out_root", default=None, type=click.Path(), metavar="ROOT",
              help=f"Dataset root to write (default ${ENV_DATASET_ROOT}).")
@click.option("--crs", "crs_config", default=None, type=click.Path(), metavar="YAML",
              help="Config file whose crs section overrides the projection.")
@click.option("--tile", default=None, help="Tile name; default inferred from the catalog file name.")
@click.option("--threads", default=1, show_default=True, help="Worker threads for model conversion.")
@click.pass_obj
def convert(session: Session, obj_dir: str, catalog: str, out_root: "str | None",
            crs_config: "str | None", tile: "str | None", threads: int) -> None:
    """Convert raw OBJ models into the PLY + GeoJSON dataset layout."""
    if crs_config is not None:
        session.config = crs_config
    payload = {
        "obj_dir": obj_dir,
        "catalog": catalog,
        "out_root": _dataset_root(out_root, "--out"),
        "tile": tile,
        "threads": threads,
    }
    body = session.post("/convert", payload)
    summary = body["summary"]
    click.echo(
        f"tile {summary['tile']}: {summary['n_converted']} models converted, "
        f"{summary['n_skipped']} skipped, {summary['total_triangles']} triangles "
        f"({summary['dropped_triangles']} degenerate dropped)"
    )
    for skip in summary["skipped"]:
        click.echo(f"  skipped {skip['model_id']} ({skip['file_name']}): {skip['reason']}", err=True)
    click.echo(f"catalog: {summary['catalog']}")
    _echo_artifacts(body)
    if summary["partial"]:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.option("--tile", default=None, help="Load one converted tile by name.")
@click.option("--center", default=None, metavar="LON,LAT", help="Extract around a geographic point.")
@click.option("--radius", "radius_m", default=None, type=float, metavar="M", help="Extraction radius.")
@click.option("--root", default=None, type=click.Path(), metavar="ROOT",
              help=f"Dataset root to read (default ${ENV_DATASET_ROOT}).")
@click.option("--out", "out_path", required=True, type=click.Path(), metavar="FILE",
              help="Scene descriptor to write.")
@click.option("--no-tx", is_flag=True, help="Do not place TX devices on the antennas.")
@click.pass_obj
def scene(session: Session, tile: "str | None", center: "str | None", radius_m: "float | None",
          root: "str | None", out_path: str, no_tx: bool) -> None:
    """Build a scene descriptor from a tile or a point + radius."""
    payload: dict = {
        "root": _dataset_root(root, "--root"),
        "out": out_path,
        "tile": tile,
        "place_tx": not no_tx,
    }
    if center is not None:
        parts = center.split(",")
        if len(parts) != 2:
            click.echo(f"error: --center wants LON,LAT, got {center!r}", err=True)
            sys.exit(EXIT_USAGE)
        try:
            payload["center"] = (float(parts[0]), float(parts[1]))
        except ValueError:
            click.echo(f"error: --center wants numbers, got {center!r}", err=True)
            sys.exit(EXIT_USAGE)
    if radius_m is not None:
        payload["radius_m"] = radius_m
    body = session.post("/scenes/build", payload)
    click.echo(
        f"scene {body['scene_name']}: {body['n_models']} models, "
        f"{body['n_triangles']} triangles, {body['n_antennas']} antennas, "
        f"{body['n_devices']} devices"
    )
    click.echo(f"descriptor: {body['descriptor']}")
    _echo_artifacts(body)


@main.command()
@click.option("--scene", "descriptor", required=True, type=click.Path(), metavar="FILE",
              help="Scene descriptor from the scene command.")
@click.option("--tx", default="all", show_default=True,
              help="Transmitters: 'all' or comma-separated device ids.")
@click.option("--grid", "grid_m", default=5.0, show_default=True, type=float, help="Cell size in meters.")
@click.option("--rxh", "rx_height_m", default=1.5, show_default=True, type=float,
              help="Receiver height in meters.")
@click.option("--out", "out_prefix", required=True, type=click.Path(), metavar="PREFIX",
              help="Output prefix for the map files.")
@click.option("--req", "req_mbps", multiple=True, type=float, metavar="MBPS",
              help="Rate requirement in Mbit/s; repeatable.")
@click.option("--rays", default=None, type=int, help="Launch rays per trace (default from config, 10000).")
@click.option("--threads", default=1, show_default=True, help="Worker threads across transmitters.")
@click.pass_obj
def coverage(session: Session, descriptor: str, tx: str, grid_m: float, rx_height_m: float,
             out_prefix: str, req_mbps: tuple, rays: "int | None", threads: int) -> None:
    """Trace a best-server SNR/capacity map and export CSV + PGM."""
    payload = {
        "scene": descriptor,
        "tx": tx,
        "grid_m": grid_m,
        "rx_height_m": rx_height_m,
        "out_prefix": out_prefix,
        "req_mbps": list(req_mbps),
        "rays": rays,
        "threads": threads,
    }
    body = session.post("/coverage", payload)
    stats = body["stats"]
    click.echo(
        f"scene {body['scene_name']}: {body['nx']}x{body['ny']} cells at {body['cell_size_m']} m, "
        f"tx: {', '.join(body['tx_ids'])}"
    )
    covered = stats["covered_cells"]
    click.echo(
        f"covered {covered}/{stats['n_cells']} cells "
        f"({stats['indoor_cells']} indoor, {stats['outage_cells']} outage)"
    )
    if covered:
        click.echo(
            f"snr dB: min {stats['snr_min_db']:.2f}, mean {stats['snr_mean_db']:.2f}, "
            f"max {stats['snr_max_db']:.2f}"
        )
    for req in body["requirements"]:
        click.echo(
            f"req {req['name']} ({req['rate_mbps']:g} Mbps, needs {req['min_snr_db']:.2f} dB): "
            f"{req['pass_cells']} cells pass ({100.0 * req['pass_fraction']:.1f}%) -> {req['map_path']}"
        )
    click.echo(f"csv: {body['csv_path']}")
    click.echo(f"pgm: {body['pgm_path']}")
    _echo_artifacts(body)


@main.command()
@click.option("--in", "in_ply", required=True, type=click.Path(), metavar="PLY", help="Input mesh.")
@click.option("--target", required=True, type=int, help="Target triangle count.")
@click.option("--out", "out_ply", required=True, type=click.Path(), metavar="PLY", help="Output mesh.")
@click.pass_obj
def simplify(session: Session, in_ply: str, target: int, out_ply: str) -> None:
    """Decimate a PLY mesh to a target triangle count."""
    body = session.post("/simplify", {"in_ply": in_ply, "target": target, "out_ply": out_ply})
    if body["changed"]:
        click.echo(f"{body['in_triangles']} -> {body['out_triangles']} triangles (target {body['target']})")
    else:
        click.echo(f"already at {body['in_triangles']} triangles <= target {body['target']}; copied unchanged")
    click.echo(f"mesh: {body['out_ply']}")
    _echo_artifacts(body)


@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(), metavar="JSON",
              help="Synthetic city spec file.")
@click.option("--out", "out_root", required=True, type=click.Path(), metavar="ROOT",
              help="Dataset root to create.")
@click.option("--threads", default=1, show_default=True, help="Worker threads for model conversion.")
@click.pass_obj
def synth(session: Session, spec_path: str, out_root: str, threads: int) -> None:
    """Generate a synthetic city dataset and convert it in place."""
    try:
        spec_doc = json.loads(Path(spec_path).read_text(encoding="utf-8"))
    except OSError as exc:
        click.echo(f"error: cannot read spec: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    except json.JSONDecodeError as exc:
        click.echo(f"error: spec is not valid JSON: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    body = session.post("/synth", {"spec": spec_doc, "out_root": out_root, "threads": threads})
    counts = body["counts"]
    click.echo(
        f"tile {body['tile']}: {counts['buildings']} buildings, {counts['walls']} walls, "
        f"{counts['antennas']} antennas"
    )
    click.echo(f"converted {body['convert']['n_converted']} models, "
               f"{body['convert']['total_triangles']} triangles")
    click.echo(f"dataset: {body['out_root']}")
    click.echo(f"ground truth: {body['truth_path']}")
    _echo_artifacts(body)
    if body["convert"]["partial"]:
        sys.exit(EXIT_PARTIAL)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8440, show_default=True, type=int)
@click.pass_obj
def serve(session: Session, host: str, port: int) -> None:
    """Run the pipeline service over HTTP."""
    try:
        import uvicorn
    except ImportError:
        click.echo("error: the serve command needs uvicorn installed", err=True)
        sys.exit(EXIT_USAGE)
    from .service import create_app

    uvicorn.run(create_app(session.config), host=host, port=port)


if __name__ == "__main__":
    main()

"""FastAPI application exposing the pipeline.

The service is stateless apart from its tool config, loaded once at app
creation; requests may override it per-run via a config path.  Caller
mistakes (bad files, bad names, bad numbers) come back as 4xx with the
exception class name; anything else is a 500.
"""

from __future__ import annotations

import logging

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..config import ToolConfig, config_to_dict, load_config
from ..errors import CityrtError, InputError, NotFoundError
from . import ops
from . import schemas as S

log = logging.getLogger(__name__)


def create_app(config_path: "str | None" = None, config: "ToolConfig | None" = None) -> FastAPI:
    if config is None:
        config = load_config(config_path)
    app = FastAPI(title="cityrt", version=__version__)
    app.state.config = config

    @app.exception_handler(CityrtError)
    async def _cityrt_error(request: Request, exc: CityrtError):
        if isinstance(exc, NotFoundError):
            status = 404
        elif isinstance(exc, InputError):
            status = 400
        else:
            status = 500
            log.exception("internal error on %s", request.url.path, exc_info=exc)
        body = S.ErrorBody(error=str(exc), kind=type(exc).__name__)
        return JSONResponse(status_code=status, content=body.model_dump())

    @app.get("/health", response_model=S.HealthResponse)
    async def health() -> S.HealthResponse:
        return S.HealthResponse(status="ok", version=__version__)

    @app.get("/config")
    async def get_config() -> dict:
        return config_to_dict(app.state.config)

    @app.get("/materials", response_model=list[S.MaterialInfo])
    async def materials() -> list[S.MaterialInfo]:
        return [
            S.MaterialInfo(
                name=m.name, a=m.a, b=m.b, c=m.c, d=m.d, f_min_hz=m.f_min_hz, f_max_hz=m.f_max_hz
            )
            for _, m in sorted(app.state.config.materials.items())
        ]

    @app.post("/synth", response_model=S.SynthResponse)
    def synth(req: S.SynthRequest) -> S.SynthResponse:
        return ops.synth_op(req, app.state.config)

    @app.post("/convert", response_model=S.ConvertResponse)
    def convert(req: S.ConvertRequest) -> S.ConvertResponse:
        return ops.convert_op(req, app.state.config)

    @app.post("/scenes/build", response_model=S.SceneBuildResponse)
    def scenes_build(req: S.SceneBuildRequest) -> S.SceneBuildResponse:
        return ops.scene_op(req, app.state.config)

    @app.post("/coverage", response_model=S.CoverageResponse)
    def coverage(req: S.CoverageRequest) -> S.CoverageResponse:
        return ops.coverage_op(req, app.state.config)

    @app.post("/simplify", response_model=S.SimplifyResponse)
    def simplify(req: S.SimplifyRequest) -> S.SimplifyResponse:
        return ops.simplify_op(req, app.state.config)

    return app

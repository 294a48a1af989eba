"""HTTP front end: one POST endpoint runs a command, two GET endpoints describe the service."""

from __future__ import annotations

from fastapi import FastAPI

from . import gallery as gl
from .models import ALL_COMMANDS, GalleryInfo, RunConfig, RunResult
from .service import execute


def create_app() -> FastAPI:
    app = FastAPI(title="heisconvex", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "commands": list(ALL_COMMANDS)}

    @app.get("/gallery", response_model=list[GalleryInfo])
    def gallery() -> list[GalleryInfo]:
        return [GalleryInfo(name=n, defaults=gl.DEFAULTS[n]) for n in gl.names()]

    # Sync handler: FastAPI runs it in its worker pool, so the numerics do not block the loop.
    @app.post("/run", response_model=RunResult)
    def run(cfg: RunConfig) -> RunResult:
        return execute(cfg)

    return app


app = create_app()

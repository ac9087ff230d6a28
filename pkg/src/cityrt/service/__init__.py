"""HTTP service wrapping the pipeline; the CLI is a client of this app."""

from .app import create_app

__all__ = ["create_app"]

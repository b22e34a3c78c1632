"""FastAPI wrapper around the diagnosis pipeline."""

from .app import app, create_app

__all__ = ["app", "create_app"]

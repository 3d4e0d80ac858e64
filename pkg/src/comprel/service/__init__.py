"""HTTP service wrapping the core library."""

from comprel.service.app import app, create_app

__all__ = ["app", "create_app"]

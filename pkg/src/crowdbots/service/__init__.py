"""FastAPI wire protocol around a running platform session."""

from .app import LiveSession, create_app  # noqa: F401

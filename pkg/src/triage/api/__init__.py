"""HTTP layer: in-memory session store and the FastAPI application factory."""

from .app import create_app
from .store import SessionStore, StoredSession

__all__ = ["create_app", "SessionStore", "StoredSession"]

"""HTTP service: persistence, blob store, background jobs, and the API app."""
from .app import create_app
from .config import Principal, Role, ServiceConfig
from .store import BlobRef, MediaKind, Store

__all__ = ["BlobRef", "MediaKind", "Principal", "Role", "ServiceConfig", "Store", "create_app"]

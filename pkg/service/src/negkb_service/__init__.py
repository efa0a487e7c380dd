"""Inference sidecar for the negation pipeline."""

from .app import create_app
from .backends import build_backends, canonical, dedup_tokens
from .config import ServiceConfig
from .dump import dump_caches

__version__ = "0.1.0"

__all__ = ["ServiceConfig", "build_backends", "canonical", "create_app",
           "dedup_tokens", "dump_caches"]

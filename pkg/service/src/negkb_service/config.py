"""Service configuration: backend choice and pinned model identifiers."""

from __future__ import annotations

import os
from dataclasses import dataclass

BACKEND_ENV = "NEGKB_SERVICE_BACKEND"
DIM_ENV = "NEGKB_SERVICE_DIM"
EMBED_MODEL_ENV = "NEGKB_SERVICE_EMBED_MODEL"
MASK_MODEL_ENV = "NEGKB_SERVICE_MASK_MODEL"

MAX_BATCH = 256
MAX_TOP_K = 500


@dataclass(frozen=True)
class ServiceConfig:
    backend: str = "deterministic"
    dimension: int = 32
    embed_model: str = "hash-embedder-v1"
    mask_model: str = "hash-masker-v1"

    @classmethod
    def from_env(cls) -> "ServiceConfig":
        backend = os.environ.get(BACKEND_ENV, "deterministic")
        defaults = cls()
        if backend == "models":
            defaults = cls(
                backend="models",
                dimension=384,
                embed_model="sentence-transformers/all-MiniLM-L6-v2",
                mask_model="bert-base-uncased",
            )
        return cls(
            backend=backend,
            dimension=int(os.environ.get(DIM_ENV, defaults.dimension)),
            embed_model=os.environ.get(EMBED_MODEL_ENV, defaults.embed_model),
            mask_model=os.environ.get(MASK_MODEL_ENV, defaults.mask_model),
        )

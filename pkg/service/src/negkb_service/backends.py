"""Model backends behind the two endpoints.

The deterministic backend derives embeddings and token rankings from hashes
of the input text, so it needs no weights, answers identically on every
machine, and is the default for tests and cache fixtures. The ``models``
backend wraps the pinned pretrained models and is selected via
``NEGKB_SERVICE_BACKEND=models``.
"""

from __future__ import annotations

import hashlib
import re
from typing import Protocol

import numpy as np

from .config import ServiceConfig

MASK_SLOT = "[MASK]"

_WS = re.compile(r"\s+")


def canonical(text: str) -> str:
    """The canonical phrase form shared with the pipeline's file formats."""
    return _WS.sub(" ", text.strip().lower()).rstrip(".").strip()


def _seed_for(text: str, salt: str) -> int:
    digest = hashlib.sha256(f"{salt}\x00{text}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


class EmbedBackend(Protocol):
    model_id: str
    dimension: int

    def embed(self, texts: list[str]) -> np.ndarray:
        """Unit-normalized vectors, one row per input text."""


class MaskBackend(Protocol):
    model_id: str

    def predict_raw(self, template: str, top_k: int) -> list[str]:
        """Top-k fill tokens in model rank order; may contain duplicates."""


class DeterministicEmbedder:
    """Hash-seeded random unit vectors; identical texts embed identically."""

    def __init__(self, config: ServiceConfig):
        self.model_id = config.embed_model
        self.dimension = config.dimension

    def embed(self, texts: list[str]) -> np.ndarray:
        rows = []
        for text in texts:
            rng = np.random.default_rng(_seed_for(canonical(text), self.model_id))
            vector = rng.standard_normal(self.dimension)
            rows.append(vector / np.linalg.norm(vector))
        return np.stack(rows) if rows else np.zeros((0, self.dimension))


class DeterministicMasker:
    """Hash-seeded token ranking over a small synthetic vocabulary.

    Draws intentionally collide so the dedup step in the endpoint has work
    to do; the raw (duplicate-bearing) list stays accessible for audits.
    """

    def __init__(self, config: ServiceConfig):
        self.model_id = config.mask_model

    def predict_raw(self, template: str, top_k: int) -> list[str]:
        rng = np.random.default_rng(_seed_for(template, self.model_id))
        vocabulary = max(10, top_k)
        return [f"tok{int(i)}" for i in rng.integers(0, vocabulary, size=top_k * 2)]


class PretrainedEmbedder:
    """Sentence-embedding model via sentence-transformers (lazy import)."""

    def __init__(self, config: ServiceConfig):
        from sentence_transformers import SentenceTransformer

        self.model_id = config.embed_model
        self._model = SentenceTransformer(config.embed_model)
        self.dimension = self._model.get_sentence_embedding_dimension()

    def embed(self, texts: list[str]) -> np.ndarray:
        return self._model.encode(
            texts, convert_to_numpy=True, normalize_embeddings=True
        ).astype(np.float64)


class PretrainedMasker:
    """Masked-token prediction via a transformers fill-mask pipeline."""

    def __init__(self, config: ServiceConfig):
        from transformers import pipeline

        self.model_id = config.mask_model
        self._pipe = pipeline("fill-mask", model=config.mask_model)

    def predict_raw(self, template: str, top_k: int) -> list[str]:
        prompt = template.replace(MASK_SLOT, self._pipe.tokenizer.mask_token)
        predictions = self._pipe(prompt, top_k=top_k)
        return [p["token_str"].strip() for p in predictions]


def build_backends(config: ServiceConfig) -> tuple[EmbedBackend, MaskBackend]:
    if config.backend == "deterministic":
        return DeterministicEmbedder(config), DeterministicMasker(config)
    if config.backend == "models":
        return PretrainedEmbedder(config), PretrainedMasker(config)
    raise ValueError(f"unknown backend {config.backend!r}")


def dedup_tokens(tokens: list[str], top_k: int) -> list[str]:
    """Collapse duplicates, keep rank order, truncate to top_k."""
    seen: set[str] = set()
    out: list[str] = []
    for token in tokens:
        if token not in seen:
            seen.add(token)
            out.append(token)
        if len(out) >= top_k:
            break
    return out

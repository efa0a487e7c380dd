"""Concept-embedding store and the cosine neighbor ranking.

Embedding files use the word2vec text layout: an optional ``<count> <dim>``
header, then one ``token v1 .. vd`` line per concept, whitespace-delimited.
Multi-word concepts appear as underscore-joined tokens. Loading fails fast on
dimension mismatches, non-finite values and zero vectors (cosine would be
undefined), so downstream ranking never has to re-check.
"""

from __future__ import annotations

import numpy as np

from .errors import IngestionError, UnknownConceptError
from .kb import Source, _iter_lines
from .text import normalize


class VectorStore:
    """Immutable map concept -> fixed-dimension vector."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        if not vectors:
            raise ValueError("vector store must hold at least one concept")
        dims = {v.shape for v in vectors.values()}
        if len(dims) != 1:
            raise ValueError(f"inconsistent vector dimensions: {sorted(dims)}")
        self._concepts = sorted(vectors)
        self._matrix = np.stack([np.asarray(vectors[c], dtype=np.float64) for c in self._concepts])
        if not np.all(np.isfinite(self._matrix)):
            raise ValueError("vectors contain non-finite values")
        self._norms = np.linalg.norm(self._matrix, axis=1)
        if np.any(self._norms == 0.0):
            bad = [c for c, n in zip(self._concepts, self._norms) if n == 0.0]
            raise ValueError(f"zero vector for {bad[0]!r}; cosine undefined")
        self._row = {c: i for i, c in enumerate(self._concepts)}

    @property
    def dimension(self) -> int:
        return self._matrix.shape[1]

    @property
    def concepts(self) -> list[str]:
        return list(self._concepts)

    def __contains__(self, concept: str) -> bool:
        return normalize(concept) in self._row

    def __len__(self) -> int:
        return len(self._concepts)

    def vector(self, concept: str) -> np.ndarray:
        key = normalize(concept)
        if key not in self._row:
            raise UnknownConceptError(f"no vector for concept {key!r}")
        return self._matrix[self._row[key]].copy()

    def cosines_to(self, concept: str) -> dict[str, float]:
        """Cosine of every stored concept against ``concept`` (itself included)."""
        key = normalize(concept)
        if key not in self._row:
            raise UnknownConceptError(f"no vector for concept {key!r}")
        target = self._matrix[self._row[key]]
        sims = (self._matrix @ target) / (self._norms * np.linalg.norm(target))
        return {c: float(s) for c, s in zip(self._concepts, sims)}


def load_embeddings(source: Source) -> VectorStore:
    """Parse a word2vec-style text file into a :class:`VectorStore`."""
    vectors: dict[str, np.ndarray] = {}
    declared: tuple[int, int] | None = None
    dim: int | None = None
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if declared is None and dim is None and len(parts) == 2:
            try:
                declared = (int(parts[0]), int(parts[1]))
                continue
            except ValueError:
                pass  # two-field data line; fall through to normal parsing
        if len(parts) < 2:
            raise IngestionError(f"line {lineno}: vector row needs a token and values")
        concept = normalize(parts[0].replace("_", " "))
        try:
            values = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError as exc:
            raise IngestionError(f"line {lineno}: {exc}") from exc
        if dim is None:
            dim = values.size
        elif values.size != dim:
            raise IngestionError(f"line {lineno}: expected {dim} values, got {values.size}")
        if concept in vectors:
            raise IngestionError(f"line {lineno}: duplicate vector for {concept!r}")
        vectors[concept] = values
    if declared is not None:
        count, header_dim = declared
        if count != len(vectors) or (dim is not None and header_dim != dim):
            raise IngestionError(
                f"header declares {count}x{header_dim}, file holds {len(vectors)}x{dim}"
            )
    if not vectors:
        raise IngestionError("embedding file holds no vectors")
    return VectorStore(vectors)


def rank_by_similarity(store: VectorStore, target: str) -> list[tuple[str, float]]:
    """Every other stored concept, cosine-descending, ties broken by name."""
    key = normalize(target)
    sims = store.cosines_to(key)
    sims.pop(key, None)
    return sorted(sims.items(), key=lambda cs: (-cs[1], cs[0]))

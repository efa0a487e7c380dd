"""Inference contracts: phrase similarity and masked-token prediction.

Both contracts have a file-cache implementation (the deterministic default
for batch runs and tests) and a remote HTTP implementation talking to the
inference sidecar. Cache files are JSONL; a leading record carrying a
``model`` key (or ``#`` comment lines) is treated as header metadata so the
model identity travels with the cache.
"""

from __future__ import annotations

import json
import threading
from pathlib import Path
from typing import Iterable, Protocol

import httpx

from .errors import CacheMissError, MalformedProbeError, RemoteProviderError
from .text import normalize, sim_key, token_matches_concept

MASK_SLOT = "[MASK]"
DEFAULT_PROBE_TEMPLATE = "[MASK] {phrase}."


class PhraseSimilarityProvider(Protocol):
    def similarity(self, a: str, b: str) -> float:
        """Symmetric semantic similarity of two phrases, in [-1, 1]."""


class MaskPredictor(Protocol):
    def predict(self, template: str, tau: int) -> list[str]:
        """Up to ``tau`` predicted fill tokens, best first, no duplicates."""


def build_probe(phrase: str, template: str = DEFAULT_PROBE_TEMPLATE) -> str:
    """Render the probe for a candidate phrase, e.g. ``[MASK] eat grass.``"""
    return template.format(phrase=normalize(phrase))


def probe_rank(predictor: MaskPredictor, template: str, concept: str, tau: int) -> int | None:
    """1-based rank of the first predicted token matching ``concept``.

    Returns None when no match occurs within the top ``tau`` predictions.
    """
    if tau < 1:
        raise ValueError("tau must be >= 1")
    if template.count(MASK_SLOT) != 1:
        raise MalformedProbeError(f"template needs exactly one {MASK_SLOT} slot: {template!r}")
    tokens = predictor.predict(template, tau)
    for rank, token in enumerate(tokens[:tau], start=1):
        if token_matches_concept(token, concept):
            return rank
    return None


def _read_jsonl(path: str | Path) -> tuple[list[dict], str | None]:
    """All data records plus the model id from any header record."""
    records: list[dict] = []
    model: str | None = None
    with open(path, encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: line {lineno}: {exc}") from exc
            if not isinstance(record, dict):
                raise ValueError(f"{path}: line {lineno}: expected an object")
            if "model" in record and not ({"a", "b", "sim"} <= record.keys()
                                          or {"template", "tokens"} <= record.keys()):
                model = str(record["model"])
                continue
            records.append(record)
    return records, model


class CachedSimilarity:
    """Similarity lookups against a symmetric pair cache.

    Identical phrases short-circuit to 1.0 without a lookup. A missing pair
    raises :class:`CacheMissError` in strict mode; otherwise it is resolved
    through ``fallback`` and the answer is appended to the cache (and to
    ``append_to`` when given) so the next run is deterministic.
    """

    def __init__(
        self,
        entries: dict[tuple[str, str], float] | None = None,
        strict: bool = True,
        fallback: PhraseSimilarityProvider | None = None,
        append_to: str | Path | None = None,
        model: str | None = None,
    ):
        self._entries = dict(entries or {})
        self.strict = strict
        self.fallback = fallback
        self.append_to = Path(append_to) if append_to else None
        self.model = model
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def similarity(self, a: str, b: str) -> float:
        na, nb = normalize(a), normalize(b)
        if na == nb:
            return 1.0
        key = sim_key(na, nb)
        if key in self._entries:
            return self._entries[key]
        if self.strict or self.fallback is None:
            raise CacheMissError(f"similarity cache has no entry for {key!r}")
        value = self.fallback.similarity(na, nb)
        with self._write_lock:
            self._entries[key] = value
            if self.append_to is not None:
                with open(self.append_to, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps({"a": key[0], "b": key[1], "sim": value}) + "\n")
        return value


def load_similarity_cache(
    path: str | Path,
    strict: bool = True,
    fallback: PhraseSimilarityProvider | None = None,
    append_misses: bool = False,
) -> CachedSimilarity:
    records, model = _read_jsonl(path)
    entries: dict[tuple[str, str], float] = {}
    for record in records:
        try:
            a, b, sim = str(record["a"]), str(record["b"]), float(record["sim"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"{path}: bad similarity record {record!r}") from exc
        if not -1.0 <= sim <= 1.0:
            raise ValueError(f"{path}: similarity {sim} outside [-1,1]")
        entries[sim_key(a, b)] = sim
    return CachedSimilarity(
        entries,
        strict=strict,
        fallback=fallback,
        append_to=path if append_misses else None,
        model=model,
    )


def write_similarity_cache(
    path: str | Path,
    entries: dict[tuple[str, str], float] | Iterable[tuple[str, str, float]],
    model: str | None = None,
) -> None:
    """Write a cache file with keys in canonical (a <= b) order."""
    if isinstance(entries, dict):
        rows = [(a, b, sim) for (a, b), sim in entries.items()]
    else:
        rows = list(entries)
    canonical = {sim_key(a, b): float(sim) for a, b, sim in rows}
    with open(path, "w", encoding="utf-8") as handle:
        if model is not None:
            handle.write(json.dumps({"model": model, "kind": "similarity"}) + "\n")
        for (a, b), sim in sorted(canonical.items()):
            handle.write(json.dumps({"a": a, "b": b, "sim": sim}) + "\n")


class CachedMaskPredictor:
    """Masked-token predictions served from a template-keyed cache.

    Each cached list is the model's top-``tau_max`` ranking; queries truncate
    it, so a rank observed at some tau is identical at any larger tau that is
    still within the recorded depth.
    """

    def __init__(
        self,
        entries: dict[str, list[str]] | None = None,
        strict: bool = True,
        fallback: MaskPredictor | None = None,
        append_to: str | Path | None = None,
        model: str | None = None,
        fallback_depth: int = 100,
    ):
        self._entries = {k: list(v) for k, v in (entries or {}).items()}
        self.strict = strict
        self.fallback = fallback
        self.append_to = Path(append_to) if append_to else None
        self.model = model
        self.fallback_depth = fallback_depth
        self._write_lock = threading.Lock()

    def __len__(self) -> int:
        return len(self._entries)

    def predict(self, template: str, tau: int) -> list[str]:
        if tau < 1:
            raise ValueError("tau must be >= 1")
        if template in self._entries:
            return self._entries[template][:tau]
        if self.strict or self.fallback is None:
            raise CacheMissError(f"probe cache has no entry for {template!r}")
        depth = max(tau, self.fallback_depth)
        tokens = self.fallback.predict(template, depth)
        with self._write_lock:
            self._entries[template] = tokens
            if self.append_to is not None:
                with open(self.append_to, "a", encoding="utf-8") as handle:
                    handle.write(json.dumps({"template": template, "tokens": tokens}) + "\n")
        return tokens[:tau]


def load_probe_cache(
    path: str | Path,
    strict: bool = True,
    fallback: MaskPredictor | None = None,
    append_misses: bool = False,
) -> CachedMaskPredictor:
    records, model = _read_jsonl(path)
    entries: dict[str, list[str]] = {}
    for record in records:
        try:
            template, tokens = str(record["template"]), list(record["tokens"])
        except (KeyError, TypeError) as exc:
            raise ValueError(f"{path}: bad probe record {record!r}") from exc
        deduped: list[str] = []
        seen: set[str] = set()
        for token in tokens:
            token = str(token)
            if token not in seen:
                seen.add(token)
                deduped.append(token)
        entries[template] = deduped
    return CachedMaskPredictor(
        entries,
        strict=strict,
        fallback=fallback,
        append_to=path if append_misses else None,
        model=model,
    )


def write_probe_cache(
    path: str | Path, entries: dict[str, list[str]], model: str | None = None
) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        if model is not None:
            handle.write(json.dumps({"model": model, "kind": "probe"}) + "\n")
        for template in sorted(entries):
            handle.write(json.dumps({"template": template, "tokens": list(entries[template])}) + "\n")


class RemoteSimilarityProvider:
    """Phrase similarity via the sidecar's /embed endpoint.

    The service returns unit-normalized vectors, so the dot product of two
    embeddings is their cosine. Embeddings are memoized per phrase.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self._client = httpx.Client(timeout=timeout)
        self._memo: dict[str, list[float]] = {}
        self._lock = threading.Lock()

    def _embed(self, texts: list[str]) -> list[list[float]]:
        try:
            response = self._client.post(f"{self.endpoint}/embed", json={"texts": texts})
            response.raise_for_status()
            vectors = response.json()["vectors"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise RemoteProviderError(f"/embed failed: {exc}") from exc
        if len(vectors) != len(texts):
            raise RemoteProviderError("embedding count does not match request")
        return vectors

    def similarity(self, a: str, b: str) -> float:
        na, nb = normalize(a), normalize(b)
        with self._lock:
            missing = [t for t in dict.fromkeys((na, nb)) if t not in self._memo]
        if missing:
            for text, vec in zip(missing, self._embed(missing)):
                with self._lock:
                    self._memo[text] = vec
        va, vb = self._memo[na], self._memo[nb]
        dot = sum(x * y for x, y in zip(va, vb))
        return max(-1.0, min(1.0, dot))


class RemoteMaskPredictor:
    """Masked-token prediction via the sidecar's /predict_masked endpoint."""

    def __init__(self, endpoint: str, timeout: float = 30.0):
        self.endpoint = endpoint.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def predict(self, template: str, tau: int) -> list[str]:
        if tau < 1:
            raise ValueError("tau must be >= 1")
        try:
            response = self._client.post(
                f"{self.endpoint}/predict_masked",
                json={"template": template, "top_k": tau},
            )
            response.raise_for_status()
            tokens = response.json()["tokens"]
        except (httpx.HTTPError, KeyError, ValueError) as exc:
            raise RemoteProviderError(f"/predict_masked failed: {exc}") from exc
        return [str(t) for t in tokens][:tau]

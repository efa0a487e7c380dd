from __future__ import annotations

import random
from pathlib import Path

import pytest

from negkb.errors import ProviderError
from negkb.kb import KbIndex, Statement
from negkb.miner import NegationMiner, PipelineResources
from negkb.providers import CachedSimilarity, load_probe_cache, load_similarity_cache
from negkb.taxonomy import load_taxonomy
from negkb.text import sim_key
from negkb.vectors import load_embeddings
from negkb.kb import load_kb

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def elephant_dir() -> Path:
    return FIXTURES / "elephant"


@pytest.fixture(scope="session")
def eval_dir() -> Path:
    return FIXTURES / "eval"


@pytest.fixture(scope="session")
def elephant_kb(elephant_dir):
    return load_kb(elephant_dir / "kb.tsv")


@pytest.fixture(scope="session")
def elephant_tax(elephant_dir):
    return load_taxonomy(elephant_dir / "taxonomy.tsv")


@pytest.fixture(scope="session")
def elephant_vectors(elephant_dir):
    return load_embeddings(elephant_dir / "vectors.txt")


@pytest.fixture()
def elephant_sim(elephant_dir):
    return load_similarity_cache(elephant_dir / "sim_cache.jsonl")


@pytest.fixture()
def elephant_probes(elephant_dir):
    return load_probe_cache(elephant_dir / "probe_cache.jsonl")


@pytest.fixture()
def elephant_resources(elephant_kb, elephant_tax, elephant_vectors, elephant_sim, elephant_probes):
    return PipelineResources(
        elephant_kb, elephant_tax, elephant_vectors, elephant_sim, elephant_probes
    )


@pytest.fixture()
def elephant_miner(elephant_resources):
    # The worked example's settings: gamma 3 siblings, probe window 100.
    return NegationMiner(gamma=3, lambda_=0.7, tau=100, beta=0.05).fit(elephant_resources)


def make_kb(assertions: dict[str, set[str] | list[str]]) -> KbIndex:
    """Build an in-memory index from {concept: phrases}."""
    return KbIndex(
        Statement(c, p) for c, phrases in assertions.items() for p in phrases
    )


class DictSim:
    """Similarity provider over an explicit pair table (default for misses)."""

    def __init__(self, table: dict[tuple[str, str], float] | None = None, default: float = 0.0):
        self.table = {sim_key(a, b): v for (a, b), v in (table or {}).items()}
        self.default = default

    def similarity(self, a: str, b: str) -> float:
        key = sim_key(a, b)
        if key[0] == key[1]:
            return 1.0
        return self.table.get(key, self.default)


class HashSim:
    """Deterministic pseudo-random similarity derived from the pair itself."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def similarity(self, a: str, b: str) -> float:
        key = sim_key(a, b)
        if key[0] == key[1]:
            return 1.0
        rng = random.Random((hash(key) ^ self.seed) & 0xFFFFFFFF)
        return rng.uniform(-1.0, 1.0)


class FailingSim:
    def similarity(self, a: str, b: str) -> float:
        raise ProviderError("similarity backend down")


class FailingPredictor:
    def predict(self, template: str, tau: int) -> list[str]:
        raise ProviderError("mask backend down")


class ListPredictor:
    """Predictor returning a fixed token list for every template."""

    def __init__(self, tokens_by_template: dict[str, list[str]] | None = None,
                 default: list[str] | None = None):
        self.tokens_by_template = tokens_by_template or {}
        self.default = default or []

    def predict(self, template: str, tau: int) -> list[str]:
        return list(self.tokens_by_template.get(template, self.default))[:tau]


def full_sim_cache(pairs: dict[tuple[str, str], float]) -> CachedSimilarity:
    return CachedSimilarity({sim_key(a, b): v for (a, b), v in pairs.items()}, strict=True)

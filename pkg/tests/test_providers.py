import json

import httpx
import pytest

from negkb.errors import CacheMissError, MalformedProbeError, RemoteProviderError
from negkb.providers import (
    CachedMaskPredictor,
    CachedSimilarity,
    RemoteMaskPredictor,
    RemoteSimilarityProvider,
    build_probe,
    load_probe_cache,
    load_similarity_cache,
    probe_rank,
    write_probe_cache,
    write_similarity_cache,
)

from conftest import DictSim, ListPredictor


def test_cached_values_from_fixture(elephant_sim):
    assert elephant_sim.similarity("is big animal", "is largest land animal") == 0.78
    assert elephant_sim.similarity("can jump", "is largest land animal") == 0.05
    # symmetric by key construction
    assert elephant_sim.similarity("is largest land animal", "is big animal") == 0.78


def test_identity_short_circuit_without_lookup():
    empty = CachedSimilarity({}, strict=True)
    assert empty.similarity("has fur", "has fur") == 1.0
    assert empty.similarity("Has  Fur.", "has fur") == 1.0


def test_strict_miss_names_the_pair(elephant_sim):
    with pytest.raises(CacheMissError, match="can jump"):
        elephant_sim.similarity("can jump", "never recorded")


def test_fallback_resolves_and_appends(tmp_path):
    path = tmp_path / "cache.jsonl"
    write_similarity_cache(path, {("a", "b"): 0.5})
    cache = load_similarity_cache(path, strict=False, fallback=DictSim(default=0.25),
                                  append_misses=True)
    assert cache.similarity("x", "y") == 0.25
    # appended record makes the rerun deterministic without the fallback
    reread = load_similarity_cache(path, strict=True)
    assert reread.similarity("x", "y") == 0.25


def test_cache_round_trip_preserves_values(tmp_path):
    values = {("phrase one", "phrase two"): 0.123456789, ("b", "a"): -0.5}
    path = tmp_path / "cache.jsonl"
    write_similarity_cache(path, values, model="pinned-model")
    cache = load_similarity_cache(path)
    assert cache.model == "pinned-model"
    assert abs(cache.similarity("phrase one", "phrase two") - 0.123456789) <= 1e-6
    assert abs(cache.similarity("a", "b") - (-0.5)) <= 1e-6
    # file keys are in canonical order
    rows = [json.loads(line) for line in path.read_text().splitlines()[1:]]
    assert all(row["a"] <= row["b"] for row in rows)


def test_out_of_range_similarity_rejected(tmp_path):
    path = tmp_path / "cache.jsonl"
    path.write_text('{"a": "x", "b": "y", "sim": 1.5}\n')
    with pytest.raises(ValueError):
        load_similarity_cache(path)


def test_probe_rank_from_fixture(elephant_probes):
    assert probe_rank(elephant_probes, "[MASK] eat grass.", "elephant", 100) == 76
    assert probe_rank(elephant_probes, "[MASK] has hoof.", "elephant", 100) is None
    # boundary: the match sits outside a smaller window
    assert probe_rank(elephant_probes, "[MASK] eat grass.", "elephant", 75) is None
    assert probe_rank(elephant_probes, "[MASK] eat grass.", "elephant", 76) == 76


def test_probe_rank_tau_one():
    pred = ListPredictor(default=["elephants", "w2"])
    assert probe_rank(pred, "[MASK] x.", "elephant", 1) == 1
    with pytest.raises(ValueError):
        probe_rank(pred, "[MASK] x.", "elephant", 0)


def test_probe_rank_malformed_template(elephant_probes):
    with pytest.raises(MalformedProbeError):
        probe_rank(elephant_probes, "no mask here.", "elephant", 10)
    with pytest.raises(MalformedProbeError):
        probe_rank(elephant_probes, "[MASK] and [MASK].", "elephant", 10)


def test_build_probe():
    assert build_probe("Eat  Grass.") == "[MASK] eat grass."


def test_probe_cache_miss_and_fallback(tmp_path):
    cache = CachedMaskPredictor({}, strict=True)
    with pytest.raises(CacheMissError):
        cache.predict("[MASK] flies.", 5)
    path = tmp_path / "probes.jsonl"
    path.write_text("")
    filled = CachedMaskPredictor(
        {}, strict=False, fallback=ListPredictor(default=["a", "b", "c"]),
        append_to=path, fallback_depth=3,
    )
    assert filled.predict("[MASK] flies.", 2) == ["a", "b"]
    reread = load_probe_cache(path, strict=True)
    assert reread.predict("[MASK] flies.", 3) == ["a", "b", "c"]


def test_probe_cache_dedup_on_load(tmp_path):
    path = tmp_path / "probes.jsonl"
    write_probe_cache(path, {"[MASK] t.": ["x", "y", "x", "z"]}, model="m1")
    cache = load_probe_cache(path)
    assert cache.model == "m1"
    assert cache.predict("[MASK] t.", 10) == ["x", "y", "z"]


def _mock_client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler), timeout=5.0)


def test_remote_similarity_dot_product():
    def handler(request):
        texts = json.loads(request.content)["texts"]
        table = {"cold phrase": [1.0, 0.0], "warm phrase": [0.6, 0.8]}
        return httpx.Response(200, json={"vectors": [table[t] for t in texts]})

    provider = RemoteSimilarityProvider("http://sidecar")
    provider._client = _mock_client(handler)
    assert provider.similarity("cold phrase", "warm phrase") == pytest.approx(0.6)
    # memoized second call still answers (handler would KeyError on new text)
    assert provider.similarity("warm phrase", "cold phrase") == pytest.approx(0.6)


def test_remote_similarity_failure_wrapped():
    provider = RemoteSimilarityProvider("http://sidecar")
    provider._client = _mock_client(lambda request: httpx.Response(500, text="boom"))
    with pytest.raises(RemoteProviderError):
        provider.similarity("a", "b")


def test_remote_mask_predictor():
    def handler(request):
        body = json.loads(request.content)
        assert body["template"].count("[MASK]") == 1
        return httpx.Response(200, json={"tokens": ["t1", "t2", "t3"][: body["top_k"]]})

    predictor = RemoteMaskPredictor("http://sidecar")
    predictor._client = _mock_client(handler)
    assert predictor.predict("[MASK] runs.", 2) == ["t1", "t2"]

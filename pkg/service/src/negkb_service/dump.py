"""Offline cache dumps consumed by the batch pipeline.

Inputs are the pipeline's own file formats: the assertion file (TSV or
JSONL) and a per-target candidate dump (JSONL records carrying ``target``,
``phrase`` and ``siblings``). For every candidate the dump covers the pairs
the pipeline queries — candidate against the target's positives, against
each sibling's phrases, and candidate-vs-candidate within the target — plus
one probe template per candidate phrase.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .backends import EmbedBackend, MaskBackend, canonical, dedup_tokens

DEFAULT_TEMPLATE = "[MASK] {phrase}."
DEFAULT_DEPTH = 100


def read_assertions(path: str | Path) -> dict[str, set[str]]:
    """Parse the assertion file format (concept<TAB>phrase or JSONL)."""
    assertions: dict[str, set[str]] = {}
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            if line.lstrip().startswith("{"):
                record = json.loads(line)
                concept, phrase = str(record["concept"]), str(record["phrase"])
            else:
                cols = line.split("\t")
                if len(cols) != 2:
                    continue
                concept, phrase = cols
            concept, phrase = canonical(concept), canonical(phrase)
            if concept and phrase:
                assertions.setdefault(concept, set()).add(phrase)
    return assertions


def read_candidates(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            record = json.loads(line)
            if "target" in record and "phrase" in record:
                records.append(record)
    return records


def collect_pairs(
    assertions: dict[str, set[str]], candidates: list[dict]
) -> set[tuple[str, str]]:
    """Every unordered phrase pair a pipeline run over these candidates asks for."""
    pairs: set[tuple[str, str]] = set()

    def add(a: str, b: str) -> None:
        a, b = canonical(a), canonical(b)
        if a and b and a != b:
            pairs.add((a, b) if a <= b else (b, a))

    by_target: dict[str, list[str]] = {}
    for record in candidates:
        target = canonical(record["target"])
        phrase = canonical(record["phrase"])
        by_target.setdefault(target, []).append(phrase)
        for positive in assertions.get(target, ()):
            add(phrase, positive)
        for sibling in record.get("siblings", ()):
            for held in assertions.get(canonical(sibling), ()):
                add(phrase, held)
    for target, phrases in by_target.items():
        for i, a in enumerate(phrases):
            for b in phrases[i + 1:]:
                add(a, b)
    return pairs


def dump_similarity_cache(
    pairs: set[tuple[str, str]], embedder: EmbedBackend, out_path: str | Path,
    batch: int = 256,
) -> int:
    texts = sorted({t for pair in pairs for t in pair})
    vectors: dict[str, np.ndarray] = {}
    for start in range(0, len(texts), batch):
        chunk = texts[start : start + batch]
        for text, row in zip(chunk, embedder.embed(chunk)):
            vectors[text] = row
    with open(out_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"model": embedder.model_id, "kind": "similarity"}) + "\n")
        for a, b in sorted(pairs):
            sim = float(np.clip(np.dot(vectors[a], vectors[b]), -1.0, 1.0))
            handle.write(json.dumps({"a": a, "b": b, "sim": sim}) + "\n")
    return len(pairs)


def dump_probe_cache(
    phrases: set[str], masker: MaskBackend, out_path: str | Path,
    template: str = DEFAULT_TEMPLATE, depth: int = DEFAULT_DEPTH,
) -> int:
    templates = sorted(template.format(phrase=canonical(p)) for p in phrases)
    with open(out_path, "w", encoding="utf-8") as handle:
        handle.write(json.dumps({"model": masker.model_id, "kind": "probe"}) + "\n")
        for probe in templates:
            tokens = dedup_tokens(masker.predict_raw(probe, depth), depth)
            handle.write(json.dumps({"template": probe, "tokens": tokens}) + "\n")
    return len(templates)


def dump_caches(
    kb_path: str | Path,
    candidates_path: str | Path,
    sim_out: str | Path,
    probe_out: str | Path,
    embedder: EmbedBackend,
    masker: MaskBackend,
    template: str = DEFAULT_TEMPLATE,
    depth: int = DEFAULT_DEPTH,
) -> dict[str, int]:
    assertions = read_assertions(kb_path)
    candidates = read_candidates(candidates_path)
    pairs = collect_pairs(assertions, candidates)
    phrases = {canonical(r["phrase"]) for r in candidates}
    return {
        "pairs": dump_similarity_cache(pairs, embedder, sim_out),
        "templates": dump_probe_cache(phrases, masker, probe_out, template, depth),
    }

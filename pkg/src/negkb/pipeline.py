"""Batch orchestration: resource loading, per-target runs, manifest, eval.

Each target writes its own ``<slug>.jsonl`` under the output directory; an
``index.json`` maps slugs back to concepts and ``run_manifest.json`` records
the config hash, input digests and per-stage candidate counts. Outputs carry
no timestamps, so cache-only reruns are byte-identical.
"""

from __future__ import annotations

import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional, Sequence

from .errors import ConfigError, EvalInputError, IncompatibleRunError, NegkbError
from .evaluation import (
    DEFAULT_COLLECTION_DEPTH,
    eliminate,
    load_ground_truth,
    load_mcqa,
    recall_report,
    tally,
)
from .kb import load_kb
from .miner import MiningResult, NegationMiner, PipelineResources
from .providers import (
    CachedMaskPredictor,
    CachedSimilarity,
    RemoteMaskPredictor,
    RemoteSimilarityProvider,
    load_probe_cache,
    load_similarity_cache,
)
from .runconfig import ENDPOINT_ENV_VAR, RunConfig, config_hash, file_digest
from .taxonomy import load_taxonomy
from .text import normalize, slugify
from .vectors import load_embeddings

logger = logging.getLogger(__name__)

MANIFEST_NAME = "run_manifest.json"
INDEX_NAME = "index.json"


def _dump_json(path: Path, payload: Any) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, sort_keys=True, ensure_ascii=False, indent=2)
        handle.write("\n")


def _write_jsonl(path: Path, records: Sequence[dict]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def load_resources(config: RunConfig) -> PipelineResources:
    """Open every store and provider the enabled stages need."""
    if not config.kb_path:
        raise ConfigError("kb_path is required")
    concept_filter = None
    if config.concept_filter_path:
        with open(config.concept_filter_path, encoding="utf-8") as handle:
            concept_filter = {
                normalize(line) for line in handle if line.strip() and not line.startswith("#")
            }
    kb = load_kb(config.kb_path, concept_filter)

    taxonomy = None
    if config.use_siblings or config.use_ranking:
        if not config.taxonomy_path:
            raise ConfigError("taxonomy_path required by the enabled stages")
        taxonomy = load_taxonomy(config.taxonomy_path)

    vectors = None
    if config.use_siblings:
        if not config.embeddings_path:
            raise ConfigError("embeddings_path required for sibling selection")
        vectors = load_embeddings(config.embeddings_path)

    remote_sim = remote_mask = None
    if config.provider_mode == "cache+remote":
        endpoint = os.environ.get(ENDPOINT_ENV_VAR)
        if not endpoint:
            raise ConfigError(f"provider_mode=cache+remote needs ${ENDPOINT_ENV_VAR}")
        remote_sim = RemoteSimilarityProvider(endpoint)
        remote_mask = RemoteMaskPredictor(endpoint)

    similarity = None
    if config.use_kb_filter or config.use_ranking:
        if config.sim_cache_path:
            similarity = load_similarity_cache(
                config.sim_cache_path,
                strict=remote_sim is None,
                fallback=remote_sim,
                append_misses=remote_sim is not None,
            )
        elif remote_sim is not None:
            similarity = CachedSimilarity({}, strict=False, fallback=remote_sim)
        else:
            raise ConfigError("similarity stages enabled but no cache or remote provider")

    mask_predictor = None
    if config.use_lm_filter:
        if config.probe_cache_path:
            mask_predictor = load_probe_cache(
                config.probe_cache_path,
                strict=remote_mask is None,
                fallback=remote_mask,
                append_misses=remote_mask is not None,
            )
        elif remote_mask is not None:
            mask_predictor = CachedMaskPredictor(
                {}, strict=False, fallback=remote_mask, fallback_depth=max(100, config.tau)
            )
        else:
            raise ConfigError("LM filter enabled but no cache or remote provider")

    return PipelineResources(kb, taxonomy, vectors, similarity, mask_predictor)


def build_miner(config: RunConfig) -> NegationMiner:
    return NegationMiner(
        gamma=config.gamma,
        lambda_=config.lambda_,
        tau=config.tau,
        beta=config.beta,
        hypernym_k=config.hypernym_k,
        top_k=config.top_k,
        rank_mode=config.rank_mode,
        use_siblings=config.use_siblings,
        use_kb_filter=config.use_kb_filter,
        use_lm_filter=config.use_lm_filter,
        use_generic_filter=config.use_generic_filter,
        use_ranking=config.use_ranking,
        filter_order=tuple(config.filter_order),
        probe_template=config.probe_template,
        fail_closed=config.fail_closed,
        sibling_horizon=config.sibling_horizon,
        random_state=config.seed,
    )


@dataclass
class RunSummary:
    out_dir: Path
    manifest: dict[str, Any]

    @property
    def config_hash(self) -> str:
        return self.manifest["config_hash"]


def _assign_slugs(targets: Sequence[str]) -> list[tuple[str, str]]:
    used: dict[str, int] = {}
    assigned: list[tuple[str, str]] = []
    for concept in targets:
        base = slugify(concept)
        used[base] = used.get(base, 0) + 1
        slug = base if used[base] == 1 else f"{base}-{used[base]}"
        assigned.append((concept, slug))
    return assigned


def run_pipeline(config: RunConfig, targets: Sequence[str]) -> RunSummary:
    """Execute the enabled stages for every target and write the run tree."""
    config.validate()
    if not targets:
        raise ConfigError("no target concepts given")
    if not config.out_dir:
        raise ConfigError("out_dir is required")
    targets = [normalize(t) for t in targets]

    resources = load_resources(config)
    miner = build_miner(config).fit(resources)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    input_digests = {
        name: file_digest(path)
        for name, path in (
            ("kb", config.kb_path),
            ("taxonomy", config.taxonomy_path),
            ("embeddings", config.embeddings_path),
            ("sim_cache", config.sim_cache_path),
            ("probe_cache", config.probe_cache_path),
            ("concept_filter", config.concept_filter_path),
        )
        if path
    }
    run_hash = config_hash(config, input_digests)

    assigned = _assign_slugs(targets)

    def _mine(concept: str) -> MiningResult | NegkbError:
        try:
            return miner.mine(concept)
        except NegkbError as exc:
            if config.fail_closed:
                raise
            logger.warning("target %s failed: %s", concept, exc)
            return exc

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_mine, [c for c, _ in assigned]))
    else:
        results = [_mine(c) for c, _ in assigned]

    target_entries: list[dict[str, Any]] = []
    index: dict[str, str] = {}
    totals = {"targets": 0, "emitted": 0, "warnings": 0, "failed": 0}
    for (concept, slug), result in zip(assigned, results):
        index[slug] = concept
        if isinstance(result, NegkbError):
            target_entries.append({"concept": concept, "slug": slug, "error": str(result)})
            totals["failed"] += 1
            continue
        _write_jsonl(out_dir / f"{slug}.jsonl", result.records)
        if config.dump_candidates:
            _write_jsonl(
                out_dir / f"{slug}.candidates.jsonl",
                [c.to_record(result.siblings) for c in result.candidates],
            )
        target_entries.append(
            {
                "concept": concept,
                "slug": slug,
                "output_file": f"{slug}.jsonl",
                "sibling_source": result.siblings.source,
                "siblings": result.siblings.concepts,
                "stage_counts": result.stage_counts,
                "warnings": result.warnings,
            }
        )
        totals["targets"] += 1
        totals["emitted"] += len(result.records)
        totals["warnings"] += result.warnings

    manifest = {
        "config": {
            **config.semantic_dict(),
            "paths": {
                "kb": config.kb_path,
                "taxonomy": config.taxonomy_path,
                "embeddings": config.embeddings_path,
                "sim_cache": config.sim_cache_path,
                "probe_cache": config.probe_cache_path,
                "concept_filter": config.concept_filter_path,
            },
        },
        "config_hash": run_hash,
        "inputs": {
            name: {"path": path, "sha256": input_digests[name]}
            for name, path in (
                ("kb", config.kb_path),
                ("taxonomy", config.taxonomy_path),
                ("embeddings", config.embeddings_path),
                ("sim_cache", config.sim_cache_path),
                ("probe_cache", config.probe_cache_path),
                ("concept_filter", config.concept_filter_path),
            )
            if path
        },
        "seed": config.seed,
        "targets": target_entries,
        "totals": totals,
    }
    _dump_json(out_dir / MANIFEST_NAME, manifest)
    _dump_json(out_dir / INDEX_NAME, {"config_hash": run_hash, "targets": index})
    return RunSummary(out_dir, manifest)


def read_run_outputs(run_dir: str | Path) -> dict[str, list[str]]:
    """Concept -> ranked negation phrases, as written by :func:`run_pipeline`."""
    run_dir = Path(run_dir)
    index_path = run_dir / INDEX_NAME
    if not index_path.exists():
        raise IncompatibleRunError(f"{run_dir} has no {INDEX_NAME}; not a pipeline run")
    with open(index_path, encoding="utf-8") as handle:
        index = json.load(handle)
    outputs: dict[str, list[str]] = {}
    for slug, concept in index["targets"].items():
        output_path = run_dir / f"{slug}.jsonl"
        if not output_path.exists():
            raise IncompatibleRunError(f"{output_path} named in index but missing")
        phrases: list[str] = []
        with open(output_path, encoding="utf-8") as handle:
            for line in handle:
                if line.strip():
                    phrases.append(json.loads(line)["negation"])
        outputs[normalize(concept)] = phrases
    return outputs


def run_eval(
    run_dir: str | Path,
    truth_path: str | Path | None = None,
    mcqa_path: str | Path | None = None,
    sim: Optional[CachedSimilarity] = None,
    lam: float = 0.7,
    at_k: int = 10,
    depth: int | None = DEFAULT_COLLECTION_DEPTH,
    report_path: str | Path | None = None,
) -> dict[str, Any]:
    """Score a finished run against ground truth and/or MCQA items."""
    if truth_path is None and mcqa_path is None:
        raise EvalInputError("nothing to evaluate: give a truth file and/or an MCQA file")
    outputs = read_run_outputs(run_dir)
    manifest_path = Path(run_dir) / MANIFEST_NAME
    report: dict[str, Any] = {}
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as handle:
            report["config_hash"] = json.load(handle)["config_hash"]

    if truth_path is not None:
        truth = load_ground_truth(truth_path)
        if not truth:
            raise EvalInputError(f"{truth_path} holds no ground-truth rows")
        report["recall"] = recall_report(outputs, truth, sim, lam, at_k, depth)

    if mcqa_path is not None:
        items = load_mcqa(mcqa_path)
        if sim is None:
            raise EvalInputError("MCQA elimination needs a similarity provider")
        missing = sorted({i.concept for i in items} - set(outputs))
        if missing:
            raise IncompatibleRunError(f"run has no outputs for MCQA concepts: {missing}")
        all_verdicts = [eliminate(item, outputs[item.concept], sim, lam) for item in items]
        helpful, unhelpful = tally(all_verdicts, items)
        report["mcqa"] = {
            "items": len(items),
            "helpful": helpful,
            "unhelpful": unhelpful,
            "eliminations": helpful + unhelpful,
            "per_item": [
                {
                    "concept": item.concept,
                    "eliminated": [v.option for v in verdicts if v.eliminated],
                    "retained": [v.option for v in verdicts if not v.eliminated],
                }
                for item, verdicts in zip(items, all_verdicts)
            ],
        }

    if report_path is not None:
        _dump_json(Path(report_path), report)
    return report

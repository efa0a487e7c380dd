"""Command-line entry points: ``negkb run``, ``negkb eval``, ``negkb render``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import NegkbError
from .pipeline import run_eval, run_pipeline
from .providers import load_similarity_cache
from .runconfig import build_config, parse_config_file
from .scoring import render_verbose
from .text import normalize


def _add_run_parser(subparsers) -> None:
    p = subparsers.add_parser("run", help="execute the negation pipeline for target concepts")
    p.add_argument("--config", help="flat key = value config file; flags override it")
    p.add_argument("--kb", dest="kb_path", help="assertion file (TSV or JSONL)")
    p.add_argument("--taxonomy", dest="taxonomy_path", help="hypernymy TSV")
    p.add_argument("--embeddings", dest="embeddings_path", help="concept vectors (word2vec text)")
    p.add_argument("--sim-cache", dest="sim_cache_path", help="phrase-similarity cache JSONL")
    p.add_argument("--probe-cache", dest="probe_cache_path", help="mask-probe cache JSONL")
    p.add_argument("--concept-filter", dest="concept_filter_path",
                   help="allow-list of concepts to ingest, one per line")
    p.add_argument("--out", dest="out_dir", help="output directory for the run")
    p.add_argument("--targets", help="comma-separated target concepts")
    p.add_argument("--targets-file", help="file with one target concept per line")
    p.add_argument("--gamma", type=int)
    p.add_argument("--lambda", dest="lambda_", type=float)
    p.add_argument("--tau", type=int)
    p.add_argument("--beta", type=float)
    p.add_argument("--hypernym-k", dest="hypernym_k", type=int)
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--rank-mode", dest="rank_mode", choices=("strict", "relaxed"))
    for toggle in ("use-siblings", "use-kb-filter", "use-lm-filter",
                   "use-generic-filter", "use-ranking"):
        p.add_argument(f"--{toggle}", dest=toggle.replace("-", "_"),
                       action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--provider-mode", dest="provider_mode",
                   choices=("cache-only", "cache+remote"))
    p.add_argument("--strictness", choices=("fail-open", "fail-closed"))
    p.add_argument("--sibling-horizon", dest="sibling_horizon", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--dump-candidates", dest="dump_candidates",
                   action=argparse.BooleanOptionalAction, default=None)


def _add_eval_parser(subparsers) -> None:
    p = subparsers.add_parser("eval", help="score a finished run (recall and/or MCQA)")
    p.add_argument("--run-dir", required=True, help="directory written by `negkb run`")
    p.add_argument("--truth", help="ground-truth negations (TSV, 2 or 3 columns)")
    p.add_argument("--mcqa", help="MCQA items (JSONL)")
    p.add_argument("--sim-cache", help="similarity cache for relaxed matching")
    p.add_argument("--lambda", dest="lambda_", type=float, default=0.7)
    p.add_argument("--at-k", dest="at_k", type=int, default=10)
    p.add_argument("--depth", type=int, default=200,
                   help="collection depth per concept before recall (0 = unlimited)")
    p.add_argument("--report", help="where to write the JSON report")


def _add_render_parser(subparsers) -> None:
    p = subparsers.add_parser("render", help="print negations in the verbose provenance form")
    p.add_argument("--input", required=True, help="a per-target output JSONL file")


def _collect_targets(args) -> list[str]:
    targets: list[str] = []
    if args.targets:
        targets.extend(t for t in (normalize(x) for x in args.targets.split(",")) if t)
    if args.targets_file:
        with open(args.targets_file, encoding="utf-8") as handle:
            targets.extend(
                normalize(line) for line in handle if line.strip() and not line.startswith("#")
            )
    return targets


_RUN_FLAG_FIELDS = (
    "kb_path", "taxonomy_path", "embeddings_path", "sim_cache_path", "probe_cache_path",
    "concept_filter_path", "out_dir", "gamma", "lambda_", "tau", "beta", "hypernym_k",
    "top_k", "rank_mode", "use_siblings", "use_kb_filter", "use_lm_filter",
    "use_generic_filter", "use_ranking", "provider_mode", "strictness",
    "sibling_horizon", "seed", "workers", "dump_candidates",
)


def _cmd_run(args) -> int:
    file_overrides = parse_config_file(args.config) if args.config else {}
    flag_overrides = {name: getattr(args, name) for name in _RUN_FLAG_FIELDS}
    config = build_config(file_overrides, flag_overrides)
    targets = _collect_targets(args)
    summary = run_pipeline(config, targets)
    totals = summary.manifest["totals"]
    print(
        f"run {summary.config_hash[:12]}: {totals['targets']} targets, "
        f"{totals['emitted']} negations, {totals['warnings']} warnings, "
        f"{totals['failed']} failures -> {summary.out_dir}"
    )
    return 0


def _cmd_eval(args) -> int:
    sim = load_similarity_cache(args.sim_cache) if args.sim_cache else None
    report = run_eval(
        args.run_dir,
        truth_path=args.truth,
        mcqa_path=args.mcqa,
        sim=sim,
        lam=args.lambda_,
        at_k=args.at_k,
        depth=args.depth or None,
        report_path=args.report,
    )
    print(json.dumps(report, sort_keys=True, indent=2))
    return 0


def _cmd_render(args) -> int:
    with open(args.input, encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                print(render_verbose(json.loads(line)))
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="negkb",
        description="Materialize ranked negative statements from a commonsense KB",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    subparsers = parser.add_subparsers(dest="command", required=True)
    _add_run_parser(subparsers)
    _add_eval_parser(subparsers)
    _add_render_parser(subparsers)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "eval":
            return _cmd_eval(args)
        return _cmd_render(args)
    except NegkbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

"""negkb: ranked, provenance-annotated negative statements for CSKB concepts."""

from .candidates import (
    NegationCandidate,
    TraceEntry,
    filter_generic,
    filter_kb_similarity,
    filter_lm_probe,
    infer_candidates,
)
from .errors import NegkbError
from .evaluation import (
    GroundTruthNegation,
    McqaItem,
    OptionVerdict,
    eliminate,
    load_ground_truth,
    load_mcqa,
    recall,
    recall_report,
    tally,
)
from .kb import KbIndex, Statement, load_kb, phrase_frequency
from .miner import MiningResult, NegationMiner, PipelineResources
from .pipeline import run_eval, run_pipeline
from .providers import (
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
from .runconfig import RunConfig, build_config, parse_config_file
from .scoring import (
    Provenance,
    ProvenanceGroup,
    generate_provenance,
    merge_near_duplicates,
    output_record,
    rank,
    render_verbose,
    score_relaxed,
    score_strict,
)
from .siblings import SiblingSet, random_siblings, select_siblings
from .taxonomy import TaxonEdge, TaxonomyIndex, isa_related, load_taxonomy, shares_hypernym, top_hypernyms
from .text import normalize
from .vectors import VectorStore, load_embeddings, rank_by_similarity

__version__ = "0.1.0"

__all__ = [
    "CachedMaskPredictor",
    "CachedSimilarity",
    "GroundTruthNegation",
    "KbIndex",
    "McqaItem",
    "MiningResult",
    "NegationCandidate",
    "NegationMiner",
    "NegkbError",
    "OptionVerdict",
    "PipelineResources",
    "Provenance",
    "ProvenanceGroup",
    "RemoteMaskPredictor",
    "RemoteSimilarityProvider",
    "RunConfig",
    "SiblingSet",
    "Statement",
    "TaxonEdge",
    "TaxonomyIndex",
    "TraceEntry",
    "VectorStore",
    "build_config",
    "build_probe",
    "eliminate",
    "filter_generic",
    "filter_kb_similarity",
    "filter_lm_probe",
    "generate_provenance",
    "infer_candidates",
    "isa_related",
    "load_embeddings",
    "load_ground_truth",
    "load_kb",
    "load_mcqa",
    "load_probe_cache",
    "load_similarity_cache",
    "load_taxonomy",
    "merge_near_duplicates",
    "normalize",
    "output_record",
    "parse_config_file",
    "phrase_frequency",
    "probe_rank",
    "random_siblings",
    "rank",
    "rank_by_similarity",
    "recall",
    "recall_report",
    "render_verbose",
    "run_eval",
    "run_pipeline",
    "score_relaxed",
    "score_strict",
    "select_siblings",
    "shares_hypernym",
    "tally",
    "top_hypernyms",
    "write_probe_cache",
    "write_similarity_cache",
]

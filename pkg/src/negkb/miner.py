"""The end-to-end miner as a scikit-learn style estimator.

``fit`` takes the loaded resources (assertion index, taxonomy, vectors,
providers), ``predict`` maps an iterable of target concepts to their ranked
negation records, and ``mine`` exposes the full per-target audit (sibling
set, every candidate with its trace, per-stage counts) that the batch runner
turns into manifests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Iterable, Optional

from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .candidates import (
    FILTER_NAMES,
    GENERIC,
    KB_SIMILARITY,
    LM_PROBE,
    NegationCandidate,
    filter_generic,
    filter_kb_similarity,
    filter_lm_probe,
    infer_candidates,
)
from .kb import KbIndex
from .providers import DEFAULT_PROBE_TEMPLATE, MaskPredictor, PhraseSimilarityProvider
from .scoring import (
    generate_provenance,
    merge_near_duplicates,
    output_record,
    rank,
    score_candidates,
)
from .siblings import SiblingSet, random_siblings, select_siblings
from .taxonomy import TaxonomyIndex
from .text import normalize
from .validation import (
    check_filter_order,
    check_positive_int,
    check_rank_mode,
    check_unit_interval,
)
from .vectors import VectorStore


@dataclass
class PipelineResources:
    """Everything a fitted miner reads; all immutable after load."""

    kb: KbIndex
    taxonomy: Optional[TaxonomyIndex] = None
    vectors: Optional[VectorStore] = None
    similarity: Optional[PhraseSimilarityProvider] = None
    mask_predictor: Optional[MaskPredictor] = None


@dataclass
class MiningResult:
    """Full audit of one target's run."""

    concept: str
    siblings: SiblingSet
    candidates: list[NegationCandidate]
    stage_counts: dict[str, int]
    emitted: list[NegationCandidate]
    records: list[dict[str, Any]]
    warnings: int = 0

    @property
    def survivors(self) -> list[NegationCandidate]:
        return [c for c in self.candidates if not c.dropped]


class NegationMiner(BaseEstimator):
    """Generates ranked, provenance-annotated negative statements per concept.

    Parameters follow the pipeline's knobs: ``gamma`` comparable concepts,
    ``lambda_`` similarity threshold, ``tau`` probe rank cutoff, ``beta``
    genericity threshold, plus stage toggles for the ablation configurations.
    """

    def __init__(
        self,
        gamma: int = 30,
        lambda_: float = 0.7,
        tau: int = 50,
        beta: float = 0.05,
        hypernym_k: int = 5,
        top_k: int = 1000,
        rank_mode: str = "strict",
        use_siblings: bool = True,
        use_kb_filter: bool = True,
        use_lm_filter: bool = True,
        use_generic_filter: bool = True,
        use_ranking: bool = True,
        filter_order: tuple[str, ...] = FILTER_NAMES,
        probe_template: str = DEFAULT_PROBE_TEMPLATE,
        fail_closed: bool = False,
        sibling_horizon: int | None = None,
        random_state: int = 0,
    ):
        self.gamma = gamma
        self.lambda_ = lambda_
        self.tau = tau
        self.beta = beta
        self.hypernym_k = hypernym_k
        self.top_k = top_k
        self.rank_mode = rank_mode
        self.use_siblings = use_siblings
        self.use_kb_filter = use_kb_filter
        self.use_lm_filter = use_lm_filter
        self.use_generic_filter = use_generic_filter
        self.use_ranking = use_ranking
        self.filter_order = filter_order
        self.probe_template = probe_template
        self.fail_closed = fail_closed
        self.sibling_horizon = sibling_horizon
        self.random_state = random_state

    def fit(self, resources: PipelineResources, y=None) -> "NegationMiner":
        """Validate parameters, check resource wiring, store the resources."""
        check_positive_int("gamma", self.gamma)
        check_unit_interval("lambda_", self.lambda_)
        check_positive_int("tau", self.tau)
        check_unit_interval("beta", self.beta)
        check_positive_int("hypernym_k", self.hypernym_k)
        check_positive_int("top_k", self.top_k)
        check_rank_mode(self.rank_mode)
        check_filter_order(self.filter_order)
        if self.sibling_horizon is not None:
            check_positive_int("sibling_horizon", self.sibling_horizon)
        if "{phrase}" not in self.probe_template:
            raise ValueError("probe_template must contain a {phrase} placeholder")

        if resources.kb is None:
            raise ValueError("resources.kb is required")
        if self.use_siblings and (resources.taxonomy is None or resources.vectors is None):
            raise ValueError("sibling selection needs taxonomy and vectors")
        if (self.use_kb_filter or self.use_ranking) and resources.similarity is None:
            raise ValueError("similarity provider required by the enabled stages")
        if self.use_lm_filter and resources.mask_predictor is None:
            raise ValueError("mask predictor required by the LM filter")
        if self.use_ranking and resources.taxonomy is None:
            raise ValueError("provenance generation needs the taxonomy")

        self.kb_ = resources.kb
        self.taxonomy_ = resources.taxonomy
        self.vectors_ = resources.vectors
        self.similarity_ = resources.similarity
        self.mask_predictor_ = resources.mask_predictor
        return self

    def _select(self, concept: str) -> SiblingSet:
        if self.use_siblings:
            return select_siblings(
                self.kb_,
                self.taxonomy_,
                self.vectors_,
                concept,
                gamma=self.gamma,
                k=self.hypernym_k,
                horizon=self.sibling_horizon,
            )
        seed = self.random_state if self.random_state is not None else 0
        return random_siblings(self.kb_, concept, self.gamma, seed)

    def _apply_filters(
        self, cands: list[NegationCandidate], stage_counts: dict[str, int]
    ) -> list[NegationCandidate]:
        survivors = cands
        enabled = {
            KB_SIMILARITY: self.use_kb_filter,
            LM_PROBE: self.use_lm_filter,
            GENERIC: self.use_generic_filter,
        }
        for name in self.filter_order:
            if not enabled[name]:
                continue
            if name == KB_SIMILARITY:
                survivors = filter_kb_similarity(
                    survivors, self.kb_, self.similarity_, self.lambda_, self.fail_closed
                )
            elif name == LM_PROBE:
                survivors = filter_lm_probe(
                    survivors, self.mask_predictor_, self.tau, self.probe_template, self.fail_closed
                )
            else:
                survivors = filter_generic(survivors, self.kb_, self.beta)
            stage_counts[f"after_{name}"] = len(survivors)
        return survivors

    def mine(self, concept: str) -> MiningResult:
        """Run all enabled stages for one target and return the full audit."""
        check_is_fitted(self, "kb_")
        concept = normalize(concept)
        siblings = self._select(concept)
        cands = infer_candidates(self.kb_, siblings)
        stage_counts: dict[str, int] = {"inferred": len(cands)}
        survivors = self._apply_filters(cands, stage_counts)

        if self.use_ranking:
            score_candidates(
                survivors, siblings, self.kb_, self.similarity_, self.lambda_, self.fail_closed
            )
            merged = merge_near_duplicates(
                survivors, self.similarity_, self.lambda_, self.fail_closed
            )
            stage_counts["after_merge"] = len(merged)
            emitted = rank(merged, self.rank_mode, self.top_k)
            for cand in emitted:
                holders = sorted(cand.relaxed_holders or ())
                if holders:
                    cand.provenance = generate_provenance(
                        concept, holders, self.taxonomy_, siblings
                    )
        else:
            emitted = sorted(survivors, key=lambda c: c.phrase)[: self.top_k]
        stage_counts["emitted"] = len(emitted)

        shortfall = siblings.gamma - len(siblings) if siblings.underpopulated else None
        records = [output_record(c, sibling_shortfall=shortfall) for c in emitted]
        warnings = sum(1 for c in cands for e in c.trace if e.verdict == "warn")
        return MiningResult(concept, siblings, cands, stage_counts, emitted, records, warnings)

    def predict(self, X: Iterable[str]) -> list[list[dict[str, Any]]]:
        """Ranked negation records for each concept in ``X``."""
        return [self.mine(concept).records for concept in X]

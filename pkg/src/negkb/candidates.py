"""Candidate negations and the three scrutiny filters.

Candidates are the phrases siblings assert but the target does not (exact
set difference). Each filter appends one trace entry per candidate it sees,
so the audit trail reconciles exactly: every inferred candidate either
survives or carries a single drop verdict.

Provider failures follow the run's strictness: fail-open keeps the candidate
undecided with a warning trace, fail-closed re-raises.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Optional

from .errors import MalformedProbeError, ProviderError
from .kb import KbIndex
from .providers import (
    DEFAULT_PROBE_TEMPLATE,
    MaskPredictor,
    PhraseSimilarityProvider,
    build_probe,
    probe_rank,
)
from .siblings import SiblingSet

KB_SIMILARITY = "kb_similarity"
LM_PROBE = "lm_probe"
GENERIC = "generic"
FILTER_NAMES = (KB_SIMILARITY, LM_PROBE, GENERIC)


@dataclass(frozen=True)
class TraceEntry:
    filter: str
    verdict: str  # "keep" | "drop" | "warn"
    evidence: dict[str, Any]


@dataclass
class NegationCandidate:
    """One candidate negative phrase for a target, with its audit trail."""

    target: str
    phrase: str
    holders: frozenset[str]
    trace: list[TraceEntry] = field(default_factory=list)
    strict_score: Optional[Fraction] = None
    relaxed_score: Optional[Fraction] = None
    relaxed_holders: Optional[frozenset[str]] = None
    absorbed: list[str] = field(default_factory=list)
    provenance: Optional["Provenance"] = None  # set by the ranker

    @property
    def dropped(self) -> bool:
        return any(entry.verdict == "drop" for entry in self.trace)

    @property
    def drop_entry(self) -> TraceEntry | None:
        for entry in self.trace:
            if entry.verdict == "drop":
                return entry
        return None

    def to_record(self, siblings: SiblingSet | None = None) -> dict[str, Any]:
        """JSON-ready audit record (the intermediate candidate dump row)."""
        record: dict[str, Any] = {
            "target": self.target,
            "phrase": self.phrase,
            "holders": sorted(self.holders),
            "dropped": self.dropped,
            "trace": [
                {"filter": e.filter, "verdict": e.verdict, "evidence": e.evidence}
                for e in self.trace
            ],
            "strict": None if self.strict_score is None else float(self.strict_score),
            "relaxed": None if self.relaxed_score is None else float(self.relaxed_score),
        }
        if siblings is not None:
            record["siblings"] = siblings.concepts
        return record


def infer_candidates(kb: KbIndex, sibs: SiblingSet) -> list[NegationCandidate]:
    """Seed candidates: every sibling phrase absent from the target's set.

    Output is phrase-sorted; holders are the siblings asserting the exact
    phrase.
    """
    positives = kb.phrases_of(sibs.target)
    pool: dict[str, set[str]] = {}
    for sibling in sibs.concepts:
        for phrase in kb.phrases_of(sibling):
            if phrase not in positives:
                pool.setdefault(phrase, set()).add(sibling)
    return [
        NegationCandidate(sibs.target, phrase, frozenset(holders))
        for phrase, holders in sorted(pool.items())
    ]


def filter_kb_similarity(
    cands: list[NegationCandidate],
    kb: KbIndex,
    sim: PhraseSimilarityProvider,
    lam: float,
    fail_closed: bool = False,
) -> list[NegationCandidate]:
    """Drop candidates λ-similar to something already known about the target.

    The trace records the maximizing positive phrase and its similarity.
    """
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must be in [0,1]")
    kept: list[NegationCandidate] = []
    for cand in cands:
        positives = sorted(kb.phrases_of(cand.target))
        best: tuple[float, str] | None = None
        failures = 0
        for positive in positives:
            try:
                value = sim.similarity(cand.phrase, positive)
            except ProviderError:
                if fail_closed:
                    raise
                failures += 1
                continue
            if best is None or value > best[0]:
                best = (value, positive)
        if best is not None and best[0] >= lam:
            cand.trace.append(
                TraceEntry(KB_SIMILARITY, "drop", {"similar_to": best[1], "sim": best[0]})
            )
            continue
        evidence: dict[str, Any] = {}
        if best is not None:
            evidence = {"max_sim": best[0], "closest": best[1]}
        if failures:
            evidence["provider_failures"] = failures
            cand.trace.append(TraceEntry(KB_SIMILARITY, "warn", evidence))
        else:
            cand.trace.append(TraceEntry(KB_SIMILARITY, "keep", evidence))
        kept.append(cand)
    return kept


def filter_lm_probe(
    cands: list[NegationCandidate],
    pred: MaskPredictor,
    tau: int,
    template: str = DEFAULT_PROBE_TEMPLATE,
    fail_closed: bool = False,
) -> list[NegationCandidate]:
    """Drop candidates whose masked probe ranks the target within top-τ."""
    if tau < 1:
        raise ValueError("tau must be >= 1")
    kept: list[NegationCandidate] = []
    for cand in cands:
        probe = build_probe(cand.phrase, template)
        try:
            rank = probe_rank(pred, probe, cand.target, tau)
        except (ProviderError, MalformedProbeError) as exc:
            if fail_closed:
                raise
            cand.trace.append(
                TraceEntry(LM_PROBE, "warn", {"probe": probe, "error": str(exc)})
            )
            kept.append(cand)
            continue
        if rank is not None:
            cand.trace.append(TraceEntry(LM_PROBE, "drop", {"probe": probe, "rank": rank}))
            continue
        cand.trace.append(TraceEntry(LM_PROBE, "keep", {"probe": probe, "rank": None}))
        kept.append(cand)
    return kept


def filter_generic(
    cands: list[NegationCandidate], kb: KbIndex, beta: float
) -> list[NegationCandidate]:
    """Drop phrases asserted for at least a β-fraction of all KB concepts."""
    if not 0.0 <= beta <= 1.0:
        raise ValueError("beta must be in [0,1]")
    from .kb import phrase_frequency

    kept: list[NegationCandidate] = []
    for cand in cands:
        freq = phrase_frequency(kb, cand.phrase)
        if freq >= beta:
            cand.trace.append(TraceEntry(GENERIC, "drop", {"frequency": freq}))
            continue
        cand.trace.append(TraceEntry(GENERIC, "keep", {"frequency": freq}))
        kept.append(cand)
    return kept

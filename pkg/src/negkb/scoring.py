"""Informativeness scoring, duplicate merging, provenance and ranking.

Scores are exact rationals: the number of siblings asserting the candidate
(exactly, or up to λ-similarity for the relaxed variant) over the configured
sibling budget γ. Keeping the nominal γ as denominator even for targets with
fewer valid siblings preserves cross-concept comparability; such candidates
are flagged at emission instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .candidates import NegationCandidate, TraceEntry
from .errors import ProviderError, UndefinedScoreError
from .kb import KbIndex
from .providers import PhraseSimilarityProvider
from .siblings import SiblingSet
from .taxonomy import TaxonomyIndex


@dataclass(frozen=True)
class ProvenanceGroup:
    hypernym: str
    members: tuple[str, ...]
    score: Fraction


@dataclass(frozen=True)
class Provenance:
    """Holder siblings grouped under shared hypernyms of the target.

    Groups partition the covered holders (scores non-increasing); holders no
    target hypernym reaches stay in ``uncovered``.
    """

    groups: tuple[ProvenanceGroup, ...]
    uncovered: tuple[str, ...]


def score_strict(cand: NegationCandidate, sibs: SiblingSet, kb: KbIndex) -> Fraction:
    """Exact-phrase sibling frequency: |{x : (x, f) in KB}| / γ."""
    if sibs.gamma < 1:
        raise UndefinedScoreError("sibling budget gamma must be >= 1")
    count = sum(1 for x in sibs.concepts if cand.phrase in kb.phrases_of(x))
    return Fraction(count, sibs.gamma)


def relaxed_holders(
    cand: NegationCandidate,
    sibs: SiblingSet,
    kb: KbIndex,
    sim: PhraseSimilarityProvider,
    lam: float,
    fail_closed: bool = False,
) -> frozenset[str]:
    """Siblings asserting the candidate exactly or via a λ-similar rephrase.

    In fail-open mode a provider failure degrades the affected sibling to
    exact-match-only and notes a warning on the candidate's trace.
    """
    holders: set[str] = set()
    for sibling in sibs.concepts:
        phrases = kb.phrases_of(sibling)
        if cand.phrase in phrases:
            holders.add(sibling)
            continue
        matched = False
        degraded = False
        for phrase in sorted(phrases):
            try:
                if sim.similarity(cand.phrase, phrase) >= lam:
                    matched = True
            except ProviderError:
                if fail_closed:
                    raise
                degraded = True
        if degraded:
            cand.trace.append(
                TraceEntry(
                    "relaxed_scoring",
                    "warn",
                    {"sibling": sibling, "degraded_to": "exact-match-only"},
                )
            )
            continue
        if matched:
            holders.add(sibling)
    return frozenset(holders)


def score_relaxed(
    cand: NegationCandidate,
    sibs: SiblingSet,
    kb: KbIndex,
    sim: PhraseSimilarityProvider,
    lam: float,
    fail_closed: bool = False,
) -> Fraction:
    """λ-relaxed sibling frequency (always >= the strict score)."""
    if sibs.gamma < 1:
        raise UndefinedScoreError("sibling budget gamma must be >= 1")
    return Fraction(len(relaxed_holders(cand, sibs, kb, sim, lam, fail_closed)), sibs.gamma)


def score_candidates(
    cands: list[NegationCandidate],
    sibs: SiblingSet,
    kb: KbIndex,
    sim: PhraseSimilarityProvider,
    lam: float,
    fail_closed: bool = False,
) -> list[NegationCandidate]:
    """Populate strict/relaxed scores and the relaxed holder sets in place."""
    for cand in cands:
        cand.strict_score = score_strict(cand, sibs, kb)
        cand.relaxed_holders = relaxed_holders(cand, sibs, kb, sim, lam, fail_closed)
        cand.relaxed_score = Fraction(len(cand.relaxed_holders), sibs.gamma)
    return cands


def merge_near_duplicates(
    cands: list[NegationCandidate],
    sim: PhraseSimilarityProvider,
    lam: float,
    fail_closed: bool = False,
) -> list[NegationCandidate]:
    """Collapse λ-similar candidates (transitive closure) to one per cluster.

    The representative has the highest relaxed score, then the highest strict
    score, then the lexicographically smallest phrase; the others' phrases are
    recorded as absorbed on it. Provider failures in fail-open mode leave the
    affected pair unlinked and note a warning.
    """
    for cand in cands:
        if cand.strict_score is None or cand.relaxed_score is None:
            raise ValueError(f"candidate {cand.phrase!r} must be scored before merging")
    n = len(cands)
    parent = list(range(n))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            try:
                linked = sim.similarity(cands[i].phrase, cands[j].phrase) >= lam
            except ProviderError:
                if fail_closed:
                    raise
                cands[i].trace.append(
                    TraceEntry("merge", "warn", {"pair_unresolved": cands[j].phrase})
                )
                continue
            if linked:
                parent[find(i)] = find(j)

    clusters: dict[int, list[NegationCandidate]] = {}
    for i, cand in enumerate(cands):
        clusters.setdefault(find(i), []).append(cand)

    survivors: set[int] = set()
    for members in clusters.values():
        rep = min(members, key=lambda c: (-c.relaxed_score, -c.strict_score, c.phrase))
        rep.absorbed = sorted(c.phrase for c in members if c is not rep)
        survivors.add(id(rep))
    return [c for c in cands if id(c) in survivors]


def generate_provenance(
    target: str,
    holders: list[str],
    tax: TaxonomyIndex,
    sibs: SiblingSet | None = None,
) -> Provenance:
    """Greedily group holders under the target's hypernyms.

    Each round picks the hypernym covering the most remaining holders (ties:
    higher confidence for the target, then lexicographic), scores the group
    as covered/n over the full holder count, and retires the covered
    siblings. Group members keep sibling order.
    """
    if not holders:
        raise ValueError("provenance needs at least one holder")
    n = len(holders)
    order = {c: i for i, c in enumerate(sibs.concepts)} if sibs is not None else {}

    def by_rank(concept: str) -> tuple[int, str]:
        return (order.get(concept, len(order)), concept)

    pool = tax.hypernyms_of(target)
    remaining = set(holders)
    groups: list[ProvenanceGroup] = []
    while remaining and pool:
        scored: list[tuple[int, float, str, list[str]]] = []
        for hypernym, confidence in pool:
            cover = sorted(
                (x for x in remaining if (x, hypernym) in tax.membership), key=by_rank
            )
            scored.append((len(cover), confidence, hypernym, cover))
        size, _, hypernym, cover = min(scored, key=lambda t: (-t[0], -t[1], t[2]))
        if size == 0:
            break
        groups.append(ProvenanceGroup(hypernym, tuple(cover), Fraction(size, n)))
        remaining -= set(cover)
    return Provenance(tuple(groups), tuple(sorted(remaining, key=by_rank)))


def rank(
    cands: list[NegationCandidate], mode: str, top_k: int
) -> list[NegationCandidate]:
    """Order by the selected score (ties: other score, then phrase), truncate."""
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"rank mode must be strict or relaxed, got {mode!r}")
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    for cand in cands:
        if cand.strict_score is None or cand.relaxed_score is None:
            raise ValueError(f"candidate {cand.phrase!r} must be scored before ranking")

    def key(cand: NegationCandidate):
        primary = cand.strict_score if mode == "strict" else cand.relaxed_score
        secondary = cand.relaxed_score if mode == "strict" else cand.strict_score
        return (-primary, -secondary, cand.phrase)

    return sorted(cands, key=key)[:top_k]


def output_record(cand: NegationCandidate, sibling_shortfall: int | None = None) -> dict[str, Any]:
    """The emitted JSONL row for one ranked negation."""
    record: dict[str, Any] = {
        "concept": cand.target,
        "negation": cand.phrase,
        "strict": None if cand.strict_score is None else float(cand.strict_score),
        "relaxed": None if cand.relaxed_score is None else float(cand.relaxed_score),
        "absorbed": list(cand.absorbed),
        "provenance": [
            {"hypernym": g.hypernym, "members": list(g.members), "score": float(g.score)}
            for g in (cand.provenance.groups if cand.provenance else ())
        ],
        "uncovered": list(cand.provenance.uncovered) if cand.provenance else [],
    }
    if sibling_shortfall is not None:
        record["sibling_shortfall"] = sibling_shortfall
    return record


def render_verbose(record: dict[str, Any]) -> str:
    """Human-readable form: ``¬(s, f) unlike other <h>, e.g., <members> ...``"""
    head = f"¬({record['concept']}, {record['negation']})"
    parts = [
        f"unlike other {g['hypernym']}, e.g., {', '.join(g['members'])}"
        for g in record.get("provenance", [])
    ]
    if not parts:
        return head
    return head + " " + ", and ".join(parts)

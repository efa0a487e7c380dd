"""Comparable-concept selection: cosine neighbors gated by taxonomy checks."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .kb import KbIndex
from .taxonomy import TaxonomyIndex, isa_related, shares_hypernym
from .text import normalize
from .vectors import VectorStore, rank_by_similarity


@dataclass(frozen=True)
class SiblingSet:
    """Ordered comparable concepts for one target.

    ``siblings`` pairs each kept concept with its cosine score (None when the
    set was drawn at random for the ablation). ``gamma`` is the configured
    budget; fewer entries means the ranking was exhausted first.
    """

    target: str
    siblings: tuple[tuple[str, float | None], ...]
    gamma: int
    source: str = "ranked"

    @property
    def concepts(self) -> list[str]:
        return [c for c, _ in self.siblings]

    def __len__(self) -> int:
        return len(self.siblings)

    @property
    def underpopulated(self) -> bool:
        return len(self.siblings) < self.gamma


@dataclass
class SiblingAudit:
    """Why each scanned neighbor was kept or skipped (walk order)."""

    scanned: list[tuple[str, str]] = field(default_factory=list)  # (concept, outcome)


def select_siblings(
    kb: KbIndex,
    tax: TaxonomyIndex,
    emb: VectorStore,
    target: str,
    gamma: int,
    k: int = 5,
    horizon: int | None = None,
    audit: SiblingAudit | None = None,
) -> SiblingSet:
    """Walk the cosine ranking, keeping taxonomically valid KB concepts.

    A neighbor is kept when it (a) has assertions in the KB, (b) shares a
    top-k hypernym with the target and (c) has no IsA link to the target.
    The walk stops after ``gamma`` keeps, after ``horizon`` scans (when set),
    or when the ranking is exhausted.
    """
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    if k < 1:
        raise ValueError("k must be >= 1")
    target = normalize(target)
    kept: list[tuple[str, float | None]] = []
    for scanned, (concept, score) in enumerate(rank_by_similarity(emb, target), start=1):
        if horizon is not None and scanned > horizon:
            break
        if not kb.phrases_of(concept):
            outcome = "skip:no-kb-assertions"
        elif not shares_hypernym(tax, target, concept, k):
            outcome = "skip:no-shared-hypernym"
        elif isa_related(tax, target, concept):
            outcome = "skip:isa-related"
        else:
            outcome = "keep"
            kept.append((concept, score))
        if audit is not None:
            audit.scanned.append((concept, outcome))
        if len(kept) >= gamma:
            break
    return SiblingSet(target, tuple(kept), gamma)


def random_siblings(kb: KbIndex, target: str, gamma: int, seed: int) -> SiblingSet:
    """Seeded uniform draw from the KB's concepts (the "w/o comparable
    concepts" ablation); the target itself is never drawn."""
    if gamma < 1:
        raise ValueError("gamma must be >= 1")
    target = normalize(target)
    pool = sorted(c for c in kb.concepts if c != target)
    rng = random.Random(seed)
    drawn = pool if len(pool) <= gamma else rng.sample(pool, gamma)
    return SiblingSet(target, tuple((c, None) for c in drawn), gamma, source="random")

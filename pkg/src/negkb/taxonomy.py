"""Hypernymy store: top-k hypernym queries and the two taxonomic checks.

The taxonomy file is UTF-8 TSV ``hyponym<TAB>hypernym<TAB>confidence``. The
data is used raw (no cleaning or transitive closure); duplicate edges keep
their highest confidence so each per-concept list is strictly ordered by
(confidence desc, hypernym asc) and therefore byte-stable across runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .errors import IngestionError
from .kb import BAD_ROW_TOLERANCE, IngestStats, Source, _iter_lines
from .text import normalize


@dataclass(frozen=True)
class TaxonEdge:
    """One (hyponym, isA, hypernym) record with extraction confidence."""

    hyponym: str
    hypernym: str
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "hyponym", normalize(self.hyponym))
        object.__setattr__(self, "hypernym", normalize(self.hypernym))
        if not self.hyponym or not self.hypernym:
            raise ValueError("edge endpoints must be non-empty")
        if self.hyponym == self.hypernym:
            raise ValueError(f"self-loop edge on {self.hyponym!r}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence {self.confidence} outside [0,1]")


class TaxonomyIndex:
    """Immutable hypernymy index."""

    def __init__(self, edges: Iterable[TaxonEdge], stats: IngestStats | None = None):
        best: dict[str, dict[str, float]] = {}
        for edge in edges:
            per = best.setdefault(edge.hyponym, {})
            if edge.confidence > per.get(edge.hypernym, -1.0):
                per[edge.hypernym] = edge.confidence
        self._hypernyms_of: dict[str, list[tuple[str, float]]] = {
            concept: sorted(per.items(), key=lambda hc: (-hc[1], hc[0]))
            for concept, per in best.items()
        }
        self._membership: frozenset[tuple[str, str]] = frozenset(
            (concept, hypernym) for concept, per in best.items() for hypernym in per
        )
        self.stats = stats or IngestStats()

    @property
    def membership(self) -> frozenset[tuple[str, str]]:
        return self._membership

    def hypernyms_of(self, concept: str) -> list[tuple[str, float]]:
        """Full confidence-descending hypernym list; empty if unknown."""
        return list(self._hypernyms_of.get(normalize(concept), []))

    def __contains__(self, concept: str) -> bool:
        return normalize(concept) in self._hypernyms_of


def load_taxonomy(source: Source) -> TaxonomyIndex:
    """Read a taxonomy TSV, applying the shared bad-row tolerance."""
    stats = IngestStats()
    edges: list[TaxonEdge] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        stats.rows_read += 1
        cols = line.split("\t")
        try:
            if len(cols) != 3:
                raise ValueError(f"expected 3 tab-separated columns, got {len(cols)}")
            edges.append(TaxonEdge(cols[0], cols[1], float(cols[2])))
            stats.rows_kept += 1
        except ValueError as exc:
            stats.row_errors.append(f"line {lineno}: {exc}")
    if stats.rows_read and len(stats.row_errors) / stats.rows_read > BAD_ROW_TOLERANCE:
        raise IngestionError(
            f"{len(stats.row_errors)} of {stats.rows_read} rows malformed "
            f"(>{BAD_ROW_TOLERANCE:.0%} tolerance)",
            stats.row_errors,
        )
    return TaxonomyIndex(edges, stats)


def top_hypernyms(index: TaxonomyIndex, concept: str, k: int) -> list[tuple[str, float]]:
    """The k most confident hypernyms of a concept (empty if unknown)."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return index.hypernyms_of(concept)[:k]


def shares_hypernym(index: TaxonomyIndex, a: str, b: str, k: int) -> bool:
    """True iff the top-k hypernym lists of a and b intersect."""
    top_a = {h for h, _ in top_hypernyms(index, a, k)}
    if not top_a:
        return False
    return any(h in top_a for h, _ in top_hypernyms(index, b, k))


def isa_related(index: TaxonomyIndex, a: str, b: str) -> bool:
    """True iff an IsA edge links a and b in either direction."""
    na, nb = normalize(a), normalize(b)
    return (na, nb) in index.membership or (nb, na) in index.membership

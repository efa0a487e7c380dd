"""Positive-assertion store: per-concept phrase sets and phrase frequency.

The assertion file is UTF-8 TSV (``concept<TAB>phrase``) or JSONL with keys
``concept``/``phrase``; lines starting with ``#`` are ignored. Duplicate rows
merge silently (the merge count lands in the ingestion stats) and an input
with more than 10% malformed rows is rejected outright.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Iterator, Union

from .errors import EmptyKbError, IngestionError
from .text import normalize

Source = Union[str, Path, IO[str], Iterable[str]]

# Reject a source once more than this fraction of its data rows is malformed.
BAD_ROW_TOLERANCE = 0.10


@dataclass(frozen=True)
class Statement:
    """One positive (concept, phrase) assertion, already normalized."""

    concept: str
    phrase: str

    def __post_init__(self):
        object.__setattr__(self, "concept", normalize(self.concept))
        object.__setattr__(self, "phrase", normalize(self.phrase))
        if not self.concept or not self.phrase:
            raise ValueError("statement concept and phrase must be non-empty")


@dataclass
class IngestStats:
    rows_read: int = 0
    rows_kept: int = 0
    duplicates_merged: int = 0
    filtered_out: int = 0
    row_errors: list[str] = field(default_factory=list)


class KbIndex:
    """Immutable two-way index over positive assertions."""

    def __init__(self, statements: Iterable[Statement], stats: IngestStats | None = None):
        phrases_of: dict[str, set[str]] = {}
        concepts_of: dict[str, set[str]] = {}
        for st in statements:
            phrases_of.setdefault(st.concept, set()).add(st.phrase)
            concepts_of.setdefault(st.phrase, set()).add(st.concept)
        self._phrases_of = {c: frozenset(ps) for c, ps in phrases_of.items()}
        self._concepts_of = {p: frozenset(cs) for p, cs in concepts_of.items()}
        self.stats = stats or IngestStats()

    @property
    def concept_count(self) -> int:
        return len(self._phrases_of)

    @property
    def concepts(self) -> frozenset[str]:
        return frozenset(self._phrases_of)

    def phrases_of(self, concept: str) -> frozenset[str]:
        """Phrase set asserted for a concept; empty for unknown concepts."""
        return self._phrases_of.get(normalize(concept), frozenset())

    def concepts_of(self, phrase: str) -> frozenset[str]:
        """Concepts asserting a phrase; empty for unknown phrases."""
        return self._concepts_of.get(normalize(phrase), frozenset())

    def __contains__(self, concept: str) -> bool:
        return normalize(concept) in self._phrases_of

    def __len__(self) -> int:
        return len(self._phrases_of)


def _iter_lines(source: Source) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as handle:
            yield from handle
    else:
        yield from source


def _parse_row(line: str, fmt: str) -> Statement:
    if fmt == "jsonl":
        record = json.loads(line)
        if not isinstance(record, dict) or "concept" not in record or "phrase" not in record:
            raise ValueError("record must carry 'concept' and 'phrase'")
        return Statement(str(record["concept"]), str(record["phrase"]))
    cols = line.split("\t")
    if len(cols) != 2:
        raise ValueError(f"expected 2 tab-separated columns, got {len(cols)}")
    return Statement(cols[0], cols[1])


def load_kb(source: Source, concept_filter: set[str] | None = None, fmt: str = "auto") -> KbIndex:
    """Build a :class:`KbIndex` from an assertion file.

    ``concept_filter`` is an allow-list of concepts (normalized on entry);
    rows whose concept is not listed are dropped and counted. ``fmt`` is
    ``tsv``, ``jsonl`` or ``auto`` (sniffed from the first data line).
    """
    if concept_filter is not None:
        if not concept_filter:
            raise ValueError("concept_filter, when given, must be non-empty")
        concept_filter = {normalize(c) for c in concept_filter}

    stats = IngestStats()
    statements: list[Statement] = []
    seen: set[tuple[str, str]] = set()

    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if fmt == "auto":
            fmt = "jsonl" if line.lstrip().startswith("{") else "tsv"
        stats.rows_read += 1
        try:
            st = _parse_row(line, fmt)
        except (ValueError, json.JSONDecodeError) as exc:
            stats.row_errors.append(f"line {lineno}: {exc}")
            continue
        if concept_filter is not None and st.concept not in concept_filter:
            stats.filtered_out += 1
            continue
        key = (st.concept, st.phrase)
        if key in seen:
            stats.duplicates_merged += 1
            continue
        seen.add(key)
        statements.append(st)
        stats.rows_kept += 1

    if stats.rows_read and len(stats.row_errors) / stats.rows_read > BAD_ROW_TOLERANCE:
        raise IngestionError(
            f"{len(stats.row_errors)} of {stats.rows_read} rows malformed "
            f"(>{BAD_ROW_TOLERANCE:.0%} tolerance)",
            stats.row_errors,
        )
    return KbIndex(statements, stats)


def phrase_frequency(index: KbIndex, phrase: str) -> float:
    """Fraction of KB concepts asserting ``phrase``; 0.0 for unknown phrases."""
    if index.concept_count == 0:
        raise EmptyKbError("phrase frequency is undefined over an empty index")
    return len(index.concepts_of(phrase)) / index.concept_count

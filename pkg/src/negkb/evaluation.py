"""Recall against a ground-truth negation set, and the MCQA eliminator.

Ground truth arrives either pre-assembled (``concept<TAB>phrase``) or as
triples (``concept<TAB>relation<TAB>tail``) whose relation carries a leading
``Not``; the prefix is stripped and the relation naturalized through a small
mapping table before the tail is appended.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

from .errors import EvalInputError, ProviderError
from .kb import Source, _iter_lines
from .providers import PhraseSimilarityProvider
from .text import normalize

# Positive natural-language readings of the canonical relations (the negated
# forms of these appear verbatim in the upstream prompt mapping).
DEFAULT_RELATION_PHRASES: dict[str, str] = {
    "isa": "is",
    "capableof": "can",
    "desires": "desires",
    "hasa": "has",
    "hasproperty": "is",
    "madeof": "is made of",
    "atlocation": "is found in",
    "receivesaction": "is",
    "causes": "causes",
    "hassubevent": "leads to",
    "hasprerequisite": "needs",
    "partof": "is part of",
    "usedfor": "is used for",
}

_CAMEL = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


@dataclass(frozen=True)
class GroundTruthNegation:
    concept: str
    phrase: str

    def __post_init__(self):
        object.__setattr__(self, "concept", normalize(self.concept))
        object.__setattr__(self, "phrase", normalize(self.phrase))
        if not self.concept or not self.phrase:
            raise ValueError("ground-truth rows need a concept and a phrase")


def _naturalize(relation: str, relation_map: Mapping[str, str]) -> str:
    bare = relation.strip()
    if bare.lower().startswith("not"):
        bare = bare[3:]
    key = re.sub(r"[^a-z0-9]", "", bare.lower())
    if key in relation_map:
        return relation_map[key]
    # Fallback: split camel case into words ("RelatedTo" -> "related to").
    return _CAMEL.sub(" ", bare).lower().strip()


def load_ground_truth(
    source: Source, relation_map: Mapping[str, str] | None = None
) -> list[GroundTruthNegation]:
    """Read a truth file; 2-column rows are taken verbatim, 3-column rows are
    (concept, relation, tail) triples to naturalize."""
    table = {k.lower(): v for k, v in (relation_map or DEFAULT_RELATION_PHRASES).items()}
    rows: list[GroundTruthNegation] = []
    seen: set[GroundTruthNegation] = set()
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.rstrip("\n").rstrip("\r")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        cols = line.split("\t")
        try:
            if len(cols) == 2:
                row = GroundTruthNegation(cols[0], cols[1])
            elif len(cols) == 3:
                phrase = f"{_naturalize(cols[1], table)} {cols[2]}".strip()
                row = GroundTruthNegation(cols[0], phrase)
            else:
                raise ValueError(f"expected 2 or 3 columns, got {len(cols)}")
        except ValueError as exc:
            raise EvalInputError(f"truth line {lineno}: {exc}") from exc
        if row not in seen:
            seen.add(row)
            rows.append(row)
    return rows


def _matches(
    generated: str,
    truth_phrase: str,
    mode: str,
    sim: Optional[PhraseSimilarityProvider],
    lam: float,
) -> bool:
    if normalize(generated) == truth_phrase:
        return True
    if mode == "strict":
        return False
    if sim is None:
        raise EvalInputError("relaxed recall needs a similarity provider")
    return sim.similarity(generated, truth_phrase) >= lam


def recall(
    outputs: Mapping[str, Sequence[str]],
    truth: Iterable[GroundTruthNegation],
    mode: str = "strict",
    at_k: int | None = None,
    sim: Optional[PhraseSimilarityProvider] = None,
    lam: float = 0.7,
) -> float:
    """Fraction of truth negations matched by the generated lists.

    ``outputs`` maps each concept to its ranked negation phrases; a truth
    concept missing from the map is an error (an empty list is a valid run
    that produced nothing).
    """
    if mode not in ("strict", "relaxed"):
        raise ValueError(f"mode must be strict or relaxed, got {mode!r}")
    if at_k is not None and at_k < 1:
        raise ValueError("at_k must be >= 1")
    truth = list(truth)
    if not truth:
        raise EvalInputError("ground truth is empty; recall undefined")
    normalized_outputs = {normalize(c): list(phrases) for c, phrases in outputs.items()}
    missing = sorted({t.concept for t in truth} - set(normalized_outputs))
    if missing:
        raise EvalInputError(f"no output list for truth concepts: {missing}")
    recalled = 0
    for item in truth:
        generated = normalized_outputs[item.concept]
        if at_k is not None:
            generated = generated[:at_k]
        if any(_matches(g, item.phrase, mode, sim, lam) for g in generated):
            recalled += 1
    return recalled / len(truth)


@dataclass(frozen=True)
class McqaItem:
    concept: str
    question: str
    options: tuple[str, ...]
    correct: int

    def __post_init__(self):
        object.__setattr__(self, "concept", normalize(self.concept))
        object.__setattr__(self, "options", tuple(self.options))
        if len(self.options) < 2:
            raise ValueError("MCQA items need at least two options")
        if not 0 <= self.correct < len(self.options):
            raise ValueError(f"correct index {self.correct} outside options")


def load_mcqa(source: Source) -> list[McqaItem]:
    items: list[McqaItem] = []
    for lineno, raw in enumerate(_iter_lines(source), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
            items.append(
                McqaItem(
                    record["concept"],
                    record.get("question", ""),
                    tuple(str(o) for o in record["options"]),
                    int(record["correct"]),
                )
            )
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise EvalInputError(f"mcqa line {lineno}: {exc}") from exc
    return items


@dataclass(frozen=True)
class OptionVerdict:
    option: str
    eliminated: bool
    matched_negation: str | None = None
    similarity: float | None = None


def eliminate(
    item: McqaItem,
    negations: Sequence[str],
    sim: PhraseSimilarityProvider,
    lam: float = 0.7,
    fail_closed: bool = False,
) -> list[OptionVerdict]:
    """Cross out options that λ-match any generated negation for the concept.

    Verdicts are per option and independent of each other; the carried match
    is the highest-similarity negation (earliest in rank order on ties).
    """
    verdicts: list[OptionVerdict] = []
    for option in item.options:
        best: tuple[float, str] | None = None
        for negation in negations:
            if normalize(option) == normalize(negation):
                value = 1.0
            else:
                try:
                    value = sim.similarity(option, negation)
                except ProviderError:
                    if fail_closed:
                        raise
                    continue
            if best is None or value > best[0]:
                best = (value, negation)
        if best is not None and best[0] >= lam:
            verdicts.append(OptionVerdict(option, True, best[1], best[0]))
        else:
            verdicts.append(OptionVerdict(option, False))
    return verdicts


def tally(
    verdicts: Iterable[Sequence[OptionVerdict]], items: Iterable[McqaItem]
) -> tuple[int, int]:
    """(helpful, unhelpful) elimination counts over all items.

    Helpful eliminations remove a wrong option; unhelpful ones remove the
    correct option.
    """
    helpful = 0
    unhelpful = 0
    for item_verdicts, item in zip(verdicts, items):
        for position, verdict in enumerate(item_verdicts):
            if not verdict.eliminated:
                continue
            if position == item.correct:
                unhelpful += 1
            else:
                helpful += 1
    return helpful, unhelpful


# The evaluation protocol collects this many top negations per concept.
DEFAULT_COLLECTION_DEPTH = 200


def recall_report(
    outputs: Mapping[str, Sequence[str]],
    truth: Sequence[GroundTruthNegation],
    sim: Optional[PhraseSimilarityProvider],
    lam: float = 0.7,
    at_k: int = 10,
    depth: int | None = DEFAULT_COLLECTION_DEPTH,
) -> dict:
    """Strict/relaxed recall over the collected lists and at @at_k.

    ``depth`` caps each concept's list first (the collection step; None
    keeps everything). The covered denominator restricts truth to concepts
    present in ``outputs``; the all-rows denominator counts absent concepts
    as misses.
    """
    if not truth:
        raise EvalInputError("ground truth is empty; recall undefined")
    collected = {
        normalize(c): (list(v)[:depth] if depth is not None else list(v))
        for c, v in outputs.items()
    }
    covered = [t for t in truth if t.concept in collected]
    report: dict = {
        "truth_total": len(truth),
        "truth_covered": len(covered),
        "collection_depth": depth,
        "modes": {},
    }
    for mode in ("strict", "relaxed"):
        for cutoff, label in ((None, "full"), (at_k, f"@{at_k}")):
            if covered:
                value = recall(collected, covered, mode, cutoff, sim, lam)
                hits = round(value * len(covered))
            else:
                hits = 0
            report["modes"][f"{mode}_{label}"] = {
                "covered_denominator": hits / len(covered) if covered else 0.0,
                "all_denominator": hits / len(truth),
            }
    return report

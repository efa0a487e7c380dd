"""Canonical string forms used for every cross-source join.

Concepts and phrases from the assertion file, the taxonomy, the embedding
vocabulary and the caches all pass through the same normalizer so that joins
never fail on case or whitespace.
"""

from __future__ import annotations

import re

_WS = re.compile(r"\s+")


def normalize(text: str) -> str:
    """Lowercase, trim, collapse internal whitespace, strip trailing periods.

    Idempotent: normalize(normalize(x)) == normalize(x).
    """
    out = _WS.sub(" ", text.strip().lower())
    out = out.rstrip(".")
    return out.strip()


def sim_key(a: str, b: str) -> tuple[str, str]:
    """Symmetric cache key: the normalized pair in lexicographic order."""
    na, nb = normalize(a), normalize(b)
    return (na, nb) if na <= nb else (nb, na)


def head_noun(concept: str) -> str:
    """Last word of a (normalized) concept; the match anchor for mask probes."""
    parts = normalize(concept).split(" ")
    return parts[-1] if parts else ""


def token_matches_concept(token: str, concept: str) -> bool:
    """Match a predicted token against a concept, tolerating plural forms.

    Single-token predictions are compared against the concept's head noun,
    equal up to an "s"/"es" suffix on either side.
    """
    t = token.strip().lower()
    head = head_noun(concept)
    if not t or not head:
        return False
    if t == head:
        return True
    if t in (head + "s", head + "es"):
        return True
    if head in (t + "s", t + "es"):
        return True
    return False


_SLUG_RE = re.compile(r"[^a-z0-9]+")


def slugify(concept: str) -> str:
    """Filesystem-safe name for per-concept output files."""
    slug = _SLUG_RE.sub("-", normalize(concept)).strip("-")
    return slug or "concept"

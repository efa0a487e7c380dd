import pytest

from negkb.errors import UnknownConceptError
from negkb.siblings import SiblingAudit, random_siblings, select_siblings


def test_paper_sibling_selection(elephant_kb, elephant_tax, elephant_vectors):
    audit = SiblingAudit()
    sibs = select_siblings(
        elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=3, k=5, audit=audit
    )
    assert sibs.concepts == ["tiger", "lion", "horse"]
    assert not sibs.underpopulated
    outcomes = dict(audit.scanned)
    assert outcomes["trunk"] == "skip:no-shared-hypernym"


def test_gamma_one_prefix(elephant_kb, elephant_tax, elephant_vectors):
    sibs = select_siblings(elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=1)
    assert sibs.concepts == ["tiger"]


def test_prefix_monotonicity(elephant_kb, elephant_tax, elephant_vectors):
    previous = []
    for gamma in range(1, 6):
        current = select_siblings(
            elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=gamma
        ).concepts
        assert current[: len(previous)] == previous
        previous = current


def test_isa_candidates_skipped(elephant_kb, elephant_tax, elephant_vectors):
    # walking past horse reaches african elephant, which fails the IsA check
    audit = SiblingAudit()
    sibs = select_siblings(
        elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=5, audit=audit
    )
    assert "african elephant" not in sibs.concepts
    assert dict(audit.scanned)["african elephant"] == "skip:isa-related"
    assert sibs.underpopulated  # only 3 valid siblings exist


def test_every_neighbor_fails_gives_empty_set(elephant_kb, elephant_tax, elephant_vectors):
    # trunk shares no hypernym with anything it is ranked against
    sibs = select_siblings(elephant_kb, elephant_tax, elephant_vectors, "trunk", gamma=3)
    assert sibs.concepts == []
    assert len(sibs) == 0


def test_unknown_target_errors(elephant_kb, elephant_tax, elephant_vectors):
    with pytest.raises(UnknownConceptError):
        select_siblings(elephant_kb, elephant_tax, elephant_vectors, "unicorn", gamma=3)


def test_kept_siblings_satisfy_predicates(elephant_kb, elephant_tax, elephant_vectors):
    from negkb.taxonomy import isa_related, shares_hypernym

    sibs = select_siblings(elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=3, k=5)
    for concept in sibs.concepts:
        assert elephant_kb.phrases_of(concept)
        assert shares_hypernym(elephant_tax, "elephant", concept, 5)
        assert not isa_related(elephant_tax, "elephant", concept)


def test_horizon_caps_the_walk(elephant_kb, elephant_tax, elephant_vectors):
    sibs = select_siblings(
        elephant_kb, elephant_tax, elephant_vectors, "elephant", gamma=5, horizon=2
    )
    assert sibs.concepts == ["tiger", "lion"]


def test_validation():
    with pytest.raises(ValueError):
        select_siblings(None, None, None, "x", gamma=0)


def test_random_siblings_deterministic(elephant_kb):
    a = random_siblings(elephant_kb, "elephant", 3, seed=42)
    b = random_siblings(elephant_kb, "elephant", 3, seed=42)
    c = random_siblings(elephant_kb, "elephant", 3, seed=43)
    assert a.siblings == b.siblings
    assert a.source == "random"
    assert "elephant" not in a.concepts
    assert len(a) == 3
    assert a.siblings != c.siblings  # overwhelmingly likely with 49 concepts

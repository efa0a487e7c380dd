from fractions import Fraction

import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from negkb.miner import NegationMiner, PipelineResources


def test_get_params_round_trip():
    miner = NegationMiner(gamma=3, lambda_=0.6, tau=10, beta=0.1)
    params = miner.get_params()
    assert params["gamma"] == 3
    assert params["lambda_"] == 0.6
    rebuilt = NegationMiner(**params)
    assert rebuilt.get_params() == params


def test_clone_preserves_params():
    miner = NegationMiner(gamma=7, rank_mode="relaxed", use_lm_filter=False)
    copy = clone(miner)
    assert copy.get_params() == miner.get_params()


def test_set_params_supports_grid_style_updates(elephant_resources):
    miner = NegationMiner(gamma=3, tau=100)
    miner.set_params(beta=0.5, use_generic_filter=False)
    assert miner.beta == 0.5
    miner.fit(elephant_resources)


def test_predict_requires_fit():
    with pytest.raises(NotFittedError):
        NegationMiner().predict(["elephant"])


@pytest.mark.parametrize(
    "params",
    [
        {"gamma": 0},
        {"lambda_": 1.5},
        {"tau": 0},
        {"beta": -0.1},
        {"top_k": 0},
        {"rank_mode": "best"},
        {"hypernym_k": 0},
        {"filter_order": ("generic",)},
        {"probe_template": "no placeholder"},
        {"sibling_horizon": 0},
    ],
)
def test_fit_validates_params(elephant_resources, params):
    with pytest.raises(ValueError):
        NegationMiner(**params).fit(elephant_resources)


def test_fit_validates_resource_wiring(elephant_kb):
    with pytest.raises(ValueError, match="taxonomy"):
        NegationMiner().fit(PipelineResources(elephant_kb))
    with pytest.raises(ValueError, match="similarity"):
        NegationMiner(use_siblings=False, use_lm_filter=False).fit(
            PipelineResources(elephant_kb)
        )


def test_worked_example_end_to_end(elephant_miner):
    result = elephant_miner.mine("elephant")
    assert result.siblings.concepts == ["tiger", "lion", "horse"]
    assert result.stage_counts == {
        "inferred": 6,
        "after_kb_similarity": 5,
        "after_lm_probe": 4,
        "after_generic": 3,
        "after_merge": 2,
        "emitted": 2,
    }
    assert [r["negation"] for r in result.records] == ["can jump", "has hoof"]
    assert result.records[0]["absorbed"] == ["can leap"]


def test_predict_returns_records_per_concept(elephant_miner):
    records = elephant_miner.predict(["elephant"])
    assert len(records) == 1
    assert records[0][0]["negation"] == "can jump"


def test_disabling_all_filters(elephant_resources):
    miner = NegationMiner(
        gamma=3, tau=100, use_kb_filter=False, use_lm_filter=False, use_generic_filter=False
    ).fit(elephant_resources)
    result = miner.mine("elephant")
    assert result.stage_counts["inferred"] == 6
    assert "after_kb_similarity" not in result.stage_counts
    # nothing was filtered, so all six arrive at the ranking stage
    assert result.stage_counts["emitted"] == result.stage_counts["after_merge"]


def test_without_ranking_emits_unscored_phrase_order(elephant_resources):
    miner = NegationMiner(gamma=3, tau=100, use_ranking=False).fit(elephant_resources)
    result = miner.mine("elephant")
    phrases = [r["negation"] for r in result.records]
    assert phrases == sorted(phrases)
    assert all(r["strict"] is None and r["relaxed"] is None for r in result.records)


def test_random_sibling_mode_is_seeded(elephant_kb, elephant_sim, elephant_probes):
    resources = PipelineResources(elephant_kb, None, None, elephant_sim, elephant_probes)
    miner_a = NegationMiner(gamma=3, tau=100, use_siblings=False, use_ranking=False,
                            random_state=5).fit(resources)
    miner_b = NegationMiner(gamma=3, tau=100, use_siblings=False, use_ranking=False,
                            random_state=5).fit(resources)
    ra, rb = miner_a.mine("elephant"), miner_b.mine("elephant")
    assert ra.siblings.siblings == rb.siblings.siblings
    assert ra.siblings.source == "random"
    assert [r["negation"] for r in ra.records] == [r["negation"] for r in rb.records]


def test_underpopulated_sibling_sets_are_flagged(elephant_resources):
    miner = NegationMiner(gamma=10, tau=100).fit(elephant_resources)
    result = miner.mine("elephant")
    assert result.siblings.underpopulated
    assert all(r["sibling_shortfall"] == 7 for r in result.records)
    # denominator stays the configured gamma
    by_phrase = {c.phrase: c for c in result.emitted}
    assert by_phrase["can jump"].strict_score == Fraction(2, 10)


def test_zero_sibling_target_yields_no_negations(elephant_resources):
    miner = NegationMiner(gamma=3, tau=100).fit(elephant_resources)
    result = miner.mine("trunk")
    assert result.siblings.concepts == []
    assert result.records == []


def test_top_k_truncates_without_padding(elephant_resources):
    miner = NegationMiner(gamma=3, tau=100, top_k=1).fit(elephant_resources)
    result = miner.mine("elephant")
    assert [r["negation"] for r in result.records] == ["can jump"]
    big = NegationMiner(gamma=3, tau=100, top_k=1000).fit(elephant_resources)
    assert len(big.mine("elephant").records) == 2

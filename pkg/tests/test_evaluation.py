"""Ranking and classification metrics against crafted score layouts and
the brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import ddikge.evaluation as ev
from ddikge.data import FilterIndex, Triplet, build_filter_index
from ddikge.errors import DomainError, EvaluationError
from ddikge.rng import RngStream
from ddikge.scorers import EmbeddingModel, init_model, score

from conftest import make_model
from oracles import midrank_of, pr_auc_threshold_sweep, roc_auc_threshold_sweep


def scalar_model(entity_values, n_relations: int = 1) -> EmbeddingModel:
    """DistMult with dim 1 and relation weight 1: score(h, r, t) = h * t.

    Controlling entity scalars controls every candidate score exactly.
    """
    ent = np.asarray(entity_values, dtype=np.float64).reshape(-1, 1)
    rel = np.ones((n_relations, 1))
    return EmbeddingModel("distmult", 1, ent, rel)


# ---------------------------------------------------------------------------
# filtered ranking


def test_filtered_rank_hand_case_distinct_scores():
    # Head 0 (value 3), candidate tails score 3 * value.
    m = scalar_model([3.0, 1.0, 2.0, 4.0, 5.0])
    index = FilterIndex([Triplet(0, 0, 1)])
    res = ev.filtered_rank(m, index, Triplet(0, 0, 1), "tail")
    # Tail scores: e0 9, e1 3 (target), e2 6, e3 12, e4 15 -> 4 greater.
    assert res.rank == 5.0
    assert res.n_candidates == 5
    assert res.n_filtered == 0


def test_filtered_rank_hand_case_with_ties():
    # Entities 2 and 3 share the value 2; target tail 2 ties with 3.
    m = scalar_model([3.0, 1.0, 2.0, 2.0, 5.0])
    index = FilterIndex([Triplet(0, 0, 2)])
    res = ev.filtered_rank(m, index, Triplet(0, 0, 2), "tail")
    # Scores: 9, 3, 6*, 6, 15 -> 2 greater, 1 tie -> 1 + 2 + 0.5.
    assert res.rank == 3.5


def test_filtered_rank_removes_known_competitors():
    m = scalar_model([3.0, 1.0, 2.0, 2.0, 5.0])
    # (0, 0, 4) is known true, so the top-scoring competitor drops out.
    index = build_filter_index([Triplet(0, 0, 2), Triplet(0, 0, 4)])
    res = ev.filtered_rank(m, index, Triplet(0, 0, 2), "tail")
    assert res.rank == 2.5
    assert res.n_filtered == 1
    assert res.n_candidates == 4


def test_filtered_rank_never_filters_the_target_itself():
    m = scalar_model([1.0, 2.0, 3.0])
    index = FilterIndex([Triplet(0, 0, 1)])  # the probe itself
    res = ev.filtered_rank(m, index, Triplet(0, 0, 1), "tail")
    assert res.n_filtered == 0
    assert res.rank >= 1.0


def test_filtered_rank_head_side():
    m = scalar_model([3.0, 1.0, 2.0, 4.0])
    index = FilterIndex([Triplet(1, 0, 2)])
    res = ev.filtered_rank(m, index, Triplet(1, 0, 2), "head")
    # Head scores against tail 2: 6, 2 (target), 4, 8 -> rank 4.
    assert res.side == "head"
    assert res.rank == 4.0


def test_filtered_rank_validation():
    m = scalar_model([1.0, 2.0])
    index = FilterIndex([])
    with pytest.raises(DomainError):
        ev.filtered_rank(m, index, Triplet(0, 0, 1), "both")
    with pytest.raises(EvaluationError):
        ev.filtered_rank(m, index, Triplet(0, 0, 9), "tail")


def test_rank_matches_midrank_oracle_on_crafted_ties():
    m = scalar_model([3.0, 1.0, 2.0, 2.0, 5.0, 0.0, 2.0])
    index = FilterIndex([])
    for tail in range(7):
        trip = Triplet(0, 0, tail)
        got = ev.filtered_rank(m, index, trip, "tail").rank
        values = [3.0 * v for v in [3.0, 1.0, 2.0, 2.0, 5.0, 0.0, 2.0]]
        assert got == midrank_of(values, 3.0 * m.entity_table[tail, 0])


def test_rank_oracle_agreement_on_a_real_model(rank_kg):
    triplets, vocab, ds, index = rank_kg
    m = init_model("complex", vocab.n_entities, vocab.n_relations, 4, RngStream(20))
    for trip in ds.test[:10]:
        for side in ("tail", "head"):
            fast = ev.filtered_rank(m, index, trip, side).rank
            assert fast == ev.rank_oracle(m, index, trip, side)


def test_adding_competitors_to_the_filter_never_raises_the_rank():
    m = scalar_model([3.0, 1.0, 2.0, 4.0, 5.0, 2.5])
    trip = Triplet(0, 0, 1)
    base = ev.filtered_rank(m, FilterIndex([trip]), trip, "tail").rank
    index = FilterIndex([trip])
    for extra in (4, 3, 5, 2, 0):
        index.add(Triplet(0, 0, extra))
        now = ev.filtered_rank(m, index, trip, "tail").rank
        assert now <= base
        base = now
    assert base == 1.0  # every competitor filtered away


def test_all_ranks_covers_both_sides():
    m = scalar_model([1.0, 2.0, 3.0])
    index = FilterIndex([])
    out = ev.all_ranks(m, [Triplet(0, 0, 1), Triplet(1, 0, 2)], index)
    assert [r.side for r in out] == ["tail", "head", "tail", "head"]
    with pytest.raises(EvaluationError):
        ev.all_ranks(m, [], index)


# ---------------------------------------------------------------------------
# link prediction metrics


def fixed_ranks(values):
    return [ev.RankResult(Triplet(0, 0, 1), "tail", v, 10, 0) for v in values]


def test_link_prediction_metrics_hand_case():
    m = scalar_model([1.0, 2.0])
    ranks = fixed_ranks([1.0, 2.0, 4.0, 1.0])
    rep = ev.link_prediction_metrics(m, [Triplet(0, 0, 1)], FilterIndex([]),
                                     hits=(1, 3), ranks=ranks)
    assert rep.values["mr"] == 2.0
    assert rep.values["mrr"] == (1.0 + 0.5 + 0.25 + 1.0) / 4.0
    assert rep.values["hits@1"] == 0.5
    assert rep.values["hits@3"] == 0.75
    assert rep.counts["n_rank_queries"] == 4


def test_hits_is_monotone_in_k(rank_kg):
    triplets, vocab, ds, index = rank_kg
    m = init_model("simple", vocab.n_entities, vocab.n_relations, 4, RngStream(21))
    rep = ev.link_prediction_metrics(m, ds.test, index, hits=(1, 3, 10, 30))
    assert (rep.values["hits@1"] <= rep.values["hits@3"]
            <= rep.values["hits@10"] <= rep.values["hits@30"] <= 1.0)
    assert rep.values["mrr"] <= 1.0
    assert rep.values["mr"] >= 1.0


def test_rank_histogram_csv_counts():
    text = ev.rank_histogram_csv(fixed_ranks([1.0, 2.5, 1.0, 7.0]))
    assert text.splitlines() == ["rank,count", "1.0,2", "2.5,1", "7.0,1"]


def test_metrics_report_serialization():
    rep = ev.MetricsReport("link_prediction", {"mrr": 0.5}, {"n_test": 3},
                           config_hash="abcd")
    text = rep.to_text()
    assert "task\tlink_prediction" in text
    assert "mrr\t0.5" in text
    assert "config_hash\tabcd" in text
    csv = rep.to_csv()
    assert csv.splitlines()[0] == "mrr,n_test"
    assert csv.splitlines()[1] == "0.5,3"


# ---------------------------------------------------------------------------
# exact AUCs


def test_roc_auc_hand_cases():
    assert ev.roc_auc_exact([True, False], [2.0, 1.0]) == 1.0
    assert ev.roc_auc_exact([True, False], [1.0, 2.0]) == 0.0
    assert ev.roc_auc_exact([True, False], [1.0, 1.0]) == 0.5
    # pos {4, 2}, neg {3, 1}: 3 of 4 pairs ordered correctly.
    assert ev.roc_auc_exact([True, False, True, False], [4.0, 3.0, 2.0, 1.0]) == 0.75


def test_pr_auc_hand_case():
    # Ranked pos, neg, pos: AP = 1/2 * 1 + 1/2 * 2/3 = 5/6.
    got = ev.pr_auc_exact([True, False, True], [3.0, 2.0, 1.0])
    assert got == float(5.0 / 6.0)
    assert ev.pr_auc_exact([True, False], [2.0, 1.0]) == 1.0


def test_aucs_match_threshold_sweep_oracles_on_random_toys():
    rng = RngStream(22)
    for _ in range(60):
        n = int(rng.integers(2, 15))
        labels = [bool(rng.integers(0, 2)) for _ in range(n)]
        if not any(labels):
            labels[0] = True
        if all(labels):
            labels[-1] = False
        # Integer scores force plenty of ties.
        scores = [float(rng.integers(0, 5)) for _ in range(n)]
        assert ev.roc_auc_exact(labels, scores) == float(
            roc_auc_threshold_sweep(labels, scores))
        assert ev.pr_auc_exact(labels, scores) == float(
            pr_auc_threshold_sweep(labels, scores))


def test_aucs_invariant_under_monotone_transforms():
    labels = [True, False, True, False, True, False, False]
    scores = [3.0, 3.0, 2.0, 1.0, -1.0, -1.0, -4.0]
    roc = ev.roc_auc_exact(labels, scores)
    pr = ev.pr_auc_exact(labels, scores)
    doubled = [2.0 * s for s in scores]
    shifted = [s + 100.0 for s in scores]
    cubed = [s**3 for s in scores]  # strictly monotone, keeps every tie
    for alt in (doubled, shifted, cubed):
        assert ev.roc_auc_exact(labels, alt) == roc
        assert ev.pr_auc_exact(labels, alt) == pr


@given(st.lists(st.tuples(st.booleans(), st.integers(0, 6)), min_size=2, max_size=40))
@settings(max_examples=60, deadline=None)
def test_roc_auc_property_against_oracle(pairs):
    labels = [y for y, _ in pairs]
    scores = [float(s) for _, s in pairs]
    if any(labels) and not all(labels):
        assert ev.roc_auc_exact(labels, scores) == float(
            roc_auc_threshold_sweep(labels, scores))
        assert 0.0 <= ev.pr_auc_exact(labels, scores) <= 1.0


def test_auc_degenerate_inputs_rejected():
    with pytest.raises(EvaluationError):
        ev.roc_auc_exact([True, True], [1.0, 2.0])
    with pytest.raises(EvaluationError):
        ev.roc_auc_exact([False, False], [1.0, 2.0])
    with pytest.raises(EvaluationError):
        ev.pr_auc_exact([], [])
    with pytest.raises(EvaluationError):
        ev.roc_auc_exact([True, False], [1.0])


def test_roc_and_pr_points_shapes():
    labels = [True, False, True]
    scores = [3.0, 2.0, 1.0]
    roc = ev.roc_points(labels, scores)
    assert roc[0] == (0.0, 0.0)
    assert roc[-1] == (1.0, 1.0)
    pr = ev.pr_points(labels, scores)
    assert pr[-1][0] == 1.0  # full recall at the lowest threshold
    text = ev.curve_csv(roc, "fpr", "tpr")
    assert text.startswith("fpr,tpr\n0.0,0.0\n")


# ---------------------------------------------------------------------------
# pair classification


def test_classification_decisions_labels_and_max_orientation():
    # Entities 0, 1 with values 2 and 3; relations r0 (weight 1), r1 (-1).
    ent = np.array([[2.0], [3.0]])
    rel = np.array([[1.0], [-1.0]])
    m = EmbeddingModel("distmult", 1, ent, rel)
    test = [Triplet(0, 0, 1)]
    known = [Triplet(0, 0, 1), Triplet(1, 1, 0)]
    pairs, n_excluded = ev.classification_decisions(m, test, known)
    assert n_excluded == 0
    assert len(pairs) == 1
    pd = pairs[0]
    assert pd.pair == (0, 1)
    # Both directions of both relations appear in known for this pair.
    assert pd.true_relations == {0, 1}
    # DistMult is symmetric, so max over orientations is the plain score.
    assert pd.scores[0] == 6.0
    assert pd.scores[1] == -6.0


def test_classification_max_over_orientations_with_complex():
    m = make_model("complex", n_entities=4, n_relations=2, dim=3, seed=23)
    test = [Triplet(1, 0, 2)]
    pairs, _ = ev.classification_decisions(m, test, test)
    want = max(score(m, Triplet(1, 1, 2)), score(m, Triplet(2, 1, 1)))
    assert pairs[0].scores[1] == want


def test_classification_excludes_pairs_without_labels():
    m = scalar_model([1.0, 2.0, 3.0], n_relations=2)
    test = [Triplet(0, 0, 1), Triplet(1, 1, 2)]
    known = [Triplet(0, 0, 1)]  # nothing known about the pair (1, 2)
    pairs, n_excluded = ev.classification_decisions(m, test, known)
    assert len(pairs) == 1
    assert n_excluded == 1


def test_classification_pairs_are_unordered_and_deduplicated():
    m = scalar_model([1.0, 2.0, 3.0], n_relations=1)
    test = [Triplet(0, 0, 1), Triplet(1, 0, 0), Triplet(2, 0, 0)]
    pairs, _ = ev.classification_decisions(m, test, test)
    assert [p.pair for p in pairs] == [(0, 1), (0, 2)]


def test_precision_at_k_tie_breaks_toward_lower_relation_id():
    pd_lo = ev.PairDecisions((0, 1), {0}, np.array([1.0, 1.0, 0.0]))
    pd_hi = ev.PairDecisions((0, 1), {1}, np.array([1.0, 1.0, 0.0]))
    assert ev.precision_at_k([pd_lo], 1) == 1.0
    assert ev.precision_at_k([pd_hi], 1) == 0.0
    # k larger than the hit count still divides by k.
    assert ev.precision_at_k([pd_lo], 3) == 1.0 / 3.0
    with pytest.raises(DomainError):
        ev.precision_at_k([pd_lo], 0)


def test_ddi_classification_micro_pools_all_decisions():
    ent = np.array([[1.0], [2.0], [3.0]])
    rel = np.array([[1.0], [0.5]])
    m = EmbeddingModel("distmult", 1, ent, rel)
    test = [Triplet(0, 0, 1), Triplet(1, 1, 2)]
    known = test
    rep = ev.ddi_classification(m, test, known, ks=(1,))
    labels, scores = [], []
    for pd in ev.classification_decisions(m, test, known)[0]:
        for r in range(2):
            labels.append(r in pd.true_relations)
            scores.append(float(pd.scores[r]))
    assert rep.values["roc_auc"] == ev.roc_auc_exact(labels, scores)
    assert rep.values["pr_auc"] == ev.pr_auc_exact(labels, scores)
    assert rep.counts["n_pairs"] == 2
    assert rep.counts["n_decisions"] == 4
    assert rep.counts["n_excluded"] == 0
    assert rep.task == "classification"


def test_ddi_classification_rejects_single_class_pool():
    # One relation, and it is true for the only pair: no negatives exist.
    m = scalar_model([1.0, 2.0], n_relations=1)
    test = [Triplet(0, 0, 1)]
    with pytest.raises(EvaluationError):
        ev.ddi_classification(m, test, test)

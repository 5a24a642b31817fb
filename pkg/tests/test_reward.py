"""Answer embedding, triplet score, bounded reward map."""

import math

import numpy as np
import pytest

from tsqa.reward import (
    AnswerVector,
    RewardParams,
    embed_answer,
    l2_distance,
    load_lookup_table,
    reward,
    score_prediction,
    triplet_score,
)

# Reference values computed once with 60-digit arithmetic (mpmath) for
# R(t) = 4 * (2 / (1 + e^t + 1e-6)) - 2.
HIGH_PRECISION_R = {
    0.0: 1.9999980000009999995,
    0.5: 1.020324210089941218302066,
    1.0: 0.1515307923242115570054819,
    2.0: -1.046376737497738951012198,
    5.0: -1.946457192964075181084299,
    30.0: -1.999999999999251390162493,
}


def test_reward_matches_high_precision_reference():
    params = RewardParams()
    for t, want in HIGH_PRECISION_R.items():
        assert reward(t, params) == pytest.approx(want, abs=1e-12)


def test_reward_at_zero_close_to_two():
    # the delta term keeps the map off the asymptote: R(0) is just below 2
    r0 = reward(0.0, RewardParams())
    assert 1.999997 < r0 < 2.0
    assert r0 == pytest.approx(1.999998000001, abs=1e-12)


def test_reward_bounds_and_monotonicity():
    params = RewardParams()
    grid = np.linspace(0.0, 30.0, 10_000)
    values = [reward(float(t), params) for t in grid]
    assert all(-2.0 <= v < 2.0 for v in values)
    assert all(a > b for a, b in zip(values, values[1:]))


def test_reward_rejects_negative_score():
    with pytest.raises(ValueError):
        reward(-0.1, RewardParams())


def test_reward_params_validation():
    with pytest.raises(ValueError):
        RewardParams(alpha=0)
    with pytest.raises(ValueError):
        RewardParams(margin=-1)
    with pytest.raises(ValueError):
        RewardParams(embedder="word2vec")
    with pytest.raises(ValueError):
        RewardParams(neg_aggregate="max")


def test_embed_answer_norms():
    params = RewardParams()
    assert np.linalg.norm(embed_answer("", params).values) == 0.0
    assert np.linalg.norm(embed_answer("the a an", params).values) == 0.0  # articles drop out
    v = embed_answer("Leeds United F.C.", params).values
    assert np.linalg.norm(v) == pytest.approx(1.0, abs=1e-12)


def test_embed_answer_normalization_invariance():
    params = RewardParams()
    a = embed_answer("Leeds United F.C.", params).values
    b = embed_answer("  leeds UNITED fc  ", params).values
    assert np.allclose(a, b)


def test_embed_answer_deterministic():
    params = RewardParams()
    a = embed_answer("Gainsborough Trinity", params).values
    b = embed_answer("Gainsborough Trinity", params).values
    assert np.array_equal(a, b)


def test_identical_answers_zero_distance():
    params = RewardParams()
    a = embed_answer("Mill Bank", params)
    b = embed_answer("Mill Bank", params)
    assert l2_distance(a, b) == 0.0


def test_triplet_score_cases():
    params = RewardParams()
    gt = embed_answer("alpha works", params)
    pred_exact = embed_answer("alpha works", params)
    neg = embed_answer("omega plant", params)
    # exact prediction with a distant negative scores 0 under margin <= d_neg
    assert triplet_score(gt, pred_exact, [neg], margin=1.0) == pytest.approx(
        max(0.0 - l2_distance(pred_exact, neg) + 1.0, 0.0)
    )
    # no negatives: plain positive distance
    pred_off = embed_answer("omega plant", params)
    assert triplet_score(gt, pred_off, []) == pytest.approx(l2_distance(gt, pred_off))


def test_triplet_score_hardest_vs_mean():
    params = RewardParams()
    gt = embed_answer("target name", params)
    pred = embed_answer("prediction text", params)
    negs = [embed_answer(n, params) for n in ("near miss", "far away", "also wrong")]
    dists = [l2_distance(pred, n) for n in negs]
    d_pos = l2_distance(gt, pred)
    hardest = triplet_score(gt, pred, negs, margin=1.0, neg_aggregate="min")
    averaged = triplet_score(gt, pred, negs, margin=1.0, neg_aggregate="mean")
    assert hardest == pytest.approx(max(d_pos - min(dists) + 1.0, 0.0))
    assert averaged == pytest.approx(max(d_pos - sum(dists) / 3 + 1.0, 0.0))
    assert hardest >= averaged  # the nearest negative is the strictest


def test_triplet_clamps_at_zero():
    params = RewardParams(dim=8)
    gt = embed_answer("same", params)
    pred = embed_answer("same", params)
    # a negative identical to the prediction gives d_neg = 0, so the
    # hinge is active: 0 - 0 + margin
    neg = embed_answer("same", params)
    assert triplet_score(gt, pred, [neg], margin=0.5) == pytest.approx(0.5)
    far = AnswerVector(np.zeros(8))
    # margin 0 with positive d_neg clamps to zero
    assert triplet_score(gt, pred, [embed_answer("other", params)], margin=0.0) == 0.0


def test_score_prediction_orders_good_above_bad():
    params = RewardParams()
    negs = ["Mill A", "Yard D"]
    good = score_prediction("Mill B", "Mill B", negs, params)
    bad = score_prediction("Mill B", "Mill A", negs, params)
    assert good > bad


def test_score_prediction_empty_gold_exact():
    params = RewardParams()
    # both empty: distance 0, negatives far -> top reward
    top = score_prediction("", "", ["Mill A"], params)
    assert top == pytest.approx(reward(0.0, params), abs=1e-12)


def test_lookup_table_embedder(tmp_path):
    vec_file = tmp_path / "vecs.txt"
    vec_file.write_text(
        "mill 1.0 0.0\nbank 0.0 1.0\n",
        encoding="utf-8",
    )
    table = load_lookup_table(vec_file, dim=2)
    params = RewardParams(dim=2, embedder="lookup_table", lookup_table=table)
    v = embed_answer("Mill Bank", params).values
    assert np.allclose(v, np.array([0.5, 0.5]) / np.linalg.norm([0.5, 0.5]))
    # OOV-only answers embed to zero
    assert np.linalg.norm(embed_answer("unknown words", params).values) == 0.0


def test_lookup_table_parse_errors(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("mill 1.0\n", encoding="utf-8")
    with pytest.raises(ValueError):
        load_lookup_table(bad, dim=2)
    with pytest.raises(FileNotFoundError):
        load_lookup_table(tmp_path / "missing.txt", dim=2)


def test_answer_vector_validation():
    with pytest.raises(ValueError):
        AnswerVector(np.array([0.5, 0.5]))  # norm neither 0 nor 1
    AnswerVector(np.zeros(4))
    AnswerVector(np.array([1.0, 0.0]))

import random

import pytest

from dialdoc.ensemble import CheckpointPrediction, tally, vote
from dialdoc.errors import ContractViolation

from oracles import oracle_vote


def _preds(spans_scores):
    return [
        CheckpointPrediction(f"ckpt{i}", "ex", span, score)
        for i, (span, score) in enumerate(spans_scores)
    ]


def test_strict_majority_wins():
    preds = _preds([((5, 10), 0.1), ((5, 10), 0.2), ((7, 12), 9.9)])
    assert vote(preds) == (5, 10)
    assert tally(preds).tiebreak == "none"


def test_frequency_tie_falls_to_score_sum():
    preds = _preds([((5, 10), 1.0), ((7, 12), 3.5)])
    result = tally(preds)
    assert result.span == (7, 12)
    assert result.tiebreak == "score"
    assert result.votes == 1


def test_score_tie_falls_to_position():
    preds = _preds([((7, 12), 2.0), ((5, 10), 2.0)])
    result = tally(preds)
    assert result.span == (5, 10)
    assert result.tiebreak == "position"


def test_unanimity():
    preds = _preds([((3, 8), s) for s in (0.0, 1.0, 2.0)])
    assert vote(preds) == (3, 8)


def test_majority_beats_any_scores():
    preds = _preds([((5, 10), -100.0), ((5, 10), -100.0), ((7, 12), 1e9)])
    assert vote(preds) == (5, 10)


def test_contract_violations():
    with pytest.raises(ContractViolation):
        vote([])
    dup = [
        CheckpointPrediction("c1", "ex", (1, 2), 0.0),
        CheckpointPrediction("c1", "ex", (3, 4), 0.0),
    ]
    with pytest.raises(ContractViolation, match="duplicate checkpoint"):
        vote(dup)
    mixed = [
        CheckpointPrediction("c1", "ex1", (1, 2), 0.0),
        CheckpointPrediction("c2", "ex2", (3, 4), 0.0),
    ]
    with pytest.raises(ContractViolation, match="mixed example ids"):
        vote(mixed)


def _random_votes(rng, n_checkpoints):
    spans = [(s, s + w) for s, w in [(rng.randint(0, 6), rng.randint(1, 4)) for _ in range(4)]]
    return [
        CheckpointPrediction(
            f"ckpt{i}", "ex", rng.choice(spans), rng.choice([0.5, 1.0, 2.5, 2.5, -1.0])
        )
        for i in range(n_checkpoints)
    ]


def test_vote_matches_brute_force_with_permutation_invariance():
    rng = random.Random(71)
    for _ in range(500):
        preds = _random_votes(rng, rng.randint(1, 10))
        expected_span, expected_votes, expected_tiebreak = oracle_vote(preds)
        result = tally(preds)
        assert result.span == expected_span
        assert result.votes == expected_votes
        assert result.tiebreak == expected_tiebreak
        shuffled = preds[:]
        rng.shuffle(shuffled)
        assert tally(shuffled).span == expected_span

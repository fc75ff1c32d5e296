import json
import random

import pytest

from dialdoc.errors import ContractViolation
from dialdoc.metrics import (
    BleuSignature,
    corpus_bleu,
    exact_match,
    mean_std,
    normalize,
    score_ki,
    tokenize_13a,
    unigram_f1,
)

from conftest import FIXTURES
from oracles import oracle_exact_match, oracle_normalize, oracle_unigram_f1

VOCAB = ["renew", "license", "online", "fee", "a", "an", "the", "No", "Yes", "office", "x1", "B2"]
PUNCT = ["", ",", ".", "!", "?", ":", ";"]


def random_text(rng, max_words=8):
    words = []
    for _ in range(rng.randint(0, max_words)):
        words.append(rng.choice(VOCAB) + rng.choice(PUNCT))
    return " ".join(words)


def test_normalize_examples():
    assert normalize("The Answer, yes.") == "answer yes"
    assert normalize("") == ""


def test_normalize_idempotent_on_random_strings():
    rng = random.Random(11)
    for _ in range(1000):
        text = random_text(rng)
        once = normalize(text)
        assert normalize(once) == once


def test_exact_match_examples():
    assert exact_match("Yes, you can.", ["yes you can"]) == 1
    assert exact_match("you can", ["yes you can"]) == 0


def test_exact_match_empty_golds_rejected():
    with pytest.raises(ContractViolation):
        exact_match("anything", [])
    with pytest.raises(ContractViolation):
        unigram_f1("anything", [])


def test_exact_match_against_independent_oracle():
    rng = random.Random(7)
    for _ in range(500):
        pred = random_text(rng)
        golds = [random_text(rng) for _ in range(rng.randint(1, 3))]
        assert exact_match(pred, golds) == oracle_exact_match(pred, golds)


def test_unigram_f1_hand_arithmetic():
    assert unigram_f1("x1 B2 office", ["B2 office renew"]) == pytest.approx(2 / 3)
    assert unigram_f1("same words here", ["same words here"]) == 1.0


def test_unigram_f1_empty_conventions():
    assert unigram_f1("", [""]) == 1.0
    assert unigram_f1("word", [""]) == 0.0
    assert unigram_f1("", ["word"]) == 0.0


def test_unigram_f1_against_brute_force_oracle():
    rng = random.Random(13)
    for _ in range(500):
        pred = random_text(rng)
        golds = [random_text(rng) for _ in range(rng.randint(1, 3))]
        assert unigram_f1(pred, golds) == pytest.approx(oracle_unigram_f1(pred, golds))


def test_unigram_f1_symmetric_for_single_gold():
    rng = random.Random(17)
    for _ in range(200):
        a, b = random_text(rng), random_text(rng)
        assert unigram_f1(a, [b]) == pytest.approx(unigram_f1(b, [a]))


def test_exact_match_implies_f1_one():
    rng = random.Random(19)
    for _ in range(300):
        pred = random_text(rng)
        gold = random_text(rng) if rng.random() < 0.5 else pred
        if exact_match(pred, [gold]) == 1:
            assert unigram_f1(pred, [gold]) == 1.0


def test_score_ki_report_invariant():
    rng = random.Random(23)
    preds = {}
    golds = {}
    for i in range(50):
        preds[str(i)] = random_text(rng)
        golds[str(i)] = [random_text(rng)]
    report = score_ki(preds, golds)
    assert 0 <= report.exact_match <= report.f1 <= 100
    assert report.n_examples == 50
    row = report.to_row()
    assert row["exact_match"] == round(report.exact_match, 2)


def test_mean_std():
    mean, std = mean_std([59.37, 61.26, 57.48])
    assert mean == pytest.approx(59.37, abs=1e-9)
    assert std > 0
    with pytest.raises(ContractViolation):
        mean_std([])


# ---------------------------------------------------------------------------
# BLEU


def test_tokenize_13a_splits_punctuation_but_not_numbers():
    assert tokenize_13a("Costs 3.50 today.") == ["Costs", "3.50", "today", "."]
    assert tokenize_13a("Hello, world!") == ["Hello", ",", "world", "!"]


def test_bleu_perfect_match_scores_100():
    sents = ["The fee is twenty dollars.", "Renew online today.", "Yes, you can."]
    assert corpus_bleu(sents, list(sents)).score == pytest.approx(100.0)


def test_bleu_zero_fourgram_overlap_is_smoothed_not_zero():
    hyps = ["renew the card online now", "that office opens early today"]
    refs = ["please mail every form soon", "the service desk closes late"]
    score = corpus_bleu(hyps, refs).score
    assert 0 < score < 5


def test_bleu_matches_pinned_reference_fixture():
    with open(FIXTURES / "bleu" / "fixture.json", encoding="utf-8") as f:
        fx = json.load(f)
    result = corpus_bleu(fx["hypotheses"], fx["references"])
    assert result.score == pytest.approx(fx["expected_bleu"], abs=1e-4)
    assert result.signature == fx["signature"]


def test_bleu_permutation_invariance():
    with open(FIXTURES / "bleu" / "fixture.json", encoding="utf-8") as f:
        fx = json.load(f)
    pairs = list(zip(fx["hypotheses"], fx["references"]))
    base = corpus_bleu([h for h, _ in pairs], [r for _, r in pairs]).score
    rng = random.Random(3)
    for _ in range(5):
        rng.shuffle(pairs)
        shuffled = corpus_bleu([h for h, _ in pairs], [r for _, r in pairs]).score
        assert shuffled == pytest.approx(base, abs=1e-12)


def test_bleu_truncation_never_improves_fixture_score():
    with open(FIXTURES / "bleu" / "fixture.json", encoding="utf-8") as f:
        fx = json.load(f)
    base = corpus_bleu(fx["hypotheses"], fx["references"]).score
    truncated = [h.split()[0] for h in fx["hypotheses"]]
    assert corpus_bleu(truncated, fx["references"]).score <= base


def test_bleu_contract_violations():
    with pytest.raises(ContractViolation):
        corpus_bleu(["a"], ["a", "b"])
    with pytest.raises(ContractViolation):
        corpus_bleu([], [])
    with pytest.raises(ContractViolation):
        BleuSignature(tokenizer="intl")

import random
import string

import pytest

from dialdoc.errors import ConfigurationError, ContractViolation
from dialdoc.windows import (
    Token,
    WindowedFeature,
    feature_from_row,
    feature_to_row,
    locate_gold,
    make_windows,
    tokenize,
    validate_external_tokens,
)

from oracles import oracle_locate_gold, oracle_window_starts


def test_tokenize_class_boundaries():
    tokens = tokenize("Yes, renew it.")
    assert [(t.text, t.char_start, t.char_end) for t in tokens] == [
        ("Yes", 0, 3),
        (",", 3, 4),
        ("renew", 5, 10),
        ("it", 11, 13),
        (".", 13, 14),
    ]


def test_tokenize_empty():
    assert tokenize("") == []


def test_tokenize_mixed_classes():
    assert [t.text for t in tokenize("ab12cd")] == ["ab", "12", "cd"]
    assert [t.text for t in tokenize("x...y")] == ["x", "...", "y"]


def test_tokenize_roundtrip_on_random_ascii():
    rng = random.Random(31)
    alphabet = string.ascii_letters + string.digits + string.punctuation + "  \t\n"
    for _ in range(1000):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 60)))
        tokens = tokenize(text)
        cursor = 0
        for tok in tokens:
            assert text[tok.char_start : tok.char_end] == tok.text
            assert text[cursor : tok.char_start].isspace() or cursor == tok.char_start
            cursor = tok.char_end
        assert text[cursor:].isspace() or cursor == len(text)


def _tokens(n):
    # one-char tokens separated by single spaces: token i covers [2i, 2i+1)
    return [Token("x", 2 * i, 2 * i + 1) for i in range(n)]


def test_make_windows_stride_arithmetic():
    features = make_windows(query_token_count=408, context=_tokens(300), stride=128)
    # capacity = 512 - 408 - 4 = 100
    assert [(f.context_first, f.context_last) for f in features] == [
        (0, 100),
        (128, 228),
        (256, 300),
    ]
    assert [f.window_index for f in features] == [0, 1, 2]


def test_make_windows_single_window():
    features = make_windows(query_token_count=408, context=_tokens(50))
    assert [(f.context_first, f.context_last) for f in features] == [(0, 50)]


def test_make_windows_capacity_error():
    with pytest.raises(ConfigurationError, match="query too long"):
        make_windows(query_token_count=512, context=_tokens(10))


def test_make_windows_stride_contract():
    with pytest.raises(ContractViolation):
        make_windows(query_token_count=1, context=_tokens(5), stride=0)


def test_make_windows_coverage_random():
    rng = random.Random(37)
    for _ in range(300):
        n = rng.randint(0, 2000)
        capacity = rng.randint(1, 512)
        stride = rng.randint(1, capacity)
        features = make_windows(
            query_token_count=0,
            context=_tokens(n),
            max_input_length=capacity + 4,
            stride=stride,
        )
        starts = [f.context_first for f in features]
        assert starts == oracle_window_starts(n, capacity, stride)
        for a, b in zip(starts, starts[1:]):
            assert b - a == stride
        covered = set()
        for f in features:
            covered.update(range(f.context_first, f.context_last))
        assert covered == set(range(n))
        for f in features:
            assert f.token_count <= capacity


def test_window_tokens_slice():
    context = _tokens(10)
    features = make_windows(query_token_count=0, context=context, max_input_length=8, stride=3)
    for f in features:
        assert f.tokens == context[f.context_first : f.context_last]


def test_locate_gold_exact_token():
    context = tokenize("alpha beta gamma")
    window = WindowedFeature("e", 0, 0, 0, 3, tokens=context)
    beta = context[1]
    assert locate_gold((beta.char_start, beta.char_end), window, context) == (1, 1)


def test_locate_gold_straddling_boundary_is_null():
    context = _tokens(10)
    left = WindowedFeature("e", 0, 0, 0, 5, tokens=context[0:5])
    right = WindowedFeature("e", 1, 0, 4, 9, tokens=context[4:9])
    gold = (context[3].char_start, context[6].char_end)  # spans tokens 3..6
    assert locate_gold(gold, left, context) is None
    assert locate_gold(gold, right, context) is None
    containing = WindowedFeature("e", 2, 0, 2, 8, tokens=context[2:8])
    assert locate_gold(gold, containing, context) == (3, 6)


def test_locate_gold_against_exhaustive_oracle():
    rng = random.Random(41)
    words = ["re", "new", "fee", "id", "x", "offi", "ce"]
    for _ in range(500):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 30)))
        context = tokenize(text)
        first = rng.randint(0, max(0, len(context) - 1))
        last = rng.randint(first, len(context))
        window = WindowedFeature("e", 0, 0, first, last, tokens=context[first:last])
        g0 = rng.randint(0, max(0, len(text) - 1))
        g1 = rng.randint(g0 + 1, len(text))
        assert locate_gold((g0, g1), window, context) == oracle_locate_gold(
            (g0, g1), first, last, context
        )


def test_gold_span_mapping_in_make_windows():
    text = "alpha beta gamma delta epsilon zeta eta theta"
    context = tokenize(text)
    gold = (context[2].char_start, context[3].char_end)
    features = make_windows(
        query_token_count=0, context=context, max_input_length=8, stride=2, gold_span=gold
    )
    for f in features:
        expected = None
        if f.context_first <= 2 and 3 < f.context_last:
            expected = (2, 3)
        assert f.gold_token_span == expected


def test_token_span_to_chars_and_back_is_identity():
    rng = random.Random(43)
    words = ["alpha", "beta", "gamma", "delta", "x1", "y2"]
    for _ in range(200):
        text = " ".join(rng.choice(words) for _ in range(rng.randint(1, 20)))
        context = tokenize(text)
        i = rng.randrange(len(context))
        j = rng.randrange(i, len(context))
        chars = (context[i].char_start, context[j].char_end)
        window = WindowedFeature("e", 0, 0, 0, len(context), tokens=context)
        assert locate_gold(chars, window, context) == (i, j)


def test_feature_row_roundtrip():
    context = tokenize("alpha beta gamma")
    feature = make_windows(query_token_count=1, context=context, example_id="ex1")[0]
    feature.doc_id = "doc9"
    row = feature_to_row(feature)
    assert feature_from_row(row) == feature


def test_validate_external_tokens():
    text = "alpha beta"
    good = [Token("alpha", 0, 5), Token("beta", 6, 10)]
    validate_external_tokens("d", text, good)
    with pytest.raises(ContractViolation):
        validate_external_tokens("d", text, [Token("alpha", 0, 5), Token("beta", 6, 9)])
    with pytest.raises(ContractViolation):
        validate_external_tokens("d", text, [Token("beta", 6, 10), Token("alpha", 0, 5)])

"""Overlapping fixed-length windows over (query, document) pairs.

Token offsets are exact character intervals into the document, so any span of
window positions maps back to a document slice without re-tokenizing. Window k
always starts at token k*stride; full coverage of the context is guaranteed
whenever stride <= capacity.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ConfigurationError, ContractViolation

DEFAULT_MAX_INPUT_LENGTH = 512
DEFAULT_STRIDE = 128
DEFAULT_RESERVED_SLOTS = 4


@dataclass(frozen=True)
class Token:
    text: str
    char_start: int
    char_end: int


def _char_class(ch: str) -> str:
    if ch.isalpha():
        return "alpha"
    if ch.isdigit():
        return "digit"
    return "punct"


def tokenize(text: str) -> list[Token]:
    """Split at whitespace and at letter/digit/punctuation class boundaries."""
    tokens = []
    start = None
    cls = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                tokens.append(Token(text[start:i], start, i))
                start = None
            continue
        c = _char_class(ch)
        if start is None:
            start, cls = i, c
        elif c != cls:
            tokens.append(Token(text[start:i], start, i))
            start, cls = i, c
    if start is not None:
        tokens.append(Token(text[start:], start, len(text)))
    return tokens


@dataclass
class WindowedFeature:
    example_id: str
    window_index: int
    query_token_count: int
    context_first: int  # global context token index, inclusive
    context_last: int  # global context token index, exclusive
    gold_token_span: tuple[int, int] | None = None  # global token indices, inclusive pair
    tokens: list[Token] = field(default_factory=list)  # window slice of the context
    doc_id: str = ""  # lets downstream stages resolve the grounding document

    @property
    def token_count(self) -> int:
        return self.context_last - self.context_first


def locate_gold(
    gold: tuple[int, int], window: WindowedFeature, context: list[Token]
) -> tuple[int, int] | None:
    """Tightest token pair enclosing the gold character span, if the window holds both ends."""
    gold_start, gold_end = gold
    t_start = None
    for i, tok in enumerate(context):
        if tok.char_start <= gold_start:
            t_start = i
        else:
            break
    t_end = None
    for i, tok in enumerate(context):
        if tok.char_end >= gold_end:
            t_end = i
            break
    if t_start is None or t_end is None or t_start > t_end:
        return None
    if window.context_first <= t_start and t_end < window.context_last:
        return (t_start, t_end)
    return None


def make_windows(
    query_token_count: int,
    context: list[Token],
    max_input_length: int = DEFAULT_MAX_INPUT_LENGTH,
    stride: int = DEFAULT_STRIDE,
    reserved_slots: int = DEFAULT_RESERVED_SLOTS,
    gold_span: tuple[int, int] | None = None,
    example_id: str = "",
) -> list[WindowedFeature]:
    """Window the context at starts 0, stride, 2*stride, ... until the end is reached."""
    if stride < 1:
        raise ContractViolation(f"stride must be >= 1, got {stride}")
    capacity = max_input_length - query_token_count - reserved_slots
    if capacity < 1:
        raise ConfigurationError(
            f"query too long for window: {query_token_count} query tokens plus "
            f"{reserved_slots} reserved slots leave no room in {max_input_length}"
        )

    n = len(context)
    features = []
    k = 0
    while True:
        start = k * stride
        end = min(start + capacity, n)
        feature = WindowedFeature(
            example_id=example_id,
            window_index=k,
            query_token_count=query_token_count,
            context_first=start,
            context_last=end,
            tokens=context[start:end],
        )
        if gold_span is not None:
            feature.gold_token_span = locate_gold(gold_span, feature, context)
        features.append(feature)
        if start + capacity >= n:
            break
        k += 1
        if k * stride >= n:
            break  # stride > capacity leaves a tail gap; stop rather than emit empty windows
    return features


# ---------------------------------------------------------------------------
# Wire format


def token_to_row(tok: Token) -> dict:
    return {"text": tok.text, "char_start": tok.char_start, "char_end": tok.char_end}


def token_from_row(row: dict) -> Token:
    return Token(row["text"], row["char_start"], row["char_end"])


def feature_to_row(feature: WindowedFeature) -> dict:
    return {
        "example_id": feature.example_id,
        "doc_id": feature.doc_id,
        "window_index": feature.window_index,
        "query_token_count": feature.query_token_count,
        "context_first": feature.context_first,
        "context_last": feature.context_last,
        "tokens": [token_to_row(t) for t in feature.tokens],
        "gold_token_span": list(feature.gold_token_span) if feature.gold_token_span else None,
    }


def feature_from_row(row: dict) -> WindowedFeature:
    gold = row.get("gold_token_span")
    return WindowedFeature(
        example_id=row["example_id"],
        window_index=row["window_index"],
        query_token_count=row["query_token_count"],
        context_first=row["context_first"],
        context_last=row["context_last"],
        gold_token_span=tuple(gold) if gold else None,
        tokens=[token_from_row(t) for t in row["tokens"]],
        doc_id=row.get("doc_id", ""),
    )


def validate_external_tokens(doc_id: str, full_text: str, tokens: list[Token]):
    """External offsets must be sorted, non-overlapping, and match the text."""
    prev_end = -1
    for tok in tokens:
        if not (0 <= tok.char_start < tok.char_end <= len(full_text)):
            raise ContractViolation(
                f"offsets for doc {doc_id}: token [{tok.char_start},{tok.char_end}) out of bounds"
            )
        if tok.char_start < prev_end:
            raise ContractViolation(f"offsets for doc {doc_id}: tokens overlap or are unsorted")
        if full_text[tok.char_start : tok.char_end] != tok.text:
            raise ContractViolation(
                f"offsets for doc {doc_id}: token text {tok.text!r} does not match document slice"
            )
        prev_end = tok.char_end

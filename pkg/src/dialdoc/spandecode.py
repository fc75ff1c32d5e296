"""N-best span decoding from per-window scores, plus span post-processors.

Post-processing order is fixed: split extension first, then the yes/no
extension, because absorbing a whole document split can expose a yes/no
marker sitting just before it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractViolation
from .records import DocumentSplit
from .windows import WindowedFeature

DEFAULT_LAMBDA = 0.1
DEFAULT_MAX_ANSWER_TOKENS = 50
DEFAULT_NBEST = 20

_YES_NO = ("yes", "no")
_PUNCT_BRIDGE = ",.:"


@dataclass(frozen=True)
class WindowScores:
    example_id: str
    window_index: int
    start_scores: list[float]
    end_scores: list[float]


@dataclass(frozen=True)
class SpanCandidate:
    char_start: int
    char_end: int
    score: float


@dataclass
class PostProcConfig:
    lambda_coverage: float = DEFAULT_LAMBDA
    max_answer_tokens: int = DEFAULT_MAX_ANSWER_TOKENS
    nbest: int = DEFAULT_NBEST
    yes_no_extension: bool = True

    def validate(self):
        if not 0 < self.lambda_coverage <= 1:
            raise ContractViolation(f"lambda_coverage must be in (0,1], got {self.lambda_coverage}")
        if self.max_answer_tokens < 1:
            raise ContractViolation(f"max_answer_tokens must be positive, got {self.max_answer_tokens}")
        if self.nbest < 1:
            raise ContractViolation(f"nbest must be positive, got {self.nbest}")


def decode_example(
    windows: list[tuple[WindowedFeature, WindowScores]],
    config: PostProcConfig,
) -> list[SpanCandidate]:
    """Rank all admissible (start, end) token pairs across the example's windows.

    A pair is admissible when end >= start and the span is at most
    max_answer_tokens long. Duplicate character spans from overlapping windows
    keep their best score. Ties break toward smaller char_start, then char_end.
    """
    config.validate()
    best: dict[tuple[int, int], float] = {}
    for feature, scores in windows:
        count = feature.token_count
        if len(scores.start_scores) != count or len(scores.end_scores) != count:
            raise ContractViolation(
                f"score length mismatch for example {feature.example_id} "
                f"window {feature.window_index}: window has {count} tokens, "
                f"scores have {len(scores.start_scores)}/{len(scores.end_scores)}"
            )
        tokens = feature.tokens
        for s in range(count):
            start_score = scores.start_scores[s]
            last = min(s + config.max_answer_tokens, count)
            for e in range(s, last):
                span = (tokens[s].char_start, tokens[e].char_end)
                score = start_score + scores.end_scores[e]
                prev = best.get(span)
                if prev is None or score > prev:
                    best[span] = score
    ranked = sorted(best.items(), key=lambda kv: (-kv[1], kv[0][0], kv[0][1]))
    return [SpanCandidate(span[0], span[1], score) for span, score in ranked[: config.nbest]]


def extend_by_splits(
    span: SpanCandidate, splits: list[DocumentSplit], lambda_coverage: float
) -> SpanCandidate:
    """Absorb every split the span covers at least lambda of, in characters.

    The threshold is inclusive and evaluated exactly (the decimal value of
    lambda_coverage, not its float approximation), so a 15-character overlap
    qualifies a 100-character split at lambda 0.1 and 9 does not.
    """
    lam = Fraction(str(lambda_coverage))
    new_start, new_end = span.char_start, span.char_end
    extended = False
    for s in splits:
        overlap = min(span.char_end, s.char_end) - max(span.char_start, s.char_start)
        if overlap <= 0:
            continue
        if Fraction(overlap) >= lam * (s.char_end - s.char_start):
            extended = True
            new_start = min(new_start, s.char_start)
            new_end = max(new_end, s.char_end)
    if not extended:
        return span
    return SpanCandidate(new_start, new_end, span.score)


def _leading_word(text: str, pos: int) -> str:
    end = pos
    while end < len(text) and text[end].isalpha():
        end += 1
    return text[pos:end].lower()


def extend_yes_no(span: SpanCandidate, document_text: str) -> SpanCandidate:
    """Pull a "Yes"/"No" sitting just before the span into it.

    The gap may contain whitespace and at most one of "," "." ":". The marker
    must be a whole word, and a span already led by yes/no is left alone so
    repeated application cannot crawl across stacked markers.
    """
    if _leading_word(document_text, span.char_start) in _YES_NO:
        return span

    i = span.char_start - 1
    punct_budget = 1
    while i >= 0:
        ch = document_text[i]
        if ch.isspace():
            i -= 1
        elif ch in _PUNCT_BRIDGE and punct_budget > 0:
            punct_budget -= 1
            i -= 1
        else:
            break
    if i < 0 or not document_text[i].isalpha():
        return span
    word_end = i + 1
    if word_end < len(document_text) and document_text[word_end].isalpha():
        # letters continue past the candidate word: a mid-word span start, not a marker
        return span
    j = i
    while j >= 0 and document_text[j].isalpha():
        j -= 1
    word_start = j + 1
    if document_text[word_start:word_end].lower() in _YES_NO:
        return SpanCandidate(word_start, span.char_end, span.score)
    return span


# ---------------------------------------------------------------------------
# Wire format


def scores_to_row(ws: WindowScores) -> dict:
    return {
        "example_id": ws.example_id,
        "window_index": ws.window_index,
        "start_scores": ws.start_scores,
        "end_scores": ws.end_scores,
    }


def scores_from_row(row: dict, *, file=None, record=None) -> WindowScores:
    try:
        ws = WindowScores(
            example_id=row["example_id"],
            window_index=row["window_index"],
            start_scores=[float(x) for x in row["start_scores"]],
            end_scores=[float(x) for x in row["end_scores"]],
        )
    except KeyError as exc:
        raise ContractViolation(
            f"scores row missing field {exc.args[0]!r} (file={file}, record={record})"
        ) from exc
    for x in ws.start_scores + ws.end_scores:
        if x != x or x in (float("inf"), float("-inf")):
            raise ContractViolation(
                f"non-finite score for example {ws.example_id} window {ws.window_index}"
            )
    return ws

"""Scoring for both subtasks.

Span identification is scored with SQuAD-convention Exact Match and uni-gram
F1 (lowercase, strip punctuation, drop articles, collapse whitespace, then
compare token multisets). Generation is scored with corpus BLEU-4 over 13a
tokenization, mixed case, a single reference, exponential smoothing of zero
n-gram counts, and the standard brevity penalty; the parameter set is frozen
in a signature string carried by every report.
"""

from __future__ import annotations

import math
import re
import string
from collections import Counter
from dataclasses import dataclass

from .errors import ContractViolation

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b")
_PUNCT_SET = set(string.punctuation)


def normalize(text: str) -> str:
    """Lowercase, strip punctuation, drop articles, collapse whitespace."""
    text = text.lower()
    text = "".join(ch for ch in text if ch not in _PUNCT_SET)
    text = _ARTICLE_RE.sub(" ", text)
    return " ".join(text.split())


def exact_match(prediction: str, golds: list[str]) -> int:
    if not golds:
        raise ContractViolation("exact_match needs at least one gold string")
    pred = normalize(prediction)
    return int(any(pred == normalize(g) for g in golds))


def _f1_single(prediction: str, gold: str) -> float:
    pred_tokens = normalize(prediction).split()
    gold_tokens = normalize(gold).split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    common = Counter(pred_tokens) & Counter(gold_tokens)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_tokens)
    recall = num_same / len(gold_tokens)
    return 2 * precision * recall / (precision + recall)


def unigram_f1(prediction: str, golds: list[str]) -> float:
    if not golds:
        raise ContractViolation("unigram_f1 needs at least one gold string")
    return max(_f1_single(prediction, g) for g in golds)


@dataclass
class KIScoreReport:
    exact_match: float  # percentage
    f1: float  # percentage
    n_examples: int

    def to_row(self) -> dict:
        return {
            "exact_match": round(self.exact_match, 2),
            "f1": round(self.f1, 2),
            "n_examples": self.n_examples,
        }


def score_ki(predictions: dict[str, str], golds: dict[str, list[str]]) -> KIScoreReport:
    """Corpus EM/F1 over gold example ids; a missing prediction scores 0."""
    if not golds:
        raise ContractViolation("score_ki needs at least one gold example")
    em_total = 0.0
    f1_total = 0.0
    for example_id in golds:
        pred = predictions.get(example_id)
        if pred is None:
            continue
        em_total += exact_match(pred, golds[example_id])
        f1_total += unigram_f1(pred, golds[example_id])
    n = len(golds)
    return KIScoreReport(exact_match=100.0 * em_total / n, f1=100.0 * f1_total / n, n_examples=n)


def mean_std(values: list[float]) -> tuple[float, float]:
    """Mean and population standard deviation, for multi-seed report rows."""
    if not values:
        raise ContractViolation("mean_std needs at least one value")
    mean = sum(values) / len(values)
    var = sum((v - mean) ** 2 for v in values) / len(values)
    return mean, math.sqrt(var)


# ---------------------------------------------------------------------------
# Corpus BLEU

BLEU_NGRAM_ORDER = 4
_LOG_FLOOR = -9999999999


@dataclass(frozen=True)
class BleuSignature:
    ngram_order: int = 4
    tokenizer: str = "13a"
    case_handling: str = "mixed"
    smoothing: str = "exponential"
    reference_count: int = 1

    def __post_init__(self):
        if (
            self.ngram_order != 4
            or self.tokenizer != "13a"
            or self.case_handling != "mixed"
            or self.smoothing != "exponential"
            or self.reference_count != 1
        ):
            raise ContractViolation(f"unsupported BLEU parameters: {self}")

    def render(self) -> str:
        smooth = "exp" if self.smoothing == "exponential" else self.smoothing
        return (
            f"nrefs:{self.reference_count}|case:{self.case_handling}|eff:no"
            f"|tok:{self.tokenizer}|smooth:{smooth}|ngram:{self.ngram_order}"
        )


def tokenize_13a(line: str) -> list[str]:
    """Minimal WMT-style tokenization: split out punctuation except inside numbers."""
    norm = line
    norm = norm.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")

    norm = f" {norm} "
    norm = re.sub(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])", r" \1 ", norm)
    norm = re.sub(r"([^0-9])([\.,])", r"\1 \2 ", norm)
    norm = re.sub(r"([\.,])([^0-9])", r" \1 \2", norm)
    norm = re.sub(r"([0-9])(-)", r"\1 \2 ", norm)
    return norm.split()


def _ngram_counts(tokens: list[str], max_order: int) -> Counter:
    counts = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


@dataclass
class BleuScore:
    score: float
    signature: str
    precisions: list[float]
    brevity_penalty: float
    sys_len: int
    ref_len: int


def corpus_bleu(
    hypotheses: list[str],
    references: list[str],
    signature: BleuSignature = BleuSignature(),
) -> BleuScore:
    """Corpus BLEU-4 with the parameters frozen in `signature`.

    Mirrors the reference scorer named in the signature: n-gram counts are
    clipped per sentence against the single reference and pooled over the
    corpus; an order with zero matches gets the exponentially decaying
    smoothed precision 1/(2^k * total); the brevity penalty uses
    corpus-level lengths.
    """
    if len(hypotheses) != len(references):
        raise ContractViolation(
            f"hypothesis/reference length mismatch: {len(hypotheses)} vs {len(references)}"
        )
    if not hypotheses:
        raise ContractViolation("corpus_bleu needs at least one sentence pair")

    order = signature.ngram_order
    correct = [0] * order
    total = [0] * order
    sys_len = 0
    ref_len = 0

    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = tokenize_13a(hyp)
        ref_tokens = tokenize_13a(ref)
        sys_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        hyp_ngrams = _ngram_counts(hyp_tokens, order)
        ref_ngrams = _ngram_counts(ref_tokens, order)
        for ngram, count in hyp_ngrams.items():
            n = len(ngram)
            total[n - 1] += count
            correct[n - 1] += min(count, ref_ngrams.get(ngram, 0))

    precisions = [0.0] * order
    smooth_scale = 1.0
    for n in range(1, order + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smooth_scale *= 2
            precisions[n - 1] = 100.0 / (smooth_scale * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    brevity_penalty = 1.0
    if sys_len < ref_len:
        brevity_penalty = math.exp(1 - ref_len / sys_len) if sys_len > 0 else 0.0

    log_sum = sum(math.log(p) if p > 0.0 else _LOG_FLOOR for p in precisions)
    score = brevity_penalty * math.exp(log_sum / order)

    return BleuScore(
        score=score,
        signature=signature.render(),
        precisions=precisions,
        brevity_penalty=brevity_penalty,
        sys_len=sys_len,
        ref_len=ref_len,
    )

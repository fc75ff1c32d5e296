"""Majority voting over per-checkpoint top-1 span predictions.

A prediction unit is the (char_start, char_end) pair. Frequency decides;
ties fall to the larger exact sum of voter scores, then to the smaller
char_start, then smaller char_end, so the result is independent of input
order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ContractViolation


@dataclass(frozen=True)
class CheckpointPrediction:
    checkpoint_id: str
    example_id: str
    span: tuple[int, int]
    score: float


@dataclass
class VoteResult:
    span: tuple[int, int]
    votes: int
    tiebreak: str  # "none" | "score" | "position"


def tally(predictions: list[CheckpointPrediction]) -> VoteResult:
    if not predictions:
        raise ContractViolation("vote needs at least one prediction")
    example_id = predictions[0].example_id
    seen = set()
    for p in predictions:
        if p.example_id != example_id:
            raise ContractViolation(
                f"vote got mixed example ids: {example_id!r} and {p.example_id!r}"
            )
        if p.checkpoint_id in seen:
            raise ContractViolation(
                f"duplicate checkpoint {p.checkpoint_id!r} for example {example_id!r}"
            )
        seen.add(p.checkpoint_id)

    groups: dict[tuple[int, int], list[float]] = {}
    for p in predictions:
        groups.setdefault(p.span, []).append(p.score)

    max_votes = max(len(v) for v in groups.values())
    leaders = [span for span, scores in groups.items() if len(scores) == max_votes]
    if len(leaders) == 1:
        return VoteResult(leaders[0], max_votes, "none")

    # math.fsum is exactly rounded, so the sum is permutation invariant
    sums = {span: math.fsum(groups[span]) for span in leaders}
    best_sum = max(sums.values())
    leaders = [span for span in leaders if sums[span] == best_sum]
    if len(leaders) == 1:
        return VoteResult(leaders[0], max_votes, "score")

    return VoteResult(min(leaders), max_votes, "position")


def vote(predictions: list[CheckpointPrediction]) -> tuple[int, int]:
    return tally(predictions).span

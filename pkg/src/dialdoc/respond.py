"""Generator input assembly and the length-ratio response post-processor.

Inputs are a knowledge block followed by the dialogue context, with literal
"<knowledge>"/"<user>"/"<agent>" markers; a downstream adapter may map the
markers to model-specific special tokens. The post-processor falls back to
the raw knowledge evidence whenever the generated response is at most alpha
times its length.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import ContractViolation
from .records import RGExample

KNOWLEDGE_MARKER = "<knowledge>"
DEFAULT_ALPHA = 0.4


@dataclass
class GeneratorInput:
    example_id: str
    knowledge: str
    context_block: str
    mode: str  # "gold" | "pred"

    @property
    def input_text(self) -> str:
        return f"{KNOWLEDGE_MARKER}{self.knowledge}{self.context_block}"


@dataclass
class RespFixConfig:
    alpha: float = DEFAULT_ALPHA
    length_unit: str = "tokens"  # "tokens" | "chars"

    def validate(self):
        if not 0 < self.alpha <= 1:
            raise ContractViolation(f"alpha must be in (0,1], got {self.alpha}")
        if self.length_unit not in ("tokens", "chars"):
            raise ContractViolation(f"unknown length unit {self.length_unit!r}")


def assemble_generator_input(
    example: RGExample,
    knowledge: str,
    max_history_turns: int | None = None,
    mode: str = "gold",
) -> GeneratorInput:
    """Knowledge block plus the last max_history_turns turns in time order.

    max_history_turns None (or 0) keeps the whole history. No truncation is
    done here; the adapter owns the generator's input length limit.
    """
    if mode not in ("gold", "pred"):
        raise ContractViolation(f"unknown mode {mode!r}")
    if not example.history:
        raise ContractViolation(f"example {example.example_id} has empty history")
    if mode == "pred" and not knowledge:
        raise ContractViolation(f"example {example.example_id}: prediction-mode knowledge empty")
    if mode == "gold" and knowledge != example.knowledge:
        raise ContractViolation(
            f"example {example.example_id}: gold-mode knowledge differs from the example's"
        )
    turns = example.history
    if max_history_turns:
        turns = turns[-max_history_turns:]
    context_block = "".join(f"<{t.role}>{t.utterance}" for t in turns)
    return GeneratorInput(
        example_id=example.example_id,
        knowledge=knowledge,
        context_block=context_block,
        mode=mode,
    )


def _length(text: str, unit: str) -> int:
    if unit == "tokens":
        return len(text.split())
    return len(text)


def should_replace(response: str, knowledge: str, config: RespFixConfig) -> bool:
    """True iff L_resp <= alpha * L_kn, evaluated exactly at the boundary."""
    config.validate()
    if not knowledge:
        raise ContractViolation("respfix needs non-empty knowledge")
    l_resp = _length(response, config.length_unit)
    l_kn = _length(knowledge, config.length_unit)
    return Fraction(l_resp) <= Fraction(str(config.alpha)) * l_kn


def respfix(response: str, knowledge: str, config: RespFixConfig | None = None) -> str:
    config = config or RespFixConfig()
    return knowledge if should_replace(response, knowledge, config) else response


def parse_input_text(input_text: str) -> tuple[str, str]:
    """Recover (knowledge, context_block) from an assembled input line."""
    if not input_text.startswith(KNOWLEDGE_MARKER):
        raise ContractViolation("input_text does not start with the knowledge marker")
    body = input_text[len(KNOWLEDGE_MARKER) :]
    first = len(body)
    for marker in ("<user>", "<agent>"):
        pos = body.find(marker)
        if pos != -1:
            first = min(first, pos)
    return body[:first], body[first:]

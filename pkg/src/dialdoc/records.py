"""Unified record types for both subtasks, plus the JSONL wire format.

All files are UTF-8, one JSON object per line, keys sorted lexicographically,
LF line endings. Character offsets count Unicode scalar values, not bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from .errors import ContractViolation, ParseError

KI_SOURCES = ("doc2dial", "coqa", "quac", "doqa")
RG_SOURCES = ("doc2dial", "wow")


def valid_ki_source(tag: str) -> bool:
    return tag in KI_SOURCES or tag.startswith("mrqa:")


@dataclass(frozen=True)
class DialogueTurn:
    turn_id: int
    role: str  # "user" | "agent"
    utterance: str

    def validate(self):
        if self.turn_id < 1:
            raise ContractViolation(f"turn_id must be positive, got {self.turn_id}")
        if self.role not in ("user", "agent"):
            raise ContractViolation(f"turn role must be user or agent, got {self.role!r}")
        if not self.utterance.strip():
            raise ContractViolation(f"turn {self.turn_id} utterance empty after trimming")


@dataclass(frozen=True)
class DocumentSplit:
    split_id: str
    char_start: int
    char_end: int


@dataclass
class GroundingDocument:
    doc_id: str
    domain: str
    full_text: str
    splits: list[DocumentSplit] = field(default_factory=list)

    def validate(self):
        n = len(self.full_text)
        prev_end = 0
        prev_start = -1
        for s in self.splits:
            if not (0 <= s.char_start < s.char_end <= n):
                raise ContractViolation(
                    f"split {s.split_id} of doc {self.doc_id} out of bounds: "
                    f"[{s.char_start},{s.char_end}) in text of length {n}"
                )
            if s.char_start < prev_start:
                raise ContractViolation(f"splits of doc {self.doc_id} not sorted by char_start")
            if s.char_start < prev_end:
                raise ContractViolation(
                    f"split {s.split_id} of doc {self.doc_id} overlaps its predecessor"
                )
            prev_start, prev_end = s.char_start, s.char_end

    def slice(self, char_start: int, char_end: int) -> str:
        return self.full_text[char_start:char_end]


@dataclass
class KIExample:
    example_id: str
    query: str
    doc_id: str
    gold_span: tuple[int, int] | None
    source: str

    def validate(self, document: GroundingDocument | None = None):
        if not valid_ki_source(self.source):
            raise ContractViolation(f"unknown ki source tag {self.source!r}")
        if self.gold_span is not None:
            s, e = self.gold_span
            if not 0 <= s < e:
                raise ContractViolation(f"example {self.example_id} gold_span [{s},{e}) invalid")
            if document is not None and e > len(document.full_text):
                raise ContractViolation(
                    f"example {self.example_id} gold_span end {e} beyond document "
                    f"{document.doc_id} length {len(document.full_text)}"
                )


@dataclass
class RGExample:
    example_id: str
    history: list[DialogueTurn]
    knowledge: str  # gold grounding span text, may be empty pre-inference
    gold_response: str | None
    source: str
    doc_id: str | None = None
    gold_span: tuple[int, int] | None = None

    def validate(self):
        if self.source not in RG_SOURCES:
            raise ContractViolation(f"unknown rg source tag {self.source!r}")
        if not self.history:
            raise ContractViolation(f"example {self.example_id} has empty history")
        if self.source == "doc2dial" and self.history[-1].role != "user":
            raise ContractViolation(
                f"example {self.example_id}: final history turn must be a user turn"
            )


@dataclass
class DatasetDescriptor:
    name: str
    file_paths: list[str]
    exclusions: set[str]
    record_count: int


# ---------------------------------------------------------------------------
# JSONL wire format


def dump_line(row: dict) -> str:
    return json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n"


def write_jsonl(path: str | Path, rows: Iterable[dict]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(dump_line(row))


def read_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, parsed object); blank lines are rejected."""
    with open(path, encoding="utf-8") as f:
        for i, line in enumerate(f, start=1):
            try:
                yield i, json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", file=str(path), record=i) from exc


def _span_row(span: tuple[int, int] | None):
    if span is None:
        return None
    return {"char_start": span[0], "char_end": span[1]}


def _span_from_row(obj) -> tuple[int, int] | None:
    if obj is None:
        return None
    return (obj["char_start"], obj["char_end"])


def ki_example_to_row(ex: KIExample) -> dict:
    return {
        "example_id": ex.example_id,
        "task": "ki",
        "query": ex.query,
        "doc_id": ex.doc_id,
        "gold_span": _span_row(ex.gold_span),
        "source": ex.source,
    }


def rg_example_to_row(ex: RGExample) -> dict:
    return {
        "example_id": ex.example_id,
        "task": "rg",
        "history": [
            {"turn_id": t.turn_id, "role": t.role, "utterance": t.utterance} for t in ex.history
        ],
        "doc_id": ex.doc_id,
        "gold_span": _span_row(ex.gold_span),
        "knowledge": ex.knowledge,
        "gold_response": ex.gold_response,
        "source": ex.source,
    }


def example_to_row(ex: KIExample | RGExample) -> dict:
    if isinstance(ex, KIExample):
        return ki_example_to_row(ex)
    return rg_example_to_row(ex)


def example_from_row(row: dict, *, file=None, record=None) -> KIExample | RGExample:
    try:
        task = row["task"]
        if task == "ki":
            return KIExample(
                example_id=row["example_id"],
                query=row["query"],
                doc_id=row["doc_id"],
                gold_span=_span_from_row(row["gold_span"]),
                source=row["source"],
            )
        if task == "rg":
            return RGExample(
                example_id=row["example_id"],
                history=[
                    DialogueTurn(t["turn_id"], t["role"], t["utterance"]) for t in row["history"]
                ],
                knowledge=row["knowledge"],
                gold_response=row["gold_response"],
                source=row["source"],
                doc_id=row.get("doc_id"),
                gold_span=_span_from_row(row.get("gold_span")),
            )
    except KeyError as exc:
        raise ParseError(
            f"missing field {exc.args[0]!r}", file=file, record=record, field=exc.args[0]
        ) from exc
    raise ParseError(f"unknown task {task!r}", file=file, record=record, field="task")


def document_to_row(doc: GroundingDocument) -> dict:
    return {
        "doc_id": doc.doc_id,
        "domain": doc.domain,
        "full_text": doc.full_text,
        "splits": [
            {"split_id": s.split_id, "char_start": s.char_start, "char_end": s.char_end}
            for s in doc.splits
        ],
    }


def document_from_row(row: dict, *, file=None, record=None) -> GroundingDocument:
    try:
        return GroundingDocument(
            doc_id=row["doc_id"],
            domain=row["domain"],
            full_text=row["full_text"],
            splits=[
                DocumentSplit(s["split_id"], s["char_start"], s["char_end"])
                for s in row["splits"]
            ],
        )
    except KeyError as exc:
        raise ParseError(
            f"missing field {exc.args[0]!r}", file=file, record=record, field=exc.args[0]
        ) from exc


def load_examples(path: str | Path) -> list[KIExample | RGExample]:
    return [example_from_row(row, file=path, record=i) for i, row in read_jsonl(path)]


def load_documents(path: str | Path) -> dict[str, GroundingDocument]:
    docs = {}
    for i, row in read_jsonl(path):
        doc = document_from_row(row, file=path, record=i)
        doc.validate()
        docs[doc.doc_id] = doc
    return docs

"""Ingestion of the dialogue and QA corpora into unified records.

Each flavor is parsed from its public release layout. Extractive flavors
yield one KIExample per question with the gold answer resolved to character
offsets in the untouched context text; dialogue flavors yield one example per
grounded agent/wizard turn. Records without a usable grounding are skipped
and counted, not errored.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    ContractViolation,
    OffsetMismatchError,
    ParseError,
    ReferentialIntegrityError,
    UsageError,
)
from .records import (
    DialogueTurn,
    DocumentSplit,
    GroundingDocument,
    KIExample,
    RGExample,
)

log = logging.getLogger(__name__)

DEFAULT_SEPARATOR = "<sep>"

MRQA_TRAIN_SUBSETS = {
    "SQuAD",
    "NewsQA",
    "TriviaQA",
    "SearchQA",
    "HotpotQA",
    "NaturalQuestions",
}

AUXILIARY_FLAVORS = ("mrqa", "coqa", "quac", "doqa", "wow")


@dataclass
class IngestStats:
    """Unification accounting: ingested + excluded + skipped = usable raw records."""

    ingested: int = 0
    excluded: int = 0
    skipped: int = 0
    skip_reasons: dict = field(default_factory=dict)

    def skip(self, reason: str):
        self.skipped += 1
        self.skip_reasons[reason] = self.skip_reasons.get(reason, 0) + 1


def build_ki_query(history: list[DialogueTurn], separator: str = DEFAULT_SEPARATOR) -> str:
    """All turns concatenated most-recent-first. Length control happens later."""
    if not history:
        raise ContractViolation("build_ki_query needs a non-empty history")
    return separator.join(t.utterance for t in reversed(history))


def mix(datasets: list[list], seed: int) -> list:
    """Seeded permutation of the concatenation; every sample kept, equal weight."""
    kinds = {_example_kind(ex) for ds in datasets for ex in ds}
    if len(kinds) > 1:
        raise ContractViolation(f"mix got mixed example kinds: {sorted(kinds)}")
    merged = [ex for ds in datasets for ex in ds]
    rng = random.Random(seed)
    rng.shuffle(merged)
    return merged


def _example_kind(ex) -> str:
    if isinstance(ex, KIExample):
        return "ki"
    if isinstance(ex, RGExample):
        return "rg"
    if isinstance(ex, dict) and "task" in ex:
        return ex["task"]
    raise ContractViolation(f"cannot mix object of type {type(ex).__name__}")


def _load_json(path: str | Path):
    path = Path(path)
    if not path.exists():
        raise ParseError("input file not found", file=str(path))
    with open(path, encoding="utf-8") as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}", file=str(path)) from exc


def _require(obj: dict, key: str, *, file, record=None):
    if key not in obj:
        raise ParseError("missing field", file=file, record=record, field=key)
    return obj[key]


def _norm_ws(text: str) -> str:
    return " ".join(text.split())


def _check_offsets(context: str, start: int, end: int, answer: str, example_id: str):
    if not (0 <= start < end <= len(context)):
        raise OffsetMismatchError(
            f"example {example_id}: answer offsets [{start},{end}) out of bounds",
            example_id=example_id,
        )
    if _norm_ws(context[start:end]) != _norm_ws(answer):
        raise OffsetMismatchError(
            f"example {example_id}: answer text not found at stated offset: "
            f"{context[start:end]!r} != {answer!r}",
            example_id=example_id,
        )


# ---------------------------------------------------------------------------
# Doc2Dial


def _parse_doc2dial_documents(document_file) -> dict[str, GroundingDocument]:
    raw = _load_json(document_file)
    doc_data = _require(raw, "doc_data", file=document_file)
    documents = {}
    for domain, docs in doc_data.items():
        for doc_id, doc in docs.items():
            text = _require(doc, "doc_text", file=document_file, record=doc_id)
            spans = _require(doc, "spans", file=document_file, record=doc_id)
            splits = sorted(
                (
                    DocumentSplit(
                        split_id=str(sp.get("id_sp", sp_key)),
                        char_start=_require(sp, "start_sp", file=document_file, record=doc_id),
                        char_end=_require(sp, "end_sp", file=document_file, record=doc_id),
                    )
                    for sp_key, sp in spans.items()
                ),
                key=lambda s: s.char_start,
            )
            document = GroundingDocument(
                doc_id=doc_id, domain=domain, full_text=text, splits=splits
            )
            document.validate()
            documents[doc_id] = document
    return documents


def _doc2dial_turns(dialogue: dict, *, file, dial_id: str) -> list[tuple[DialogueTurn, list]]:
    turns = []
    last_turn_id = 0
    for idx, raw_turn in enumerate(_require(dialogue, "turns", file=file, record=dial_id)):
        turn = DialogueTurn(
            turn_id=_require(raw_turn, "turn_id", file=file, record=f"{dial_id}#{idx}"),
            role=_require(raw_turn, "role", file=file, record=f"{dial_id}#{idx}"),
            utterance=_require(raw_turn, "utterance", file=file, record=f"{dial_id}#{idx}"),
        )
        turn.validate()
        if turn.turn_id <= last_turn_id:
            raise ParseError(
                f"turn_id {turn.turn_id} not increasing", file=file, record=f"{dial_id}#{idx}"
            )
        last_turn_id = turn.turn_id
        turns.append((turn, raw_turn.get("references", [])))
    return turns


def _grounding_interval(
    references: list, document: GroundingDocument, *, example_id: str
) -> tuple[int, int] | None:
    split_map = {s.split_id: s for s in document.splits}
    starts, ends = [], []
    for ref in references:
        sp_id = str(ref["sp_id"]) if isinstance(ref, dict) else str(ref)
        split = split_map.get(sp_id)
        if split is None:
            raise ReferentialIntegrityError(
                f"example {example_id} references unknown split {sp_id!r} "
                f"in doc {document.doc_id!r}",
                missing_id=sp_id,
            )
        starts.append(split.char_start)
        ends.append(split.char_end)
    if not starts:
        return None
    return (min(starts), max(ends))


def ingest_doc2dial(
    dialogue_file,
    document_file,
    task: str,
    separator: str = DEFAULT_SEPARATOR,
    stats: IngestStats | None = None,
) -> tuple[list[KIExample] | list[RGExample], list[GroundingDocument]]:
    """One example per grounded agent turn; ungrounded agent turns are skipped."""
    if task not in ("ki", "rg"):
        raise UsageError(f"task must be ki or rg, got {task!r}")
    stats = stats if stats is not None else IngestStats()
    documents = _parse_doc2dial_documents(document_file)
    raw = _load_json(dialogue_file)
    dial_data = _require(raw, "dial_data", file=dialogue_file)

    examples = []
    for domain, by_doc in dial_data.items():
        for doc_id, dialogues in by_doc.items():
            for dialogue in dialogues:
                dial_id = _require(dialogue, "dial_id", file=dialogue_file)
                ref_doc_id = dialogue.get("doc_id", doc_id)
                document = documents.get(ref_doc_id)
                if document is None:
                    raise ReferentialIntegrityError(
                        f"dialogue {dial_id!r} references unknown doc_id {ref_doc_id!r}",
                        missing_id=ref_doc_id,
                    )
                turns = _doc2dial_turns(dialogue, file=dialogue_file, dial_id=dial_id)
                history: list[DialogueTurn] = []
                for turn, references in turns:
                    if turn.role == "agent":
                        example_id = f"{dial_id}_{turn.turn_id}"
                        gold = _grounding_interval(references, document, example_id=example_id)
                        if gold is None:
                            stats.skip("ungrounded agent turn")
                        elif not history:
                            stats.skip("agent turn without history")
                        else:
                            if task == "ki":
                                ex = KIExample(
                                    example_id=example_id,
                                    query=build_ki_query(history, separator),
                                    doc_id=document.doc_id,
                                    gold_span=gold,
                                    source="doc2dial",
                                )
                                ex.validate(document)
                            else:
                                ex = RGExample(
                                    example_id=example_id,
                                    history=list(history),
                                    knowledge=document.slice(*gold),
                                    gold_response=turn.utterance,
                                    source="doc2dial",
                                    doc_id=document.doc_id,
                                    gold_span=gold,
                                )
                                ex.validate()
                            examples.append(ex)
                            stats.ingested += 1
                    history.append(turn)

    if stats.skipped:
        log.info("doc2dial %s: skipped %d turns (%s)", task, stats.skipped, stats.skip_reasons)
    examples.sort(key=lambda e: e.example_id)
    return examples, sorted(documents.values(), key=lambda d: d.doc_id)


# ---------------------------------------------------------------------------
# Auxiliary corpora


def ingest_auxiliary(
    file,
    flavor: str,
    exclusions: set[str] | None = None,
    separator: str = DEFAULT_SEPARATOR,
    stats: IngestStats | None = None,
) -> list[KIExample] | list[RGExample]:
    examples, _ = ingest_auxiliary_with_documents(file, flavor, exclusions, separator, stats)
    return examples


def ingest_auxiliary_with_documents(
    file,
    flavor: str,
    exclusions: set[str] | None = None,
    separator: str = DEFAULT_SEPARATOR,
    stats: IngestStats | None = None,
):
    exclusions = exclusions or set()
    stats = stats if stats is not None else IngestStats()
    if flavor == "mrqa":
        unknown = exclusions - MRQA_TRAIN_SUBSETS
        if unknown:
            raise UsageError(f"unknown mrqa subsets in exclusions: {sorted(unknown)}")
        return _ingest_mrqa(file, exclusions, stats)
    if exclusions:
        raise UsageError(f"exclusions are only meaningful for mrqa, got flavor {flavor!r}")
    if flavor == "coqa":
        return _ingest_coqa(file, separator, stats)
    if flavor in ("quac", "doqa"):
        return _ingest_quac_like(file, flavor, separator, stats)
    if flavor == "wow":
        return _ingest_wow(file, stats)
    raise UsageError(f"unknown flavor {flavor!r}; expected one of {AUXILIARY_FLAVORS}")


def _ingest_mrqa(file, exclusions: set[str], stats: IngestStats):
    """MRQA release layout: JSONL with header lines carrying the subset tag."""
    path = Path(file)
    if not path.exists():
        raise ParseError("input file not found", file=str(path))
    examples: list[KIExample] = []
    documents: list[GroundingDocument] = []
    subset = None
    record_index = 0
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", file=str(path), record=lineno) from exc
            if "header" in row:
                subset = _require(row["header"], "dataset", file=str(path), record=lineno)
                continue
            tag = row.get("subset", row.get("dataset", subset))
            if tag is None:
                raise ParseError(
                    "record has no subset tag and no header seen", file=str(path), record=lineno
                )
            record_index += 1
            if tag in exclusions:
                stats.excluded += 1
                continue
            context = _require(row, "context", file=str(path), record=lineno)
            doc_id = f"mrqa:{tag}:{record_index}"
            documents.append(
                GroundingDocument(doc_id=doc_id, domain=f"mrqa:{tag}", full_text=context)
            )
            for qa in _require(row, "qas", file=str(path), record=lineno):
                qid = _require(qa, "qid", file=str(path), record=lineno)
                detected = _require(qa, "detected_answers", file=str(path), record=lineno)
                if not detected:
                    stats.skip("no detected answer")
                    continue
                answer = detected[0]
                char_spans = _require(answer, "char_spans", file=str(path), record=lineno)
                start, end_inclusive = char_spans[0]
                end = end_inclusive + 1  # release stores inclusive end offsets
                _check_offsets(context, start, end, answer.get("text", ""), qid)
                ex = KIExample(
                    example_id=qid,
                    query=_require(qa, "question", file=str(path), record=lineno),
                    doc_id=doc_id,
                    gold_span=(start, end),
                    source=f"mrqa:{tag}",
                )
                examples.append(ex)
                stats.ingested += 1
    return examples, documents


def _cqa_history(
    prior: list[tuple[str, str]], question: str
) -> list[DialogueTurn]:
    """Prior question/answer pairs plus the current question, as dialogue turns."""
    turns = []
    turn_id = 1
    for q, a in prior:
        turns.append(DialogueTurn(turn_id, "user", q))
        turn_id += 1
        turns.append(DialogueTurn(turn_id, "agent", a))
        turn_id += 1
    turns.append(DialogueTurn(turn_id, "user", question))
    return turns


def _ingest_coqa(file, separator: str, stats: IngestStats):
    raw = _load_json(file)
    examples: list[KIExample] = []
    documents: list[GroundingDocument] = []
    for record in _require(raw, "data", file=file):
        conv_id = str(_require(record, "id", file=file))
        story = _require(record, "story", file=file, record=conv_id)
        doc_id = f"coqa:{conv_id}"
        documents.append(
            GroundingDocument(
                doc_id=doc_id, domain=record.get("source", "coqa"), full_text=story
            )
        )
        questions = _require(record, "questions", file=file, record=conv_id)
        answers = _require(record, "answers", file=file, record=conv_id)
        if len(questions) != len(answers):
            raise ParseError(
                f"{len(questions)} questions vs {len(answers)} answers",
                file=file,
                record=conv_id,
            )
        prior: list[tuple[str, str]] = []
        for q, a in zip(questions, answers):
            q_text = _require(q, "input_text", file=file, record=conv_id)
            a_text = _require(a, "input_text", file=file, record=conv_id)
            example_id = f"{conv_id}_q{q.get('turn_id', len(prior) + 1)}"
            start = a.get("span_start", -1)
            end = a.get("span_end", -1)
            if start is None or start < 0:
                stats.skip("unanswerable question")
            else:
                _check_offsets(story, start, end, a.get("span_text", story[start:end]), example_id)
                ex = KIExample(
                    example_id=example_id,
                    query=build_ki_query(_cqa_history(prior, q_text), separator),
                    doc_id=doc_id,
                    gold_span=(start, end),
                    source="coqa",
                )
                examples.append(ex)
                stats.ingested += 1
            prior.append((q_text, a_text))
    return examples, documents


def _ingest_quac_like(file, flavor: str, separator: str, stats: IngestStats):
    """QuAC and DoQA share the paragraph/qas layout with unanswerable sentinels."""
    raw = _load_json(file)
    examples: list[KIExample] = []
    documents: list[GroundingDocument] = []
    para_index = 0
    for record in _require(raw, "data", file=file):
        title = record.get("title", "")
        for paragraph in _require(record, "paragraphs", file=file, record=title):
            para_index += 1
            context = _require(paragraph, "context", file=file, record=para_index)
            doc_id = f"{flavor}:{paragraph.get('id', para_index)}"
            documents.append(
                GroundingDocument(doc_id=doc_id, domain=flavor, full_text=context)
            )
            prior: list[tuple[str, str]] = []
            for qa in _require(paragraph, "qas", file=file, record=para_index):
                qid = _require(qa, "id", file=file, record=para_index)
                question = _require(qa, "question", file=file, record=para_index)
                answers = _require(qa, "answers", file=file, record=qid)
                if not answers:
                    stats.skip("no answer")
                    continue
                answer = answers[0]
                text = _require(answer, "text", file=file, record=qid)
                if text == "CANNOTANSWER":
                    stats.skip("unanswerable question")
                    prior.append((question, text))
                    continue
                start = _require(answer, "answer_start", file=file, record=qid)
                end = start + len(text)
                _check_offsets(context, start, end, text, qid)
                ex = KIExample(
                    example_id=qid,
                    query=build_ki_query(_cqa_history(prior, question), separator),
                    doc_id=doc_id,
                    gold_span=(start, end),
                    source=flavor,
                )
                examples.append(ex)
                stats.ingested += 1
                prior.append((question, text))
    return examples, documents


def _ingest_wow(file, stats: IngestStats):
    """Wizard-of-Wikipedia: one RGExample per wizard turn with a checked sentence."""
    raw = _load_json(file)
    if isinstance(raw, dict):
        raw = _require(raw, "data", file=file)
    examples: list[RGExample] = []
    for d_idx, dialogue in enumerate(raw):
        turns = _require(dialogue, "dialog", file=file, record=d_idx)
        history: list[DialogueTurn] = []
        for t_idx, raw_turn in enumerate(turns):
            speaker = _require(raw_turn, "speaker", file=file, record=f"{d_idx}#{t_idx}")
            text = _require(raw_turn, "text", file=file, record=f"{d_idx}#{t_idx}")
            role = "agent" if "wizard" in speaker.lower() else "user"
            if role == "agent":
                checked = raw_turn.get("checked_sentence") or {}
                sentences = [
                    v for k, v in checked.items() if k != "no_passages_used" and v
                ]
                if not sentences:
                    stats.skip("wizard turn without checked sentence")
                elif not history:
                    stats.skip("wizard turn without history")
                else:
                    ex = RGExample(
                        example_id=f"wow_{d_idx}_{t_idx}",
                        history=list(history),
                        knowledge=sentences[0],
                        gold_response=text,
                        source="wow",
                    )
                    ex.validate()
                    examples.append(ex)
                    stats.ingested += 1
            history.append(DialogueTurn(t_idx + 1, role, text))
    return examples, []

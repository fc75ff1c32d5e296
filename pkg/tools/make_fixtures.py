#!/usr/bin/env python3
"""Regenerate the committed test fixtures.

Builds the source-corpus files in their public release layouts, then runs
convert + windows at default settings and derives the three stub checkpoint
score files from the resulting windows. Score values are sha256-based, so
the files only change when the fixture corpora or the tokenizer change.

The BLEU fixture's expected value is pinned separately by pin_bleu_fixture.py.
"""

import hashlib
import json
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "tests" / "fixtures"

STUB_CHECKPOINTS = ("ckpt_a", "ckpt_b", "ckpt_c")


def _write_json(path: Path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(obj, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")


def _write_jsonl(path: Path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# Doc2Dial


def _doc(doc_id, domain, title, split_texts):
    text = ""
    spans = {}
    for i, chunk in enumerate(split_texts, start=1):
        spans[str(i)] = {
            "id_sp": str(i),
            "tag": "u",
            "start_sp": len(text),
            "end_sp": len(text) + len(chunk),
            "text_sp": chunk,
        }
        text += chunk
    return {"doc_id": doc_id, "title": title, "doc_text": text, "spans": spans}


def build_doc2dial():
    doc1 = _doc(
        "dmv-renew-1",
        "dmv",
        "Renewing your license",
        [
            "You can renew your license online or at any DMV office. ",
            "No, you must renew before the expiry date to avoid a late fee. ",
            "Renewal costs twenty dollars for a standard license. ",
            "Veterans can request a fee waiver at the service desk.",
        ],
    )
    doc2 = _doc(
        "dmv-vision-5",
        "dmv",
        "Vision test rules",
        [
            "A vision test is required for every renewal. ",
            "You may submit results from your own eye doctor. ",
            "Yes, online renewals also require a recent vision test on file.",
        ],
    )
    documents = {"doc_data": {"dmv": {d["doc_id"]: d for d in (doc1, doc2)}}}

    d100 = {
        "dial_id": "d100",
        "doc_id": "dmv-renew-1",
        "domain": "dmv",
        "turns": [
            {
                "turn_id": 1,
                "role": "user",
                "da": "query_condition",
                "utterance": "How do I renew my license?",
                "references": [],
            },
            {
                "turn_id": 2,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "You can renew it online or at a DMV office.",
                "references": [{"sp_id": "1", "label": "solution"}],
            },
            {
                "turn_id": 3,
                "role": "user",
                "da": "query_condition",
                "utterance": "Can I renew after it expires without a fee?",
                "references": [],
            },
            {
                "turn_id": 4,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "No, renew before the expiry date to avoid a late fee.",
                "references": [{"sp_id": "2", "label": "solution"}],
            },
        ],
    }
    d200 = {
        "dial_id": "d200",
        "doc_id": "dmv-vision-5",
        "domain": "dmv",
        "turns": [
            {
                "turn_id": 1,
                "role": "user",
                "da": "query_condition",
                "utterance": "Do I need a vision test to renew?",
                "references": [],
            },
            {
                "turn_id": 2,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "Yes, a vision test is required for every renewal.",
                "references": [{"sp_id": "1", "label": "solution"}],
            },
            {
                "turn_id": 3,
                "role": "user",
                "da": "query_condition",
                "utterance": "Can my own eye doctor do it?",
                "references": [],
            },
            {
                "turn_id": 4,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "Sure, you may submit results from your own eye doctor.",
                "references": [{"sp_id": "2", "label": "solution"}],
            },
            {
                "turn_id": 5,
                "role": "user",
                "da": "query_condition",
                "utterance": "Does that work for online renewal too?",
                "references": [],
            },
            {
                "turn_id": 6,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "Yes, online renewals also need a recent test on file.",
                "references": [{"sp_id": "3", "label": "solution"}],
            },
            {
                "turn_id": 7,
                "role": "user",
                "da": "thank",
                "utterance": "Thanks, that is all I needed!",
                "references": [],
            },
            {
                "turn_id": 8,
                "role": "agent",
                "da": "respond_solution",
                "utterance": "Happy to help.",
                "references": [],
            },
        ],
    }
    dialogues = {
        "dial_data": {"dmv": {"dmv-renew-1": [d100], "dmv-vision-5": [d200]}}
    }
    _write_json(FIXTURES / "doc2dial" / "documents.json", documents)
    _write_json(FIXTURES / "doc2dial" / "dialogues.json", dialogues)


# ---------------------------------------------------------------------------
# Auxiliary corpora


def build_mrqa():
    def record(subset, context, qid, question, answer):
        start = context.index(answer)
        return [
            {"header": {"dataset": subset, "split": "train"}},
            {
                "context": context,
                "qas": [
                    {
                        "qid": qid,
                        "question": question,
                        "answers": [answer],
                        "detected_answers": [
                            {"text": answer, "char_spans": [[start, start + len(answer) - 1]]}
                        ],
                    }
                ],
            },
        ]

    rows = []
    rows += record(
        "SearchQA",
        "The Eiffel Tower stands in Paris and was completed in 1889.",
        "searchqa-001",
        "Where does the Eiffel Tower stand?",
        "Paris",
    )
    rows += record(
        "TriviaQA",
        "The Great Barrier Reef lies off the coast of Queensland, Australia.",
        "triviaqa-001",
        "Which country is the Great Barrier Reef near?",
        "Australia",
    )
    rows += record(
        "HotpotQA",
        "Mount Everest rises above the Himalaya. The summit reaches 8849 meters.",
        "hotpotqa-001",
        "How many meters does the summit of Everest reach?",
        "8849 meters",
    )
    _write_jsonl(FIXTURES / "mrqa" / "mixed.jsonl", rows)


def build_coqa():
    story = (
        "Anna adopted a small brown dog from the city shelter. "
        "She named him Biscuit because of his color. "
        "The two of them walk in the park every morning."
    )
    a1 = "a small brown dog"
    a2 = "Biscuit"
    data = {
        "version": "1.0",
        "data": [
            {
                "id": "coqa-story-7",
                "source": "wikipedia",
                "story": story,
                "questions": [
                    {"input_text": "What did Anna adopt?", "turn_id": 1},
                    {"input_text": "What did she name him?", "turn_id": 2},
                ],
                "answers": [
                    {
                        "input_text": "A small brown dog",
                        "span_start": story.index(a1),
                        "span_end": story.index(a1) + len(a1),
                        "span_text": a1,
                        "turn_id": 1,
                    },
                    {
                        "input_text": "Biscuit",
                        "span_start": story.index(a2),
                        "span_end": story.index(a2) + len(a2),
                        "span_text": a2,
                        "turn_id": 2,
                    },
                ],
            }
        ],
    }
    _write_json(FIXTURES / "coqa" / "coqa.json", data)


def build_quac():
    context = (
        "Gaudi designed the Sagrada Familia in Barcelona. "
        "Construction began in 1882 and continues today. CANNOTANSWER"
    )
    answer = "the Sagrada Familia"
    data = {
        "data": [
            {
                "title": "Antoni Gaudi",
                "paragraphs": [
                    {
                        "id": "gaudi_p0",
                        "context": context,
                        "qas": [
                            {
                                "id": "quac-q1",
                                "question": "What did Gaudi design?",
                                "answers": [
                                    {"text": answer, "answer_start": context.index(answer)}
                                ],
                            },
                            {
                                "id": "quac-q2",
                                "question": "Did he win any awards?",
                                "answers": [
                                    {
                                        "text": "CANNOTANSWER",
                                        "answer_start": context.index("CANNOTANSWER"),
                                    }
                                ],
                            },
                        ],
                    }
                ],
            }
        ]
    }
    _write_json(FIXTURES / "quac" / "quac.json", data)


def build_doqa():
    context = (
        "Soak dried beans overnight in cold water. "
        "Drain them before cooking to remove excess starch."
    )
    answer = "Soak dried beans overnight in cold water."
    data = {
        "data": [
            {
                "title": "Cooking beans",
                "paragraphs": [
                    {
                        "id": "beans_p0",
                        "context": context,
                        "qas": [
                            {
                                "id": "doqa-q1",
                                "question": "How should I prepare dried beans?",
                                "answers": [{"text": answer, "answer_start": 0}],
                            }
                        ],
                    }
                ],
            }
        ]
    }
    _write_json(FIXTURES / "doqa" / "doqa.json", data)


def build_wow():
    data = [
        {
            "chosen_topic": "Pizza",
            "dialog": [
                {
                    "speaker": "1_Apprentice",
                    "text": "I love pizza, do you know where it comes from?",
                },
                {
                    "speaker": "0_Wizard",
                    "text": "Pizza as we know it was invented in Naples, Italy.",
                    "checked_sentence": {
                        "chosen_topic_0_Pizza_0": "The modern pizza was invented in Naples, Italy."
                    },
                },
                {"speaker": "1_Apprentice", "text": "That is really cool!"},
                {
                    "speaker": "0_Wizard",
                    "text": "It is! I enjoy talking about food.",
                    "checked_sentence": {"no_passages_used": "no_passages_used"},
                },
            ],
        }
    ]
    _write_json(FIXTURES / "wow" / "wow.json", data)


# ---------------------------------------------------------------------------
# Stub checkpoint scores, derived from the fixture windows


def _stub_score(checkpoint: str, example_id: str, window_index: int, kind: str, pos: int) -> float:
    key = f"{checkpoint}|{example_id}|{window_index}|{kind}|{pos}".encode()
    digest = hashlib.sha256(key).digest()
    return int.from_bytes(digest[:4], "big") % 1000 / 100.0


def build_scores():
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        subprocess.run(
            [
                sys.executable,
                "-m",
                "dialdoc.cli",
                "convert",
                "--dataset",
                "doc2dial",
                "--task",
                "ki",
                "--dialogues",
                str(FIXTURES / "doc2dial" / "dialogues.json"),
                "--documents",
                str(FIXTURES / "doc2dial" / "documents.json"),
                "--out",
                str(tmp),
            ],
            check=True,
        )
        subprocess.run(
            [
                sys.executable,
                "-m",
                "dialdoc.cli",
                "windows",
                "--examples",
                str(tmp / "examples.jsonl"),
                "--documents",
                str(tmp / "documents.jsonl"),
                "--out",
                str(tmp / "windows.jsonl"),
            ],
            check=True,
        )
        windows_rows = [
            json.loads(line)
            for line in (tmp / "windows.jsonl").read_text(encoding="utf-8").splitlines()
        ]

    for checkpoint in STUB_CHECKPOINTS:
        rows = []
        for w in windows_rows:
            count = w["context_last"] - w["context_first"]
            # ckpt_b mirrors ckpt_a on half the examples so majorities exist
            effective = checkpoint
            if checkpoint == "ckpt_b":
                h = hashlib.sha256(w["example_id"].encode()).digest()[0]
                if h % 2 == 0:
                    effective = "ckpt_a"
            rows.append(
                {
                    "example_id": w["example_id"],
                    "window_index": w["window_index"],
                    "start_scores": [
                        _stub_score(effective, w["example_id"], w["window_index"], "s", i)
                        for i in range(count)
                    ],
                    "end_scores": [
                        _stub_score(effective, w["example_id"], w["window_index"], "e", i)
                        for i in range(count)
                    ],
                }
            )
        _write_jsonl(FIXTURES / "scores" / f"{checkpoint}.scores.jsonl", rows)


def main():
    build_doc2dial()
    build_mrqa()
    build_coqa()
    build_quac()
    build_doqa()
    build_wow()
    build_scores()
    print(f"fixtures written under {FIXTURES}")


if __name__ == "__main__":
    main()

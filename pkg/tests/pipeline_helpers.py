"""Drive the CLI stages in-process for the end-to-end tests.

All output paths are relative to the current working directory so that two
runs from different directories produce byte-identical files and manifests
(modulo manifest timestamps).
"""

import io
import json
from contextlib import redirect_stdout
from pathlib import Path

from dialdoc.cli import dispatch

STUB_CHECKPOINTS = ("ckpt_a", "ckpt_b", "ckpt_c")


def run_ok(args):
    rc = dispatch([str(a) for a in args])
    assert rc == 0, f"dialdoc {args[0]} exited {rc}"


def run_capture(args) -> str:
    buf = io.StringIO()
    with redirect_stdout(buf):
        run_ok(args)
    return buf.getvalue()


def run_ki_pipeline(fixtures: Path):
    """convert -> windows -> decode per checkpoint -> ensemble -> score-ki, in CWD."""
    run_ok(
        [
            "convert",
            "--dataset",
            "doc2dial",
            "--task",
            "ki",
            "--dialogues",
            fixtures / "doc2dial" / "dialogues.json",
            "--documents",
            fixtures / "doc2dial" / "documents.json",
            "--out",
            ".",
        ]
    )
    run_ok(
        [
            "windows",
            "--examples",
            "examples.jsonl",
            "--documents",
            "documents.jsonl",
            "--out",
            "windows.jsonl",
        ]
    )
    for ckpt in STUB_CHECKPOINTS:
        run_ok(
            [
                "decode",
                "--windows",
                "windows.jsonl",
                "--scores",
                fixtures / "scores" / f"{ckpt}.scores.jsonl",
                "--documents",
                "documents.jsonl",
                "--out",
                f"spans_{ckpt}.jsonl",
            ]
        )
    with open("ensemble_manifest.jsonl", "w", encoding="utf-8", newline="\n") as f:
        for ckpt in STUB_CHECKPOINTS:
            f.write(
                json.dumps(
                    {"checkpoint_id": ckpt, "spans": f"spans_{ckpt}.jsonl"}, sort_keys=True
                )
                + "\n"
            )
    run_ok(
        [
            "ensemble",
            "--manifest",
            "ensemble_manifest.jsonl",
            "--documents",
            "documents.jsonl",
            "--out",
            "ensemble.jsonl",
        ]
    )
    report = run_capture(
        [
            "score-ki",
            "--pred",
            "ensemble.jsonl",
            "--gold",
            "examples.jsonl",
            "--documents",
            "documents.jsonl",
        ]
    )
    Path("report_ki.json").write_text(report, encoding="utf-8")


def run_rg_pipeline(fixtures: Path):
    """convert -> geninput (gold) -> echo generator -> respfix -> score-rg, in CWD."""
    run_ok(
        [
            "convert",
            "--dataset",
            "doc2dial",
            "--task",
            "rg",
            "--dialogues",
            fixtures / "doc2dial" / "dialogues.json",
            "--documents",
            fixtures / "doc2dial" / "documents.json",
            "--out",
            "rg",
        ]
    )
    run_ok(
        [
            "geninput",
            "--examples",
            Path("rg") / "examples.jsonl",
            "--mode",
            "gold",
            "--out",
            "gen_inputs.jsonl",
        ]
    )
    # echo generator: the response is the knowledge block of the input line
    from dialdoc.respond import parse_input_text

    with open("gen_inputs.jsonl", encoding="utf-8") as f, open(
        "generations.jsonl", "w", encoding="utf-8", newline="\n"
    ) as out:
        for line in f:
            row = json.loads(line)
            knowledge, _ = parse_input_text(row["input_text"])
            out.write(
                json.dumps(
                    {"example_id": row["example_id"], "response": knowledge}, sort_keys=True
                )
                + "\n"
            )
    run_ok(
        [
            "respfix",
            "--gen",
            "generations.jsonl",
            "--inputs",
            "gen_inputs.jsonl",
            "--alpha",
            "0.4",
            "--out",
            "final_responses.jsonl",
        ]
    )
    report = run_capture(
        [
            "score-rg",
            "--hyp",
            "final_responses.jsonl",
            "--ref",
            Path("rg") / "examples.jsonl",
        ]
    )
    Path("report_rg.json").write_text(report, encoding="utf-8")


def snapshot_tree(root: Path) -> dict:
    """Map of relative path -> bytes, with manifest timestamps dropped."""
    out = {}
    for path in sorted(root.rglob("*")):
        if not path.is_file():
            continue
        data = path.read_bytes()
        if path.name.endswith(".manifest.json"):
            obj = json.loads(data)
            obj.pop("timestamp", None)
            data = json.dumps(obj, sort_keys=True).encode()
        out[str(path.relative_to(root))] = data
    return out

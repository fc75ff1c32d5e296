"""Single entry point dispatching the pipeline stages.

Stages communicate only through their documented files; every file output
gets a manifest sidecar. Exit codes: 0 success, 1 validation findings,
2 usage error, 3 I/O or contract violation. Diagnostics go to stderr, data
to files (or to stdout for the scoring and plan commands, which emit a
single report line).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__, corpus, ensemble, metrics, plan as plan_mod, respond, spandecode, windows
from .errors import ContractViolation, HarnessError, UsageError
from .manifest import write_manifest
from .records import (
    DatasetDescriptor,
    GroundingDocument,
    document_to_row,
    example_from_row,
    example_to_row,
    load_documents,
    read_jsonl,
    write_jsonl,
)

SEED_ENV_VAR = "DIALDOC_SEED"


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError as exc:
        raise UsageError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}") from exc


def _split_csv(raw: str | None) -> list[str]:
    if not raw:
        return []
    return [item for item in (part.strip() for part in raw.split(",")) if item]


# ---------------------------------------------------------------------------
# convert


def cmd_convert(args) -> int:
    out_dir = Path(args.out)
    if args.dataset == "doc2dial":
        if not args.dialogues or not args.documents:
            raise UsageError("convert --dataset doc2dial needs --dialogues and --documents")
        stats = corpus.IngestStats()
        examples, documents = corpus.ingest_doc2dial(
            args.dialogues, args.documents, args.task, args.separator, stats
        )
        inputs = [args.dialogues, args.documents]
    else:
        if not args.input:
            raise UsageError(f"convert --dataset {args.dataset} needs --in")
        if args.dataset == "wow" and args.task != "rg":
            raise UsageError("wow is a response-generation corpus; use --task rg")
        if args.dataset != "wow" and args.task != "ki":
            raise UsageError(f"{args.dataset} is a span-identification corpus; use --task ki")
        stats = corpus.IngestStats()
        examples, documents = corpus.ingest_auxiliary_with_documents(
            args.input,
            args.dataset,
            set(_split_csv(args.exclude)),
            args.separator,
            stats,
        )
        inputs = [args.input]

    examples = sorted(examples, key=lambda e: e.example_id)
    documents = sorted(documents, key=lambda d: d.doc_id)

    examples_path = out_dir / "examples.jsonl"
    documents_path = out_dir / "documents.jsonl"
    write_jsonl(examples_path, (example_to_row(e) for e in examples))
    write_jsonl(documents_path, (document_to_row(d) for d in documents))

    descriptor = DatasetDescriptor(
        name=args.dataset,
        file_paths=[str(p) for p in inputs],
        exclusions=set(_split_csv(args.exclude)),
        record_count=stats.ingested,
    )
    config = {
        "dataset": descriptor.name,
        "task": args.task,
        "exclude": sorted(descriptor.exclusions),
        "separator": args.separator,
    }
    for path in (examples_path, documents_path):
        write_manifest(path, command="convert", config=config, inputs=inputs)
    print(
        f"convert: {descriptor.record_count} examples, {stats.excluded} excluded, "
        f"{stats.skipped} skipped -> {examples_path}",
        file=sys.stderr,
    )
    return 0


# ---------------------------------------------------------------------------
# mix


def cmd_mix(args) -> int:
    paths = _split_csv(args.input)
    if not paths:
        raise UsageError("mix needs at least one input file")
    seed = args.seed if args.seed is not None else _default_seed()
    datasets = [[row for _, row in read_jsonl(p)] for p in paths]
    mixed = corpus.mix(datasets, seed)
    write_jsonl(args.out, mixed)
    write_manifest(
        args.out,
        command="mix",
        config={"seed": seed, "inputs": paths},
        inputs=paths,
    )
    print(f"mix: {len(mixed)} examples (seed {seed}) -> {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# windows


def _load_external_offsets(path) -> dict[str, list[windows.Token]]:
    offsets = {}
    for i, row in read_jsonl(path):
        doc_id = row.get("doc_id")
        if doc_id is None:
            raise ContractViolation(f"offsets row {i} missing doc_id")
        offsets[doc_id] = [windows.token_from_row(t) for t in row["tokens"]]
    return offsets


def cmd_windows(args) -> int:
    examples = []
    for i, row in read_jsonl(args.examples):
        if row.get("task") != "ki":
            raise ContractViolation(
                f"windows stage consumes ki examples; row {i} has task {row.get('task')!r}"
            )
        examples.append(row)
    documents = load_documents(args.documents)
    external = _load_external_offsets(args.offsets) if args.offsets else {}

    token_cache: dict[str, list[windows.Token]] = {}

    def context_tokens(doc: GroundingDocument) -> list[windows.Token]:
        if doc.doc_id not in token_cache:
            if doc.doc_id in external:
                tokens = external[doc.doc_id]
                windows.validate_external_tokens(doc.doc_id, doc.full_text, tokens)
            else:
                tokens = windows.tokenize(doc.full_text)
            token_cache[doc.doc_id] = tokens
        return token_cache[doc.doc_id]

    rows = []
    for row in sorted(examples, key=lambda r: r["example_id"]):
        doc = documents.get(row["doc_id"])
        if doc is None:
            raise ContractViolation(
                f"example {row['example_id']} references unknown doc_id {row['doc_id']!r}"
            )
        gold = row.get("gold_span")
        gold_span = (gold["char_start"], gold["char_end"]) if gold else None
        query_count = len(windows.tokenize(row["query"]))
        features = windows.make_windows(
            query_token_count=query_count,
            context=context_tokens(doc),
            max_input_length=args.max_len,
            stride=args.stride,
            reserved_slots=args.reserved_slots,
            gold_span=gold_span,
            example_id=row["example_id"],
        )
        for feature in features:
            feature.doc_id = doc.doc_id
        rows.extend(windows.feature_to_row(f) for f in features)

    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        command="windows",
        config={
            "max_len": args.max_len,
            "stride": args.stride,
            "reserved_slots": args.reserved_slots,
        },
        inputs=[p for p in (args.examples, args.documents, args.offsets) if p],
    )
    print(f"windows: {len(rows)} windows -> {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# decode


def cmd_decode(args) -> int:
    documents = load_documents(args.documents)
    features: dict[str, list[windows.WindowedFeature]] = {}
    doc_of: dict[str, str] = {}
    for i, row in read_jsonl(args.windows):
        feature = windows.feature_from_row(row)
        features.setdefault(feature.example_id, []).append(feature)
        if feature.doc_id:
            doc_of[feature.example_id] = feature.doc_id

    scores: dict[tuple[str, int], spandecode.WindowScores] = {}
    for i, row in read_jsonl(args.scores):
        ws = spandecode.scores_from_row(row, file=args.scores, record=i)
        scores[(ws.example_id, ws.window_index)] = ws

    config = spandecode.PostProcConfig(
        lambda_coverage=args.lambda_coverage,
        max_answer_tokens=args.max_answer,
        nbest=args.nbest,
        yes_no_extension=not args.no_yesno,
    )

    rows = []
    for example_id in sorted(features):
        paired = []
        for feature in sorted(features[example_id], key=lambda f: f.window_index):
            key = (example_id, feature.window_index)
            if key not in scores:
                raise ContractViolation(
                    f"no scores for example {example_id} window {feature.window_index}"
                )
            paired.append((feature, scores.pop(key)))
        candidates = spandecode.decode_example(paired, config)
        doc_id = doc_of.get(example_id)
        doc = documents.get(doc_id) if doc_id else None
        if doc is None:
            raise ContractViolation(f"example {example_id} has no resolvable document")
        nbest_rows = []
        for rank, cand in enumerate(candidates):
            if rank == 0:
                cand = spandecode.extend_by_splits(cand, doc.splits, config.lambda_coverage)
                if config.yes_no_extension:
                    cand = spandecode.extend_yes_no(cand, doc.full_text)
            nbest_rows.append(
                {
                    "char_start": cand.char_start,
                    "char_end": cand.char_end,
                    "score": cand.score,
                    "text": doc.slice(cand.char_start, cand.char_end),
                }
            )
        rows.append({"example_id": example_id, "doc_id": doc_id, "nbest": nbest_rows})

    if scores:
        orphan = sorted(scores)[0]
        raise ContractViolation(
            f"scores for unknown window: example {orphan[0]} window {orphan[1]}"
        )

    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        command="decode",
        config={
            "lambda": args.lambda_coverage,
            "max_answer": args.max_answer,
            "nbest": args.nbest,
            "yes_no": not args.no_yesno,
        },
        inputs=[args.windows, args.scores, args.documents],
    )
    print(f"decode: {len(rows)} examples -> {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# ensemble


def _top1_of_spans_row(row: dict, *, checkpoint_id: str):
    nbest = row.get("nbest", [])
    if not nbest:
        return None
    top = nbest[0]
    return ensemble.CheckpointPrediction(
        checkpoint_id=checkpoint_id,
        example_id=row["example_id"],
        span=(top["char_start"], top["char_end"]),
        score=float(top["score"]),
    )


def cmd_ensemble(args) -> int:
    manifest_path = Path(args.manifest)
    checkpoints = []
    for i, row in read_jsonl(manifest_path):
        if "checkpoint_id" not in row or "spans" not in row:
            raise ContractViolation(
                f"ensemble manifest line {i} needs checkpoint_id and spans fields"
            )
        spans_path = Path(row["spans"])
        if not spans_path.is_absolute():
            spans_path = manifest_path.parent / spans_path
        checkpoints.append((row["checkpoint_id"], spans_path))
    if not checkpoints:
        raise ContractViolation("ensemble manifest lists no checkpoints")

    documents = load_documents(args.documents)
    by_example: dict[str, list[ensemble.CheckpointPrediction]] = {}
    example_doc: dict[str, str] = {}
    for checkpoint_id, spans_path in checkpoints:
        for i, row in read_jsonl(spans_path):
            pred = _top1_of_spans_row(row, checkpoint_id=checkpoint_id)
            if pred is not None:
                by_example.setdefault(pred.example_id, []).append(pred)
            if "doc_id" in row:
                example_doc[row["example_id"]] = row["doc_id"]

    rows = []
    for example_id in sorted(by_example):
        result = ensemble.tally(by_example[example_id])
        doc_id = example_doc.get(example_id)
        if doc_id is None and len(documents) == 1:
            doc_id = next(iter(documents))
        doc = documents.get(doc_id) if doc_id else None
        if doc is None:
            raise ContractViolation(f"example {example_id} has no resolvable document")
        rows.append(
            {
                "example_id": example_id,
                "doc_id": doc_id,
                "char_start": result.span[0],
                "char_end": result.span[1],
                "text": doc.slice(*result.span),
                "votes": result.votes,
                "tiebreak": result.tiebreak,
            }
        )

    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        command="ensemble",
        config={"checkpoints": [c for c, _ in checkpoints]},
        inputs=[args.manifest, args.documents] + [str(p) for _, p in checkpoints],
    )
    print(f"ensemble: {len(rows)} examples, {len(checkpoints)} checkpoints -> {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# scoring


def _prediction_text(row: dict) -> tuple[str, str]:
    """(example_id, predicted text) from an ensemble or spans row."""
    example_id = row["example_id"]
    if "text" in row:
        return example_id, row["text"]
    nbest = row.get("nbest")
    if nbest:
        return example_id, nbest[0]["text"]
    raise ContractViolation(f"prediction row for {example_id} carries no span text")


def cmd_score_ki(args) -> int:
    documents = load_documents(args.documents)
    predictions = {}
    for i, row in read_jsonl(args.pred):
        example_id, text = _prediction_text(row)
        predictions[example_id] = text

    golds: dict[str, list[str]] = {}
    for i, row in read_jsonl(args.gold):
        if row.get("task") != "ki":
            continue
        span = row.get("gold_span")
        if not span:
            continue
        doc = documents.get(row["doc_id"])
        if doc is None:
            raise ContractViolation(
                f"gold example {row['example_id']} references unknown doc {row['doc_id']!r}"
            )
        golds[row["example_id"]] = [doc.slice(span["char_start"], span["char_end"])]

    missing = set(golds) - set(predictions)
    for example_id in sorted(missing):
        print(f"score-ki: no prediction for {example_id}, scoring 0", file=sys.stderr)
    report = metrics.score_ki(predictions, golds)
    print(json.dumps(report.to_row(), sort_keys=True))
    return 0


def cmd_score_rg(args) -> int:
    hyps_by_id = {}
    for i, row in read_jsonl(args.hyp):
        if "response" not in row:
            raise ContractViolation(f"hypothesis row {i} has no response field")
        hyps_by_id[row["example_id"]] = row["response"]

    pairs = []
    for i, row in read_jsonl(args.ref):
        if row.get("task") != "rg" or row.get("gold_response") is None:
            continue
        example_id = row["example_id"]
        if example_id not in hyps_by_id:
            raise ContractViolation(f"no hypothesis for reference example {example_id}")
        pairs.append((hyps_by_id[example_id], row["gold_response"]))
    if not pairs:
        raise ContractViolation("score-rg found no scorable reference examples")

    result = metrics.corpus_bleu([h for h, _ in pairs], [r for _, r in pairs])
    print(
        json.dumps(
            {"bleu": round(result.score, 2), "signature": result.signature, "n": len(pairs)},
            sort_keys=True,
        )
    )
    return 0


# ---------------------------------------------------------------------------
# generation stages


def cmd_geninput(args) -> int:
    if args.mode == "pred" and not args.spans:
        raise UsageError("geninput --mode pred needs --spans")
    span_text: dict[str, str] = {}
    if args.spans:
        for i, row in read_jsonl(args.spans):
            example_id, text = _prediction_text(row)
            span_text[example_id] = text

    rows = []
    for i, row in read_jsonl(args.examples):
        if row.get("task") != "rg":
            continue
        ex = example_from_row(row, file=args.examples, record=i)
        if args.mode == "gold":
            knowledge = ex.knowledge
        else:
            if ex.example_id not in span_text:
                raise ContractViolation(
                    f"no span prediction for example {ex.example_id} in {args.spans}"
                )
            knowledge = span_text[ex.example_id]
        gi = respond.assemble_generator_input(ex, knowledge, args.max_history, args.mode)
        rows.append({"example_id": gi.example_id, "input_text": gi.input_text, "mode": gi.mode})
    if not rows:
        raise ContractViolation("geninput found no rg examples")

    rows.sort(key=lambda r: r["example_id"])
    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        command="geninput",
        config={"mode": args.mode, "max_history": args.max_history},
        inputs=[p for p in (args.examples, args.spans) if p],
    )
    print(f"geninput: {len(rows)} inputs ({args.mode} mode) -> {args.out}", file=sys.stderr)
    return 0


def cmd_respfix(args) -> int:
    knowledge_of: dict[str, str] = {}
    for i, row in read_jsonl(args.inputs):
        knowledge, _ = respond.parse_input_text(row["input_text"])
        knowledge_of[row["example_id"]] = knowledge

    config = respond.RespFixConfig(alpha=args.alpha, length_unit=args.length_unit)
    rows = []
    replaced_count = 0
    for i, row in read_jsonl(args.gen):
        example_id = row["example_id"]
        if example_id not in knowledge_of:
            raise ContractViolation(f"no generator input recorded for example {example_id}")
        response = row["response"]
        replaced = respond.should_replace(response, knowledge_of[example_id], config)
        if replaced:
            replaced_count += 1
        rows.append(
            {
                "example_id": example_id,
                "response": knowledge_of[example_id] if replaced else response,
                "replaced": replaced,
            }
        )

    rows.sort(key=lambda r: r["example_id"])
    write_jsonl(args.out, rows)
    write_manifest(
        args.out,
        command="respfix",
        config={"alpha": args.alpha, "length_unit": args.length_unit},
        inputs=[args.gen, args.inputs],
    )
    print(f"respfix: replaced {replaced_count}/{len(rows)} responses -> {args.out}", file=sys.stderr)
    return 0


# ---------------------------------------------------------------------------
# plan


def cmd_plan(args) -> int:
    loaded = plan_mod.load_plan(args.plan_file)
    if args.plan_command == "validate":
        report = plan_mod.validate_plan(loaded)
        print(
            json.dumps(
                {
                    "ok": report.ok,
                    "findings": [{"code": f.code, "message": f.message} for f in report.findings],
                },
                sort_keys=True,
            )
        )
        return 0 if report.ok else 1
    # members
    members = plan_mod.ensemble_members(loaded, set(_split_csv(args.exclude)))
    for checkpoint_id in members:
        print(checkpoint_id)
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dialdoc",
        description="Deterministic harness for document-grounded dialogue pipelines.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument(
        "--threads",
        type=int,
        default=1,
        help="parallelism hint; outputs are identical for any value",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="ingest a source corpus into unified records")
    p.add_argument("--dataset", required=True, choices=("doc2dial",) + corpus.AUXILIARY_FLAVORS)
    p.add_argument("--task", required=True, choices=("ki", "rg"))
    p.add_argument("--in", dest="input", help="source file (auxiliary corpora)")
    p.add_argument("--dialogues", help="dialogue file (doc2dial)")
    p.add_argument("--documents", help="document file (doc2dial)")
    p.add_argument("--exclude", default="", help="comma-separated subset names to drop")
    p.add_argument("--separator", default=corpus.DEFAULT_SEPARATOR)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("mix", help="seeded shuffle of unified example files")
    p.add_argument("--in", dest="input", required=True, help="comma-separated example files")
    p.add_argument("--seed", type=int, default=None, help=f"default: ${SEED_ENV_VAR} or 0")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_mix)

    p = sub.add_parser("windows", help="window documents for the reader")
    p.add_argument("--examples", required=True)
    p.add_argument("--documents", required=True)
    p.add_argument("--max-len", type=int, default=windows.DEFAULT_MAX_INPUT_LENGTH)
    p.add_argument("--stride", type=int, default=windows.DEFAULT_STRIDE)
    p.add_argument("--reserved-slots", type=int, default=windows.DEFAULT_RESERVED_SLOTS)
    p.add_argument("--offsets", help="external tokenization, one doc per line")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_windows)

    p = sub.add_parser("decode", help="n-best span decoding plus post-processing")
    p.add_argument("--windows", required=True)
    p.add_argument("--scores", required=True)
    p.add_argument("--documents", required=True)
    p.add_argument("--lambda", dest="lambda_coverage", type=float, default=spandecode.DEFAULT_LAMBDA)
    p.add_argument("--max-answer", type=int, default=spandecode.DEFAULT_MAX_ANSWER_TOKENS)
    p.add_argument("--nbest", type=int, default=spandecode.DEFAULT_NBEST)
    p.add_argument("--no-yesno", action="store_true", help="disable the yes/no extension")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("ensemble", help="majority vote over checkpoint span files")
    p.add_argument("--manifest", required=True, help="jsonl of {checkpoint_id, spans}")
    p.add_argument("--documents", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("score-ki", help="exact match and uni-gram F1")
    p.add_argument("--pred", required=True, help="ensemble.jsonl or spans.jsonl")
    p.add_argument("--gold", required=True, help="examples.jsonl")
    p.add_argument("--documents", required=True)
    p.set_defaults(func=cmd_score_ki)

    p = sub.add_parser("score-rg", help="corpus BLEU over generated responses")
    p.add_argument("--hyp", required=True, help="generations.jsonl or final_responses.jsonl")
    p.add_argument("--ref", required=True, help="examples.jsonl")
    p.set_defaults(func=cmd_score_rg)

    p = sub.add_parser("geninput", help="assemble generator inputs")
    p.add_argument("--examples", required=True)
    p.add_argument("--mode", required=True, choices=("gold", "pred"))
    p.add_argument("--spans", help="ensemble.jsonl or spans.jsonl (pred mode)")
    p.add_argument("--max-history", type=int, default=None, help="default: whole history")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_geninput)

    p = sub.add_parser("respfix", help="length-ratio response replacement")
    p.add_argument("--gen", required=True, help="generations.jsonl")
    p.add_argument("--inputs", required=True, help="gen_inputs.jsonl")
    p.add_argument("--alpha", type=float, default=respond.DEFAULT_ALPHA)
    p.add_argument("--length-unit", choices=("tokens", "chars"), default="tokens")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_respfix)

    p = sub.add_parser("plan", help="validate plans and list ensemble members")
    plan_sub = p.add_subparsers(dest="plan_command", required=True)
    pv = plan_sub.add_parser("validate")
    pv.add_argument("plan_file")
    pv.set_defaults(func=cmd_plan)
    pm = plan_sub.add_parser("members")
    pm.add_argument("plan_file")
    pm.add_argument("--exclude", default="")
    pm.set_defaults(func=cmd_plan)

    return parser


def dispatch(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    if args.threads < 1:
        print("dialdoc: --threads must be >= 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except HarnessError as exc:
        print(f"dialdoc {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    except FileNotFoundError as exc:
        print(f"dialdoc {args.command}: {exc}", file=sys.stderr)
        return 3


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()

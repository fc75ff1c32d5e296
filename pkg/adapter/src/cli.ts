#!/usr/bin/env node
/**
 * dialdoc-adapter: file-protocol model adapter for the dialdoc harness.
 *
 *   predict-spans      windows.jsonl + documents.jsonl -> scores.jsonl
 *   generate-responses gen_inputs.jsonl -> generations.jsonl
 *   finetune           validates a training configuration (plan only)
 *
 * Exit codes: 0 ok, 2 usage, 3 schema violation, 4 model load failure.
 */

import { asObject, readJsonl, requireField, writeJsonlAtomic } from "./jsonl.js";
import { loadGenerator, parseInputText, truncateInput } from "./generator.js";
import { loadReader, whitespaceOffsets } from "./reader.js";
import type {
  AdapterConfig,
  DocumentRow,
  GenInputRow,
  TokenRow,
  WindowRow,
} from "./types.js";
import { AdapterError, DEFAULT_CONFIG, schemaError } from "./types.js";

interface Flags {
  [key: string]: string | boolean;
}

function parseFlags(argv: string[]): Flags {
  const flags: Flags = {};
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) {
      throw new AdapterError(`unexpected argument ${arg}`, 2);
    }
    const name = arg.slice(2);
    if (i + 1 < argv.length && !argv[i + 1].startsWith("--")) {
      flags[name] = argv[++i];
    } else {
      flags[name] = true;
    }
  }
  return flags;
}

function stringFlag(flags: Flags, name: string, fallback?: string): string {
  const value = flags[name];
  if (value === undefined) {
    if (fallback !== undefined) return fallback;
    throw new AdapterError(`missing required flag --${name}`, 2);
  }
  if (typeof value !== "string") {
    throw new AdapterError(`flag --${name} needs a value`, 2);
  }
  return value;
}

function numberFlag(flags: Flags, name: string, fallback: number): number {
  const value = flags[name];
  if (value === undefined) return fallback;
  const parsed = Number(value);
  if (!Number.isFinite(parsed)) {
    throw new AdapterError(`flag --${name} needs a number, got ${String(value)}`, 2);
  }
  return parsed;
}

function configFromFlags(flags: Flags): AdapterConfig {
  return {
    readerModel: stringFlag(flags, "reader-model", DEFAULT_CONFIG.readerModel),
    generatorModel: stringFlag(flags, "generator-model", DEFAULT_CONFIG.generatorModel),
    learningRate: numberFlag(flags, "learning-rate", DEFAULT_CONFIG.learningRate),
    readerBatch: numberFlag(flags, "reader-batch", DEFAULT_CONFIG.readerBatch),
    generatorBatch: numberFlag(flags, "generator-batch", DEFAULT_CONFIG.generatorBatch),
    beamSize: numberFlag(flags, "beam-size", DEFAULT_CONFIG.beamSize),
    maxTargetLength: numberFlag(flags, "max-target-length", DEFAULT_CONFIG.maxTargetLength),
    maxGeneratorInput: numberFlag(flags, "max-input-tokens", DEFAULT_CONFIG.maxGeneratorInput),
  };
}

// ---------------------------------------------------------------------------
// schema readers

function parseWindowRow(value: unknown, file: string, line: number): WindowRow {
  const row = asObject(value, file, line);
  const tokensRaw = requireField<unknown>(row, "tokens", file, line);
  if (!Array.isArray(tokensRaw)) {
    throw schemaError(`"tokens" must be an array at ${file}:${line}`);
  }
  const tokens: TokenRow[] = tokensRaw.map((t, i) => {
    const tok = asObject(t, file, line);
    return {
      text: requireField<string>(tok, "text", file, line),
      char_start: requireField<number>(tok, "char_start", file, line),
      char_end: requireField<number>(tok, "char_end", file, line),
    };
  });
  const contextFirst = requireField<number>(row, "context_first", file, line);
  const contextLast = requireField<number>(row, "context_last", file, line);
  if (contextLast - contextFirst !== tokens.length) {
    throw schemaError(
      `window token count ${tokens.length} does not match context range ` +
        `[${contextFirst},${contextLast}) at ${file}:${line}`,
    );
  }
  return {
    example_id: requireField<string>(row, "example_id", file, line),
    doc_id: typeof row.doc_id === "string" ? row.doc_id : undefined,
    window_index: requireField<number>(row, "window_index", file, line),
    query_token_count: requireField<number>(row, "query_token_count", file, line),
    context_first: contextFirst,
    context_last: contextLast,
    tokens,
    gold_token_span: (row.gold_token_span ?? null) as [number, number] | null,
  };
}

function parseDocumentRow(value: unknown, file: string, line: number): DocumentRow {
  const row = asObject(value, file, line);
  return {
    doc_id: requireField<string>(row, "doc_id", file, line),
    domain: requireField<string>(row, "domain", file, line),
    full_text: requireField<string>(row, "full_text", file, line),
    splits: requireField<DocumentRow["splits"]>(row, "splits", file, line),
  };
}

function parseGenInputRow(value: unknown, file: string, line: number): GenInputRow {
  const row = asObject(value, file, line);
  const mode = requireField<string>(row, "mode", file, line);
  if (mode !== "gold" && mode !== "pred") {
    throw schemaError(`mode must be gold or pred at ${file}:${line}`);
  }
  return {
    example_id: requireField<string>(row, "example_id", file, line),
    input_text: requireField<string>(row, "input_text", file, line),
    mode,
  };
}

// ---------------------------------------------------------------------------
// commands

function cmdPredictSpans(flags: Flags): number {
  const windowsFile = stringFlag(flags, "windows");
  const documentsFile = stringFlag(flags, "documents");
  const outFile = stringFlag(flags, "out");
  const config = configFromFlags(flags);

  const documents = new Map<string, DocumentRow>();
  for (const { line, row } of readJsonl(documentsFile)) {
    const doc = parseDocumentRow(row, documentsFile, line);
    documents.set(doc.doc_id, doc);
  }

  const windows: WindowRow[] = [];
  for (const { line, row } of readJsonl(windowsFile)) {
    const parsed = parseWindowRow(row, windowsFile, line);
    if (parsed.doc_id && !documents.has(parsed.doc_id)) {
      throw schemaError(
        `window for example ${parsed.example_id} references unknown doc ${parsed.doc_id} ` +
          `at ${windowsFile}:${line}`,
      );
    }
    windows.push(parsed);
  }

  const reader = loadReader(config.readerModel);

  const emitOffsets = flags["emit-offsets"];
  if (typeof emitOffsets === "string") {
    const rows = [...documents.values()].map((doc) => ({
      doc_id: doc.doc_id,
      tokens: whitespaceOffsets(doc.full_text),
    }));
    writeJsonlAtomic(emitOffsets, rows as unknown as Record<string, unknown>[]);
    process.stderr.write(
      `predict-spans: wrote ${rows.length} tokenizations to ${emitOffsets}; ` +
        `re-run harness windowing with --offsets before scoring\n`,
    );
  }

  const scores = windows.map((w) => reader.score(w) as unknown as Record<string, unknown>);
  writeJsonlAtomic(outFile, scores);
  process.stderr.write(
    `predict-spans: ${scores.length} windows scored with ${reader.modelId} -> ${outFile}\n`,
  );
  return 0;
}

function cmdGenerateResponses(flags: Flags): number {
  const inputsFile = stringFlag(flags, "inputs");
  const outFile = stringFlag(flags, "out");
  const config = configFromFlags(flags);
  const generator = loadGenerator(config.generatorModel);

  const out: Record<string, unknown>[] = [];
  for (const { line, row } of readJsonl(inputsFile)) {
    const input = parseGenInputRow(row, inputsFile, line);
    const parsed = parseInputText(input.input_text, `${inputsFile}:${line}`);
    const truncated = truncateInput(parsed, config.maxGeneratorInput);
    const generation = generator.generate(input, truncated);
    out.push(generation as unknown as Record<string, unknown>);
  }
  writeJsonlAtomic(outFile, out);
  process.stderr.write(
    `generate-responses: ${out.length} responses from ${generator.modelId} ` +
      `(beam ${config.beamSize}, max target ${config.maxTargetLength}) -> ${outFile}\n`,
  );
  return 0;
}

function cmdFinetune(flags: Flags): number {
  const subtask = stringFlag(flags, "subtask");
  if (subtask !== "ki" && subtask !== "rg") {
    throw new AdapterError(`--subtask must be ki or rg, got ${subtask}`, 2);
  }
  const config = configFromFlags(flags);
  const plan = {
    subtask,
    model: subtask === "ki" ? config.readerModel : config.generatorModel,
    learning_rate: config.learningRate,
    batch_size: subtask === "ki" ? config.readerBatch : config.generatorBatch,
  };
  process.stderr.write(`finetune plan: ${JSON.stringify(plan)}\n`);
  if (flags["plan-only"] === true) {
    return 0;
  }
  throw new AdapterError(
    "fine-tuning needs a real model backend and accelerator; re-run with --plan-only to validate settings",
    4,
  );
}

const USAGE = `usage: dialdoc-adapter <command> [flags]

commands:
  predict-spans       --windows <f> --documents <f> --out <f>
                      [--reader-model stub-constant|stub-hash|<path>]
                      [--emit-offsets <f>] [--reader-batch 120]
  generate-responses  --inputs <f> --out <f>
                      [--generator-model stub-echo|<path>] [--beam-size 4]
                      [--max-target-length 200] [--max-input-tokens 300]
                      [--generator-batch 60]
  finetune            --subtask ki|rg [--plan-only] [--learning-rate 3e-5]
`;

export function main(argv: string[]): number {
  if (argv.length === 0 || argv[0] === "--help" || argv[0] === "-h") {
    process.stderr.write(USAGE);
    return argv.length === 0 ? 2 : 0;
  }
  const [command, ...rest] = argv;
  try {
    const flags = parseFlags(rest);
    switch (command) {
      case "predict-spans":
        return cmdPredictSpans(flags);
      case "generate-responses":
        return cmdGenerateResponses(flags);
      case "finetune":
        return cmdFinetune(flags);
      default:
        process.stderr.write(`unknown command ${command}\n${USAGE}`);
        return 2;
    }
  } catch (err) {
    if (err instanceof AdapterError) {
      process.stderr.write(`dialdoc-adapter ${command}: ${err.message}\n`);
      return err.exitCode;
    }
    throw err;
  }
}

const isDirectRun =
  process.argv[1] !== undefined && import.meta.url === new URL(`file://${process.argv[1]}`).href;
if (isDirectRun) {
  process.exit(main(process.argv.slice(2)));
}

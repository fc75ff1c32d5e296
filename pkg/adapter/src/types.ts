/**
 * Wire formats shared with the harness, plus the adapter configuration.
 *
 * The adapter only reads the documented harness files and writes the
 * documented score/generation files; it never mutates harness outputs.
 */

export interface TokenRow {
  text: string;
  char_start: number;
  char_end: number;
}

export interface WindowRow {
  example_id: string;
  doc_id?: string;
  window_index: number;
  query_token_count: number;
  context_first: number;
  context_last: number;
  tokens: TokenRow[];
  gold_token_span: [number, number] | null;
}

export interface ScoreRow {
  example_id: string;
  window_index: number;
  start_scores: number[];
  end_scores: number[];
}

export interface DocumentRow {
  doc_id: string;
  domain: string;
  full_text: string;
  splits: { split_id: string; char_start: number; char_end: number }[];
}

export interface GenInputRow {
  example_id: string;
  input_text: string;
  mode: "gold" | "pred";
}

export interface GenerationRow {
  example_id: string;
  response: string;
}

export interface OffsetsRow {
  doc_id: string;
  tokens: TokenRow[];
}

/** Defaults match the settings the harness pipeline assumes; flags override. */
export interface AdapterConfig {
  readerModel: string;
  generatorModel: string;
  learningRate: number;
  readerBatch: number;
  generatorBatch: number;
  beamSize: number;
  maxTargetLength: number;
  maxGeneratorInput: number;
}

export const DEFAULT_CONFIG: AdapterConfig = {
  readerModel: "stub-constant",
  generatorModel: "stub-echo",
  learningRate: 3e-5,
  readerBatch: 120,
  generatorBatch: 60,
  beamSize: 4,
  maxTargetLength: 200,
  maxGeneratorInput: 300,
};

/** Error with a process exit code: 2 usage, 3 schema, 4 model load. */
export class AdapterError extends Error {
  constructor(
    message: string,
    readonly exitCode: number,
  ) {
    super(message);
  }
}

export function schemaError(message: string): AdapterError {
  return new AdapterError(message, 3);
}

export function modelError(message: string): AdapterError {
  return new AdapterError(message, 4);
}

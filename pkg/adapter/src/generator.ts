/**
 * Response generator backends.
 *
 * The input line is "<knowledge>...knowledge...<user>...<agent>..." as
 * assembled by the harness. Before any model sees it, the history block is
 * left-truncated (oldest turns dropped) until knowledge + history fit the
 * input budget; the knowledge block is never cut, since it is the grounding
 * signal the generation step depends on.
 *
 * "stub-echo" copies the knowledge block back as the response, which makes
 * the downstream length-ratio post-processor a no-op (L_resp equals L_kn).
 */

import { existsSync } from "node:fs";

import type { GenInputRow, GenerationRow } from "./types.js";
import { modelError, schemaError } from "./types.js";

const KNOWLEDGE_MARKER = "<knowledge>";
const TURN_MARKERS = ["<user>", "<agent>"];

export interface ModelInput {
  knowledge: string;
  contextBlock: string;
}

export function parseInputText(inputText: string, where: string): ModelInput {
  if (!inputText.startsWith(KNOWLEDGE_MARKER)) {
    throw schemaError(`input_text does not start with ${KNOWLEDGE_MARKER} at ${where}`);
  }
  const body = inputText.slice(KNOWLEDGE_MARKER.length);
  let first = body.length;
  for (const marker of TURN_MARKERS) {
    const pos = body.indexOf(marker);
    if (pos !== -1 && pos < first) first = pos;
  }
  return { knowledge: body.slice(0, first), contextBlock: body.slice(first) };
}

/** Drop oldest whitespace tokens of the history block to fit the budget. */
export function truncateInput(input: ModelInput, maxTokens: number): ModelInput {
  const knowledgeTokens = input.knowledge.split(/\s+/).filter(Boolean);
  const contextTokens = input.contextBlock.split(/\s+/).filter(Boolean);
  const budget = maxTokens - knowledgeTokens.length;
  if (budget >= contextTokens.length) {
    return input;
  }
  const kept = budget > 0 ? contextTokens.slice(contextTokens.length - budget) : [];
  return { knowledge: input.knowledge, contextBlock: kept.join(" ") };
}

export interface Generator {
  readonly modelId: string;
  generate(row: GenInputRow, input: ModelInput): GenerationRow;
}

class EchoGenerator implements Generator {
  constructor(readonly modelId: string) {}

  generate(row: GenInputRow, input: ModelInput): GenerationRow {
    return { example_id: row.example_id, response: input.knowledge };
  }
}

export function loadGenerator(modelId: string): Generator {
  if (modelId === "stub-echo") {
    return new EchoGenerator(modelId);
  }
  if (existsSync(modelId)) {
    throw modelError(
      `model directory ${modelId} found, but no inference runtime is bundled; use a stub-* model`,
    );
  }
  throw modelError(`cannot load generator model ${modelId}`);
}

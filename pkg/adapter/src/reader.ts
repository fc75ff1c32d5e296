/**
 * Span reader backends.
 *
 * Two stubs ship with the repo so the whole pipeline runs with no model
 * downloads: "stub-constant" emits all-zero scores (decode then falls back
 * to its position tie-break), and "stub-hash" emits digest-derived scores
 * that are deterministic per (model, example, window, position). Any other
 * model id is resolved as a local model directory; a missing directory is a
 * load failure (exit 4). Score values are raw logit-like reals; decode only
 * needs their order.
 */

import { createHash } from "node:crypto";
import { existsSync } from "node:fs";

import type { ScoreRow, WindowRow } from "./types.js";
import { modelError } from "./types.js";

export interface Reader {
  readonly modelId: string;
  score(window: WindowRow): ScoreRow;
}

class ConstantReader implements Reader {
  constructor(readonly modelId: string) {}

  score(window: WindowRow): ScoreRow {
    const count = window.tokens.length;
    return {
      example_id: window.example_id,
      window_index: window.window_index,
      start_scores: new Array<number>(count).fill(0),
      end_scores: new Array<number>(count).fill(0),
    };
  }
}

class HashReader implements Reader {
  constructor(readonly modelId: string) {}

  private value(window: WindowRow, kind: string, pos: number): number {
    const key = `${this.modelId}|${window.example_id}|${window.window_index}|${kind}|${pos}`;
    const digest = createHash("sha256").update(key).digest();
    return (digest.readUInt32BE(0) % 1000) / 100;
  }

  score(window: WindowRow): ScoreRow {
    const count = window.tokens.length;
    const starts: number[] = [];
    const ends: number[] = [];
    for (let i = 0; i < count; i++) {
      starts.push(this.value(window, "s", i));
      ends.push(this.value(window, "e", i));
    }
    return {
      example_id: window.example_id,
      window_index: window.window_index,
      start_scores: starts,
      end_scores: ends,
    };
  }
}

export function loadReader(modelId: string): Reader {
  if (modelId === "stub-constant") {
    return new ConstantReader(modelId);
  }
  if (modelId === "stub-hash" || modelId.startsWith("stub-hash:")) {
    return new HashReader(modelId);
  }
  if (existsSync(modelId)) {
    // a local checkpoint directory would be loaded here; no runtime ships with the stubs
    throw modelError(
      `model directory ${modelId} found, but no inference runtime is bundled; use a stub-* model`,
    );
  }
  throw modelError(`cannot load reader model ${modelId}`);
}

/** Whitespace tokenization with character offsets, for --emit-offsets. */
export function whitespaceOffsets(text: string): { text: string; char_start: number; char_end: number }[] {
  const tokens: { text: string; char_start: number; char_end: number }[] = [];
  const re = /\S+/g;
  let match: RegExpExecArray | null;
  while ((match = re.exec(text)) !== null) {
    tokens.push({ text: match[0], char_start: match.index, char_end: match.index + match[0].length });
  }
  return tokens;
}

/**
 * Strict JSONL I/O. Schema problems always name the file and 1-based line.
 * Output files are written atomically (temp + rename) so a crashed run
 * never leaves a half-written file for the harness to consume.
 */

import { readFileSync, renameSync, writeFileSync } from "node:fs";

import { schemaError } from "./types.js";

export function readJsonl(path: string): { line: number; row: unknown }[] {
  let raw: string;
  try {
    raw = readFileSync(path, "utf-8");
  } catch (err) {
    throw schemaError(`cannot read ${path}: ${(err as Error).message}`);
  }
  const rows: { line: number; row: unknown }[] = [];
  const lines = raw.split("\n");
  for (let i = 0; i < lines.length; i++) {
    const text = lines[i];
    if (text === "" && i === lines.length - 1) continue; // trailing newline
    try {
      rows.push({ line: i + 1, row: JSON.parse(text) });
    } catch {
      throw schemaError(`invalid JSON at ${path}:${i + 1}`);
    }
  }
  return rows;
}

/** Canonical line rendering: keys sorted, UTF-8, LF. Matches the harness. */
export function toLine(row: Record<string, unknown>): string {
  const sorted = sortKeysDeep(row);
  return JSON.stringify(sorted) + "\n";
}

function sortKeysDeep(value: unknown): unknown {
  if (Array.isArray(value)) {
    return value.map(sortKeysDeep);
  }
  if (value !== null && typeof value === "object") {
    const out: Record<string, unknown> = {};
    for (const key of Object.keys(value as Record<string, unknown>).sort()) {
      out[key] = sortKeysDeep((value as Record<string, unknown>)[key]);
    }
    return out;
  }
  return value;
}

export function writeJsonlAtomic(path: string, rows: Record<string, unknown>[]): void {
  const tmp = `${path}.tmp-${process.pid}`;
  writeFileSync(tmp, rows.map(toLine).join(""), "utf-8");
  renameSync(tmp, path);
}

export function requireField<T>(
  row: Record<string, unknown>,
  field: string,
  file: string,
  line: number,
): T {
  if (!(field in row) || row[field] === undefined) {
    throw schemaError(`missing field "${field}" at ${file}:${line}`);
  }
  return row[field] as T;
}

export function asObject(value: unknown, file: string, line: number): Record<string, unknown> {
  if (value === null || typeof value !== "object" || Array.isArray(value)) {
    throw schemaError(`expected an object at ${file}:${line}`);
  }
  return value as Record<string, unknown>;
}

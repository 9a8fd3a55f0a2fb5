// Wire format shared with the evaluation client: one JSON object per
// line in each direction, responses matched to requests by id only.

import type { JsonValue } from "./canonical.js";

export const KNOWN_TASKS = ["nli", "sle", "ner", "qg", "qa", "lerc", "filter"] as const;
export type TaskName = (typeof KNOWN_TASKS)[number];

export interface RequestFrame {
  id: string;
  task: string;
  payload: Record<string, JsonValue>;
}

export interface ResponseFrame {
  id: string;
  ok: boolean;
  result?: Record<string, JsonValue>;
  error?: string;
}

function isPlainObject(value: unknown): value is Record<string, JsonValue> {
  return typeof value === "object" && value !== null && !Array.isArray(value);
}

export function parseRequestLine(line: string): RequestFrame | null {
  let frame: unknown;
  try {
    frame = JSON.parse(line);
  } catch {
    return null;
  }
  if (!isPlainObject(frame)) return null;
  const { id, task } = frame;
  if (typeof id !== "string" || typeof task !== "string") return null;
  const payload = frame["payload"] ?? {};
  if (!isPlainObject(payload)) return null;
  return { id, task, payload };
}

export function parseResponseLine(line: string): ResponseFrame | null {
  let frame: unknown;
  try {
    frame = JSON.parse(line);
  } catch {
    return null;
  }
  if (!isPlainObject(frame)) return null;
  const { id, ok } = frame;
  if (typeof id !== "string" || typeof ok !== "boolean") return null;
  if (ok) {
    if (!isPlainObject(frame["result"])) return null;
    return { id, ok, result: frame["result"] };
  }
  const error = frame["error"];
  if (typeof error !== "string" || error.length === 0) return null;
  return { id, ok, error };
}

function isNumberIn(value: JsonValue | undefined, lo: number, hi: number): boolean {
  return typeof value === "number" && Number.isFinite(value) && value >= lo && value <= hi;
}

function isStringArray(value: JsonValue | undefined): boolean {
  return Array.isArray(value) && value.every((v) => typeof v === "string");
}

// Returns null when the result is well formed for the task, otherwise a
// human-readable reason. Mirrors what the client accepts.
export function resultSchemaError(
  task: TaskName,
  result: Record<string, JsonValue>,
): string | null {
  switch (task) {
    case "nli":
      return isNumberIn(result["entailment"], 0, 1)
        ? null
        : "nli result needs 'entailment' in [0,1]";
    case "sle":
      return isNumberIn(result["sle"], 0, 4) ? null : "sle result needs 'sle' in [0,4]";
    case "lerc":
      return isNumberIn(result["overlap"], 1, 5)
        ? null
        : "lerc result needs 'overlap' in [1,5]";
    case "filter":
      return typeof result["answerable"] === "boolean"
        ? null
        : "filter result needs boolean 'answerable'";
    case "ner":
      return isStringArray(result["entities"])
        ? null
        : "ner result needs 'entities' as a string list";
    case "qa":
      return typeof result["answer"] === "string"
        ? null
        : "qa result needs string 'answer'";
    case "qg": {
      const items = result["items"];
      if (!Array.isArray(items)) return "qg result needs an 'items' list";
      for (const item of items) {
        if (
          typeof item !== "object" ||
          item === null ||
          Array.isArray(item) ||
          typeof (item as Record<string, JsonValue>)["question"] !== "string" ||
          typeof (item as Record<string, JsonValue>)["answer"] !== "string"
        ) {
          return "qg items need string 'question' and 'answer'";
        }
      }
      return null;
    }
  }
}

// Canonical JSON matching the Python client: NFC-normalized strings,
// keys sorted by code point, compact separators, non-ASCII kept raw.
// Byte-identical canonical text is what makes content-hash request ids
// agree across the two implementations.

import { createHash } from "node:crypto";

export type JsonValue =
  | null
  | boolean
  | number
  | string
  | JsonValue[]
  | { [key: string]: JsonValue };

function normalize(value: JsonValue): JsonValue {
  if (typeof value === "string") {
    return value.normalize("NFC");
  }
  if (Array.isArray(value)) {
    return value.map(normalize);
  }
  if (value !== null && typeof value === "object") {
    const out: { [key: string]: JsonValue } = {};
    for (const [k, v] of Object.entries(value)) {
      out[k.normalize("NFC")] = normalize(v);
    }
    return out;
  }
  return value;
}

// String sort by Unicode code point, not UTF-16 code unit; the two
// differ once astral-plane characters appear in keys.
export function codePointCompare(a: string, b: string): number {
  const as = Array.from(a);
  const bs = Array.from(b);
  const n = Math.min(as.length, bs.length);
  for (let i = 0; i < n; i++) {
    const ca = as[i]!.codePointAt(0)!;
    const cb = bs[i]!.codePointAt(0)!;
    if (ca !== cb) return ca - cb;
  }
  return as.length - bs.length;
}

const SHORT_ESCAPES: { [code: number]: string } = {
  0x08: "\\b",
  0x09: "\\t",
  0x0a: "\\n",
  0x0c: "\\f",
  0x0d: "\\r",
  0x22: '\\"',
  0x5c: "\\\\",
};

function escapeString(s: string): string {
  let out = '"';
  for (const ch of s) {
    const code = ch.codePointAt(0)!;
    const short = SHORT_ESCAPES[code];
    if (short !== undefined) {
      out += short;
    } else if (code < 0x20) {
      out += "\\u" + code.toString(16).padStart(4, "0");
    } else {
      out += ch;
    }
  }
  return out + '"';
}

function writeValue(value: JsonValue): string {
  if (value === null) return "null";
  if (typeof value === "boolean") return value ? "true" : "false";
  if (typeof value === "number") {
    if (!Number.isFinite(value)) {
      throw new Error("non-finite number in payload");
    }
    // Shortest round-trip decimal. JSON.parse collapses 1.0 to 1, so a
    // float-typed whole number would canonicalize as an integer here;
    // the wire payloads are all strings, so the implementations agree.
    return String(value);
  }
  if (typeof value === "string") return escapeString(value);
  if (Array.isArray(value)) {
    return "[" + value.map(writeValue).join(",") + "]";
  }
  const keys = Object.keys(value).sort(codePointCompare);
  const parts = keys.map((k) => escapeString(k) + ":" + writeValue(value[k]!));
  return "{" + parts.join(",") + "}";
}

export function canonicalPayload(payload: JsonValue): string {
  return writeValue(normalize(payload));
}

export function requestId(task: string, payload: JsonValue): string {
  const body = canonicalPayload({ task, payload });
  return createHash("sha256").update(Buffer.from(body, "utf8")).digest("hex");
}

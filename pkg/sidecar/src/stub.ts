// Deterministic stand-in for the real model adapters. Every score is a
// pure function of the canonical payload through fnv1a64, so any two
// conforming workers return identical numbers for identical requests.

import { canonicalPayload, codePointCompare, type JsonValue } from "./canonical.js";
import { fnv1a64Utf8, unitInterval } from "./fnv.js";

export class UnknownTaskError extends Error {
  constructor(task: string) {
    super(`unknown task: ${task}`);
  }
}

const CAP_RUN = /[A-Z][A-Za-z]*(?: [A-Z][A-Za-z]*)*/g;

// Same whitespace set the client's str.split() uses, which is wider
// than /\s/ (adds U+1C..U+1F and U+85, lacks U+FEFF).
const WS_RUN = /[\t\n\v\f\r \x1c-\x1f\x85\xa0  - \u2028\u2029  　]+/g;
 
function splitWords(text: string): string[] {
  return text.split(WS_RUN).filter((w) => w.length > 0);
}

function payloadString(payload: Record<string, JsonValue>, key: string): string {
  const value = payload[key];
  return typeof value === "string" ? value : "";
}

export function stubResult(
  task: string,
  payload: Record<string, JsonValue>,
): Record<string, JsonValue> {
  const canon = canonicalPayload(payload);
  const h = fnv1a64Utf8(canon);
  const u = unitInterval(h);
  switch (task) {
    case "nli":
      return { entailment: u };
    case "sle":
      return { sle: 4.0 * u };
    case "lerc":
      return { overlap: 1.0 + 4.0 * u };
    case "filter":
      return { answerable: h % 4n !== 0n };
    case "ner": {
      const text = payloadString(payload, "text");
      const seen = new Set<string>();
      for (const m of text.matchAll(CAP_RUN)) {
        seen.add(m[0].toLowerCase());
      }
      return { entities: Array.from(seen).sort(codePointCompare) };
    }
    case "qg": {
      const text = payloadString(payload, "text").normalize("NFC");
      const words = splitWords(text);
      if (words.length === 0) {
        return { items: [] };
      }
      const items: JsonValue[] = [];
      const count = Number(1n + (h % 3n));
      for (let j = 0; j < count; j++) {
        const hj = fnv1a64Utf8(text + "\x00" + String(j));
        const answer = words[Number(hj % BigInt(words.length))]!;
        items.push({ question: `q${j} ${answer}`, answer });
      }
      return { items };
    }
    case "qa": {
      const question = payloadString(payload, "question").normalize("NFC");
      const words = splitWords(payloadString(payload, "context").normalize("NFC"));
      if (words.length === 0) {
        return { answer: "" };
      }
      const hq = fnv1a64Utf8(question);
      return { answer: words[Number(hq % BigInt(words.length))]! };
    }
    default:
      throw new UnknownTaskError(task);
  }
}

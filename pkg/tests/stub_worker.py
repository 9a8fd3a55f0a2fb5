"""Deterministic line-protocol scoring worker used by the test suite.

Scores are pure functions of the canonical payload via a 64-bit FNV-1a
hash, so any two runs (and any conforming reimplementation) produce the
same numbers. Flags simulate broken workers for transport tests.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import unicodedata

FNV_OFFSET = 0xCBF29CE484222325
FNV_PRIME = 0x100000001B3
MASK64 = (1 << 64) - 1

_CAP_RUN = re.compile(r"[A-Z][A-Za-z]*(?: [A-Z][A-Za-z]*)*")


def _normalize(value):
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, dict):
        return {_normalize(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


def canonical_payload(payload) -> str:
    return json.dumps(
        _normalize(payload), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def fnv1a64(data: bytes) -> int:
    h = FNV_OFFSET
    for b in data:
        h ^= b
        h = (h * FNV_PRIME) & MASK64
    return h


def unit_interval(h: int) -> float:
    return h / 2.0**64


def stub_result(task: str, payload: dict) -> dict:
    canon = canonical_payload(payload)
    h = fnv1a64(canon.encode("utf-8"))
    u = unit_interval(h)
    if task == "nli":
        return {"entailment": u}
    if task == "sle":
        return {"sle": 4.0 * u}
    if task == "lerc":
        return {"overlap": 1.0 + 4.0 * u}
    if task == "filter":
        return {"answerable": (h % 4) != 0}
    if task == "ner":
        text = payload.get("text", "")
        ents = sorted({m.group(0).lower() for m in _CAP_RUN.finditer(text)})
        return {"entities": ents}
    if task == "qg":
        text = unicodedata.normalize("NFC", payload.get("text", ""))
        words = text.split()
        if not words:
            return {"items": []}
        items = []
        for j in range(1 + h % 3):
            hj = fnv1a64((text + "\x00" + str(j)).encode("utf-8"))
            answer = words[hj % len(words)]
            items.append({"question": f"q{j} {answer}", "answer": answer})
        return {"items": items}
    if task == "qa":
        question = unicodedata.normalize("NFC", payload.get("question", ""))
        words = unicodedata.normalize("NFC", payload.get("context", "")).split()
        if not words:
            return {"answer": ""}
        return {"answer": words[fnv1a64(question.encode("utf-8")) % len(words)]}
    raise KeyError(task)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--drop-every", type=int, default=0)
    parser.add_argument("--garbage-every", type=int, default=0)
    parser.add_argument("--fail-task", default=None)
    parser.add_argument("--shuffle", action="store_true")
    args = parser.parse_args()

    held: list[str] = []

    def emit(line: str) -> None:
        # --shuffle holds back one response and emits pairs reversed; the
        # client's in-flight window must be >= 2 for this to be safe
        if args.shuffle:
            held.append(line)
            if len(held) == 2:
                sys.stdout.write(held[1])
                sys.stdout.write(held[0])
                held.clear()
                sys.stdout.flush()
        else:
            sys.stdout.write(line)
            sys.stdout.flush()

    seen = 0
    for raw in sys.stdin:
        if not raw.strip():
            continue
        seen += 1
        if args.drop_every and seen % args.drop_every == 0:
            continue
        if args.garbage_every and seen % args.garbage_every == 0:
            emit("this is not json\n")
            continue
        try:
            frame = json.loads(raw)
            rid = frame["id"]
            task = frame["task"]
            payload = frame.get("payload", {})
        except (json.JSONDecodeError, KeyError, TypeError):
            emit(json.dumps({"id": "", "ok": False, "error": "malformed frame"}) + "\n")
            continue
        if args.fail_task and task == args.fail_task:
            response = {"id": rid, "ok": False, "error": f"induced failure for {task}"}
        else:
            try:
                response = {"id": rid, "ok": True, "result": stub_result(task, payload)}
            except KeyError:
                response = {"id": rid, "ok": False, "error": "unknown task"}
        emit(json.dumps(response, ensure_ascii=False, sort_keys=True) + "\n")
    for line in held:
        sys.stdout.write(line)
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    sys.exit(main())

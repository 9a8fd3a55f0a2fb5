"""Line-protocol client for external scoring workers.

Requests and responses are single JSON lines. A request is
{"id", "task", "payload"}; a response echoes the id with either
{"ok": true, "result": {...}} or {"ok": false, "error": "..."}.
Request ids are content hashes, so equal work is sent once, cache
entries never go stale, and fixture files can replay a whole run
byte for byte without any worker present.
"""

from __future__ import annotations

import hashlib
import json
import queue
import shlex
import subprocess
import threading
import unicodedata
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    ConfigError,
    FixtureMiss,
    ScorerError,
    TransportError,
    ValidationError,
)
from .faithfulness import ScoreMatrix
from .textcore import Document

KNOWN_TASKS = ("nli", "sle", "ner", "qg", "qa", "lerc", "filter")


def _normalize(value):
    if isinstance(value, str):
        return unicodedata.normalize("NFC", value)
    if isinstance(value, dict):
        return {_normalize(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_normalize(v) for v in value]
    return value


def canonical_payload(payload: dict) -> str:
    """Canonical JSON: NFC strings, sorted keys, no insignificant whitespace."""
    return json.dumps(
        _normalize(payload), sort_keys=True, ensure_ascii=False, separators=(",", ":")
    )


def request_id(task: str, payload: dict) -> str:
    body = canonical_payload({"task": task, "payload": payload})
    return hashlib.sha256(body.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ScorerRequest:
    id: str
    task: str
    payload: dict

    @classmethod
    def make(cls, task: str, payload: dict) -> "ScorerRequest":
        return cls(request_id(task, payload), task, payload)

    def to_line(self) -> str:
        return (
            json.dumps(
                {"id": self.id, "task": self.task, "payload": _normalize(self.payload)},
                ensure_ascii=False,
                sort_keys=True,
                separators=(",", ":"),
            )
            + "\n"
        )


@dataclass(frozen=True)
class ScorerResponse:
    id: str
    ok: bool
    result: dict | None
    error: str | None

    @classmethod
    def from_record(cls, record: dict) -> "ScorerResponse":
        if not isinstance(record, dict):
            raise TransportError("response frame is not an object")
        rid = record.get("id")
        ok = record.get("ok")
        if not isinstance(rid, str) or not isinstance(ok, bool):
            raise TransportError(f"malformed response frame: {record!r}")
        if ok:
            result = record.get("result")
            if not isinstance(result, dict):
                raise TransportError(f"ok response without result object: {rid}")
            return cls(rid, True, result, None)
        return cls(rid, False, None, str(record.get("error", "unknown error")))

    def to_record(self) -> dict:
        if self.ok:
            return {"id": self.id, "ok": True, "result": self.result}
        return {"id": self.id, "ok": False, "error": self.error}


class SubprocessTransport:
    """Talks to one long-lived worker process over stdin/stdout lines.

    Up to max_in_flight requests ride the pipe at once; responses may
    come back in any order and are matched by id. A dedicated reader
    thread feeds a queue so slow or silent workers hit the timeout
    instead of blocking forever.
    """

    def __init__(
        self,
        command: str | Sequence[str],
        max_in_flight: int = 4,
        timeout: float = 120.0,
    ):
        if max_in_flight < 1:
            raise ConfigError("max_in_flight must be >= 1")
        if timeout <= 0:
            raise ConfigError("timeout must be positive")
        self._argv = shlex.split(command) if isinstance(command, str) else list(command)
        if not self._argv:
            raise ConfigError("empty scorer command")
        self._max_in_flight = max_in_flight
        self._timeout = timeout
        self._proc: subprocess.Popen | None = None
        self._lines: queue.Queue[str | None] | None = None
        self._lock = threading.Lock()

    def _ensure_process(self) -> subprocess.Popen:
        if self._proc is None or self._proc.poll() is not None:
            try:
                self._proc = subprocess.Popen(
                    self._argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    encoding="utf-8",
                    bufsize=1,
                )
            except OSError as exc:
                raise TransportError(f"cannot start scorer {self._argv!r}: {exc}") from exc
            lines: queue.Queue[str | None] = queue.Queue()
            self._lines = lines
            proc = self._proc

            def pump() -> None:
                for line in proc.stdout:
                    lines.put(line)
                lines.put(None)

            threading.Thread(target=pump, daemon=True).start()
        return self._proc

    def request_many(self, requests: Sequence[ScorerRequest]) -> dict[str, ScorerResponse]:
        if not requests:
            return {}
        with self._lock:
            proc = self._ensure_process()
            assert self._lines is not None
            window = threading.Semaphore(self._max_in_flight)
            write_error: list[BaseException] = []

            def feed() -> None:
                try:
                    for req in requests:
                        window.acquire()
                        proc.stdin.write(req.to_line())
                        proc.stdin.flush()
                except BaseException as exc:  # surfaced by the reader below
                    write_error.append(exc)

            writer = threading.Thread(target=feed, daemon=True)
            writer.start()
            pending = {req.id for req in requests}
            got: dict[str, ScorerResponse] = {}
            while len(got) < len(pending):
                try:
                    line = self._lines.get(timeout=self._timeout)
                except queue.Empty:
                    raise TransportError(
                        f"scorer timed out with {len(pending) - len(got)} "
                        "responses outstanding"
                    ) from None
                if line is None:
                    code = proc.poll()
                    raise TransportError(
                        f"scorer stream closed with {len(pending) - len(got)} "
                        f"responses outstanding (exit code {code})"
                    )
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise TransportError(f"non-JSON frame from scorer: {line!r}") from exc
                resp = ScorerResponse.from_record(record)
                if resp.id not in pending:
                    raise TransportError(f"unexpected response id {resp.id}")
                if resp.id in got:
                    raise TransportError(f"duplicate response id {resp.id}")
                got[resp.id] = resp
                window.release()
            writer.join(timeout=5)
            if write_error:
                raise TransportError(f"failed writing to scorer: {write_error[0]}")
            return got

    def close(self) -> None:
        if self._proc is not None and self._proc.poll() is None:
            try:
                self._proc.stdin.close()
                self._proc.wait(timeout=5)
            except (OSError, subprocess.TimeoutExpired):
                self._proc.kill()
        self._proc = None


class FixtureTransport:
    """Replays recorded responses; any unknown id aborts the run."""

    def __init__(self, path: str | Path):
        self._path = str(path)
        self._table = load_fixture(path)

    def request_many(self, requests: Sequence[ScorerRequest]) -> dict[str, ScorerResponse]:
        got = {}
        for req in requests:
            if req.id not in self._table:
                raise FixtureMiss(req.id)
            got[req.id] = self._table[req.id]
        return got

    def close(self) -> None:
        pass


def load_fixture(path: str | Path) -> dict[str, ScorerResponse]:
    table: dict[str, ScorerResponse] = {}
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot open fixture file {path}: {exc}") from exc
    with fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            rid = record.get("id")
            response = record.get("response")
            if not isinstance(rid, str) or not isinstance(response, dict):
                raise ValidationError(f"{path}:{lineno}: need 'id' and 'response'")
            if rid in table:
                raise ValidationError(f"{path}:{lineno}: duplicate fixture id {rid}")
            resp = ScorerResponse.from_record(response)
            if resp.id != rid:
                raise ValidationError(f"{path}:{lineno}: envelope id mismatch")
            table[rid] = resp
    return table


def write_fixture(path: str | Path, responses: dict[str, ScorerResponse]) -> None:
    """Write responses sorted by id; rewriting the same data is byte-stable."""
    lines = []
    for rid in sorted(responses):
        record = {"id": rid, "response": responses[rid].to_record()}
        lines.append(
            json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":"))
        )
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")


class CacheStore:
    """Content-addressed response store: one JSON file per request id."""

    def __init__(self, directory: str | Path):
        self._dir = Path(directory)
        self._dir.mkdir(parents=True, exist_ok=True)

    def _path(self, rid: str) -> Path:
        if not rid or any(c not in "0123456789abcdef" for c in rid):
            raise ValidationError(f"invalid request id for cache: {rid!r}")
        return self._dir / f"{rid}.json"

    def get(self, rid: str) -> ScorerResponse | None:
        path = self._path(rid)
        try:
            record = json.loads(path.read_text(encoding="utf-8"))
        except OSError:
            return None
        except json.JSONDecodeError as exc:
            raise ValidationError(f"corrupt cache entry {path}: {exc}") from exc
        return ScorerResponse.from_record(record)

    def put(self, response: ScorerResponse) -> None:
        path = self._path(response.id)
        tmp = path.with_suffix(".tmp")
        tmp.write_text(
            json.dumps(
                response.to_record(),
                ensure_ascii=False,
                sort_keys=True,
                separators=(",", ":"),
            ),
            encoding="utf-8",
        )
        tmp.replace(path)


class ScorerClient:
    """Batches, dedupes, caches and optionally records scorer traffic."""

    def __init__(self, transport, cache: CacheStore | None = None, record: bool = False):
        self._transport = transport
        self._cache = cache
        self._recorded: dict[str, ScorerResponse] | None = {} if record else None
        self._lock = threading.Lock()

    def score_batch(self, requests: Sequence[ScorerRequest]) -> list[ScorerResponse]:
        if not requests:
            return []
        unique: dict[str, ScorerRequest] = {}
        for req in requests:
            seen = unique.get(req.id)
            if seen is not None:
                if canonical_payload(seen.payload) != canonical_payload(req.payload) or (
                    seen.task != req.task
                ):
                    raise ValidationError(f"hash collision on request id {req.id}")
                continue
            unique[req.id] = req
        resolved: dict[str, ScorerResponse] = {}
        if self._cache is not None:
            for rid in unique:
                hit = self._cache.get(rid)
                if hit is not None:
                    resolved[rid] = hit
        missing = [unique[rid] for rid in unique if rid not in resolved]
        if missing:
            fresh = self._transport.request_many(missing)
            for req in missing:
                if req.id not in fresh:
                    raise TransportError(f"transport dropped request {req.id}")
            resolved.update(fresh)
            if self._cache is not None:
                for resp in fresh.values():
                    if resp.ok:
                        self._cache.put(resp)
        if self._recorded is not None:
            with self._lock:
                for rid, resp in resolved.items():
                    prior = self._recorded.get(rid)
                    if prior is not None and prior != resp:
                        raise ValidationError(
                            f"conflicting responses recorded for id {rid}"
                        )
                    self._recorded[rid] = resp
        return [resolved[req.id] for req in requests]

    def score_task(self, task: str, payloads: Sequence[dict]) -> list[dict]:
        """Convenience wrapper that unwraps results and raises on failures."""
        requests = [ScorerRequest.make(task, p) for p in payloads]
        out = []
        for resp in self.score_batch(requests):
            if not resp.ok:
                raise ScorerError(f"task {task} failed for {resp.id}: {resp.error}")
            out.append(resp.result)
        return out

    @property
    def recorded(self) -> dict[str, ScorerResponse]:
        if self._recorded is None:
            raise ConfigError("client was not created with record=True")
        return dict(self._recorded)

    def write_fixture(self, path: str | Path) -> None:
        write_fixture(path, self.recorded)

    def close(self) -> None:
        self._transport.close()

    def __enter__(self) -> "ScorerClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def nli_matrix(source: Document, output: Document, scorer: ScorerClient) -> ScoreMatrix:
    """Entailment matrix: rows = source sentences (premises), columns =
    output sentences (hypotheses), filled in row-major request order."""
    premises = source.sentence_texts()
    hypotheses = output.sentence_texts()
    payloads = [
        {"premise": prem, "hypothesis": hyp} for prem in premises for hyp in hypotheses
    ]
    results = scorer.score_task("nli", payloads)
    rows, cols = len(premises), len(hypotheses)
    values = []
    it = iter(results)
    for _ in range(rows):
        row = []
        for _ in range(cols):
            res = next(it)
            score = res.get("entailment")
            if not isinstance(score, (int, float)):
                raise ScorerError("nli result needs a numeric 'entailment'")
            row.append(float(score))
        values.append(row)
    return ScoreMatrix(values)


def sle_scores_via_scorer(doc: Document, scorer: ScorerClient) -> list[float]:
    """One simplicity level per sentence via the 'sle' task."""
    results = scorer.score_task(
        "sle", [{"sentence": text} for text in doc.sentence_texts()]
    )
    values = []
    for res in results:
        value = res.get("sle")
        if not isinstance(value, (int, float)):
            raise ScorerError("sle result needs a numeric 'sle'")
        values.append(float(value))
    return values


def entities_via_scorer(doc: Document, scorer: ScorerClient) -> list[str]:
    """Entity mention strings from the 'ner' task (un-normalized)."""
    results = scorer.score_task("ner", [{"text": doc.raw}])
    ents = results[0].get("entities")
    if not isinstance(ents, list) or any(not isinstance(e, str) for e in ents):
        raise ScorerError("ner result needs a list of entity strings")
    return list(ents)

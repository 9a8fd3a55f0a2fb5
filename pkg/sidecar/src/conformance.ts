// Black-box conformance checks for any process claiming to speak the
// scoring line protocol. The suite never relies on response order, so
// a worker that reorders its output (shuffle) still passes; what it
// must not do is drop, duplicate, or garble responses.

import { spawn, type ChildProcessWithoutNullStreams } from "node:child_process";
import { createInterface } from "node:readline";

import { canonicalPayload, requestId, type JsonValue } from "./canonical.js";
import {
  KNOWN_TASKS,
  parseResponseLine,
  resultSchemaError,
  type ResponseFrame,
  type TaskName,
} from "./protocol.js";

export interface CheckOutcome {
  name: string;
  ok: boolean;
  detail: string;
}

export interface ConformanceReport {
  ok: boolean;
  checks: CheckOutcome[];
}

export interface ConformanceOptions {
  requests?: number;
  timeoutMs?: number;
}

const DEFAULT_REQUESTS = 1000;
const DEFAULT_TIMEOUT_MS = 30_000;

interface StreamResult {
  raw: string[];
  timedOut: boolean;
  spawnError: string | null;
  elapsedMs: number;
}

// Writes every line, closes stdin, then collects stdout lines until the
// worker closes its end or the deadline passes.
function streamThrough(
  command: string[],
  lines: string[],
  timeoutMs: number,
): Promise<StreamResult> {
  return new Promise((resolve) => {
    const started = Date.now();
    const raw: string[] = [];
    let child: ChildProcessWithoutNullStreams;
    try {
      child = spawn(command[0]!, command.slice(1), {
        stdio: ["pipe", "pipe", "pipe"],
      });
    } catch (err) {
      resolve({ raw, timedOut: false, spawnError: String(err), elapsedMs: 0 });
      return;
    }
    let settled = false;
    const finish = (timedOut: boolean, spawnError: string | null) => {
      if (settled) return;
      settled = true;
      clearTimeout(timer);
      child.kill("SIGKILL");
      resolve({ raw, timedOut, spawnError, elapsedMs: Date.now() - started });
    };
    const timer = setTimeout(() => finish(true, null), timeoutMs);
    child.on("error", (err) => finish(false, String(err)));
    child.stderr.resume();
    const rl = createInterface({ input: child.stdout, crlfDelay: Infinity });
    rl.on("line", (line) => {
      if (line.trim().length > 0) raw.push(line);
    });
    rl.on("close", () => finish(false, null));
    child.stdin.on("error", () => {
      // Worker may exit before reading everything; the missing
      // responses are the observable failure, not the EPIPE.
    });
    for (const line of lines) {
      child.stdin.write(line);
    }
    child.stdin.end();
  });
}

function requestLine(task: string, payload: Record<string, JsonValue>): string {
  const id = requestId(task, payload as JsonValue);
  return JSON.stringify({ id, task, payload }) + "\n";
}

function truncateIds(ids: string[], keep = 10): string {
  const head = ids.slice(0, keep).join(", ");
  const rest = ids.length - Math.min(ids.length, keep);
  return rest > 0 ? `${head} (+${rest} more)` : head;
}

interface ParsedStream {
  frames: ResponseFrame[];
  malformed: string | null;
}

function parseAll(raw: string[]): ParsedStream {
  const frames: ResponseFrame[] = [];
  for (const line of raw) {
    const frame = parseResponseLine(line);
    if (frame === null) {
      const snippet = line.length > 60 ? line.slice(0, 57) + "..." : line;
      return { frames, malformed: `malformed frame: ${JSON.stringify(snippet)}` };
    }
    frames.push(frame);
  }
  return { frames, malformed: null };
}

function transportFailure(result: StreamResult): string | null {
  if (result.spawnError !== null) return `worker failed to start: ${result.spawnError}`;
  if (result.timedOut) return "worker did not finish before the deadline";
  return null;
}

const SCHEMA_PAYLOADS: Record<TaskName, Record<string, JsonValue>> = {
  nli: { premise: "Otters swim in rivers.", hypothesis: "An otter can swim." },
  sle: { sentence: "The otter swims." },
  ner: { text: "Neil Armstrong walked in Lyon." },
  qg: { text: "Paris is the capital of France" },
  qa: { question: "q0 Paris", context: "Paris is the capital of France" },
  lerc: {
    question: "q0 Paris",
    context: "Paris is the capital of France",
    gold: "Paris",
    predicted: "Paris",
  },
  filter: { question: "q0 Paris", context: "Paris is the capital of France" },
};

async function checkSchema(command: string[], timeoutMs: number): Promise<CheckOutcome> {
  const name = "schema";
  const lines: string[] = [];
  const expectById = new Map<string, TaskName>();
  for (const task of KNOWN_TASKS) {
    const payload = SCHEMA_PAYLOADS[task];
    expectById.set(requestId(task, payload as JsonValue), task);
    lines.push(requestLine(task, payload));
  }
  const unknownId = requestId("no-such-task", { x: "y" });
  lines.push(JSON.stringify({ id: unknownId, task: "no-such-task", payload: { x: "y" } }) + "\n");
  lines.push("this line is not a json frame\n");

  const result = await streamThrough(command, lines, timeoutMs);
  const hard = transportFailure(result);
  if (hard !== null) return { name, ok: false, detail: hard };
  const { frames, malformed } = parseAll(result.raw);
  if (malformed !== null) return { name, ok: false, detail: malformed };

  const byId = new Map<string, ResponseFrame[]>();
  for (const frame of frames) {
    const bucket = byId.get(frame.id) ?? [];
    bucket.push(frame);
    byId.set(frame.id, bucket);
  }
  for (const [id, task] of expectById) {
    const got = byId.get(id);
    if (got === undefined || got.length !== 1) {
      return { name, ok: false, detail: `expected one response for ${task}, got ${got?.length ?? 0}` };
    }
    const frame = got[0]!;
    if (!frame.ok) {
      return { name, ok: false, detail: `${task} answered ok=false: ${frame.error}` };
    }
    const schemaProblem = resultSchemaError(task, frame.result ?? {});
    if (schemaProblem !== null) {
      return { name, ok: false, detail: `${task}: ${schemaProblem}` };
    }
  }
  const unknown = byId.get(unknownId);
  if (unknown === undefined || unknown.length !== 1 || unknown[0]!.ok) {
    return { name, ok: false, detail: "unknown task must get an ok=false response" };
  }
  if (!(unknown[0]!.error ?? "").includes("unknown task")) {
    return { name, ok: false, detail: `unknown-task error should say so, got: ${unknown[0]!.error}` };
  }
  const malformedInput = byId.get("");
  if (malformedInput === undefined || malformedInput.length !== 1 || malformedInput[0]!.ok) {
    return { name, ok: false, detail: "non-JSON input line must get an ok=false response" };
  }
  return { name, ok: true, detail: `${KNOWN_TASKS.length} task schemas, unknown-task and malformed-input handling` };
}

function numberedRequests(count: number): { ids: string[]; lines: string[] } {
  const ids: string[] = [];
  const lines: string[] = [];
  for (let i = 0; i < count; i++) {
    const payload = { sentence: `conformance sentence number ${i}.` };
    ids.push(requestId("sle", payload));
    lines.push(requestLine("sle", payload));
  }
  return { ids, lines };
}

async function checkIdEcho(
  command: string[],
  count: number,
  timeoutMs: number,
): Promise<CheckOutcome> {
  const name = "id-echo";
  const { ids, lines } = numberedRequests(count);
  const result = await streamThrough(command, lines, timeoutMs);
  const hard = transportFailure(result);
  if (hard !== null) return { name, ok: false, detail: hard };
  const { frames, malformed } = parseAll(result.raw);
  if (malformed !== null) return { name, ok: false, detail: malformed };

  const wanted = new Set(ids);
  const seen = new Set<string>();
  for (const frame of frames) {
    if (!wanted.has(frame.id)) {
      return { name, ok: false, detail: `unexpected response id ${frame.id}` };
    }
    if (seen.has(frame.id)) {
      return { name, ok: false, detail: `duplicate response id ${frame.id}` };
    }
    seen.add(frame.id);
  }
  if (seen.size !== wanted.size) {
    const missing = ids.filter((id) => !seen.has(id));
    return {
      name,
      ok: false,
      detail: `missing ${missing.length} response id(s): ${truncateIds(missing)}`,
    };
  }
  return { name, ok: true, detail: `${count} requests answered, ids bijective` };
}

// Serializing results in canonical form gives order-insensitive deep
// equality for the comparison.
function resultKey(frame: ResponseFrame): string {
  if (!frame.ok) return `error:${frame.error}`;
  return "ok:" + canonicalPayload(frame.result ?? {});
}

async function checkDeterminism(command: string[], timeoutMs: number): Promise<CheckOutcome> {
  const name = "determinism";
  const distinct = 25;
  const lines: string[] = [];
  const ids: string[] = [];
  for (let i = 0; i < distinct; i++) {
    const payload = { premise: `Premise number ${i}.`, hypothesis: `Claim number ${i}.` };
    ids.push(requestId("nli", payload));
    lines.push(requestLine("nli", payload));
  }
  const doubled = [...lines, ...lines];
  const result = await streamThrough(command, doubled, timeoutMs);
  const hard = transportFailure(result);
  if (hard !== null) return { name, ok: false, detail: hard };
  const { frames, malformed } = parseAll(result.raw);
  if (malformed !== null) return { name, ok: false, detail: malformed };

  const byId = new Map<string, string[]>();
  for (const frame of frames) {
    const bucket = byId.get(frame.id) ?? [];
    bucket.push(resultKey(frame));
    byId.set(frame.id, bucket);
  }
  for (const id of ids) {
    const got = byId.get(id) ?? [];
    if (got.length !== 2) {
      return { name, ok: false, detail: `expected the repeated request ${id} answered twice, got ${got.length}` };
    }
    if (got[0] !== got[1]) {
      return { name, ok: false, detail: `request ${id} got two different results` };
    }
  }
  return { name, ok: true, detail: `${distinct} repeated requests, identical results` };
}

async function checkThroughput(command: string[], timeoutMs: number): Promise<CheckOutcome> {
  const name = "throughput";
  const count = 500;
  const { ids, lines } = numberedRequests(count);
  const result = await streamThrough(command, lines, timeoutMs);
  const hard = transportFailure(result);
  if (hard !== null) return { name, ok: false, detail: hard };
  const { frames, malformed } = parseAll(result.raw);
  if (malformed !== null) return { name, ok: false, detail: malformed };
  const seen = new Set(frames.map((f) => f.id));
  const missing = ids.filter((id) => !seen.has(id));
  if (missing.length > 0) {
    return { name, ok: false, detail: `missing ${missing.length} response id(s): ${truncateIds(missing)}` };
  }
  const secs = Math.max(result.elapsedMs, 1) / 1000;
  const rate = Math.round(count / secs);
  return { name, ok: true, detail: `${count} responses in ${secs.toFixed(2)}s (${rate} req/s)` };
}

// Runs the checks in order and stops at the first failure, which is
// the one reported by the CLI.
export async function runConformance(
  command: string[],
  options: ConformanceOptions = {},
): Promise<ConformanceReport> {
  if (command.length === 0) {
    return {
      ok: false,
      checks: [{ name: "startup", ok: false, detail: "no worker command given" }],
    };
  }
  const requests = options.requests ?? DEFAULT_REQUESTS;
  const timeoutMs = options.timeoutMs ?? DEFAULT_TIMEOUT_MS;
  const checks: CheckOutcome[] = [];
  const steps: Array<() => Promise<CheckOutcome>> = [
    () => checkSchema(command, timeoutMs),
    () => checkIdEcho(command, requests, timeoutMs),
    () => checkDeterminism(command, timeoutMs),
    () => checkThroughput(command, timeoutMs),
  ];
  for (const step of steps) {
    const outcome = await step();
    checks.push(outcome);
    if (!outcome.ok) {
      return { ok: false, checks };
    }
  }
  return { ok: true, checks };
}

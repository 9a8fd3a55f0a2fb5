// Scoring worker speaking the line protocol on stdin/stdout. Every
// request line gets exactly one response line with the id echoed;
// malformed input produces an ok=false response instead of a crash.
// Responses may leave out of order (--shuffle exercises that), so
// clients must match by id. Fault flags simulate broken workers for
// conformance testing.

import { existsSync, readFileSync } from "node:fs";
import { fileURLToPath, pathToFileURL } from "node:url";
import { createInterface } from "node:readline";
import { parseArgs } from "node:util";

import type { JsonValue } from "./canonical.js";
import { KNOWN_TASKS, parseRequestLine, type ResponseFrame } from "./protocol.js";
import { stubResult, UnknownTaskError } from "./stub.js";

const USAGE =
  "usage: serve [--stub] [--config FILE] [--shuffle] " +
  "[--drop-every N] [--garbage-every N] [--fail-task TASK]";

interface ServeFlags {
  stub: boolean;
  config: string | null;
  shuffle: boolean;
  dropEvery: number;
  garbageEvery: number;
  failTask: string | null;
}

function configError(message: string): never {
  process.stderr.write(`config error: ${message}\n`);
  process.exit(2);
}

function parseCount(raw: string | undefined, flag: string): number {
  if (raw === undefined) return 0;
  const n = Number(raw);
  if (!Number.isInteger(n) || n < 0) {
    configError(`${flag} needs a non-negative integer, got ${raw}`);
  }
  return n;
}

export function parseFlags(argv: string[]): ServeFlags {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        stub: { type: "boolean", default: false },
        config: { type: "string" },
        shuffle: { type: "boolean", default: false },
        "drop-every": { type: "string" },
        "garbage-every": { type: "string" },
        "fail-task": { type: "string" },
      },
      allowPositionals: false,
    });
  } catch (err) {
    configError(`${(err as Error).message}\n${USAGE}`);
  }
  const v = parsed.values;
  return {
    stub: v.stub ?? false,
    config: v.config ?? null,
    shuffle: v.shuffle ?? false,
    dropEvery: parseCount(v["drop-every"], "--drop-every"),
    garbageEvery: parseCount(v["garbage-every"], "--garbage-every"),
    failTask: v["fail-task"] ?? null,
  };
}

interface TaskConfig {
  checkpoint: string;
}

// Config maps task names to checkpoint URIs. Checkpoints are never
// vendored with the code, so each one must already exist locally.
export function loadConfig(path: string): Map<string, TaskConfig> {
  let raw: string;
  try {
    raw = readFileSync(path, "utf8");
  } catch (err) {
    configError(`cannot read config ${path}: ${(err as Error).message}`);
  }
  let doc: unknown;
  try {
    doc = JSON.parse(raw);
  } catch {
    configError(`config ${path} is not valid JSON`);
  }
  const tasks = (doc as { tasks?: unknown }).tasks;
  if (typeof tasks !== "object" || tasks === null || Array.isArray(tasks)) {
    configError(`config ${path} needs a "tasks" object`);
  }
  const out = new Map<string, TaskConfig>();
  for (const [name, entry] of Object.entries(tasks as Record<string, unknown>)) {
    if (!(KNOWN_TASKS as readonly string[]).includes(name)) {
      configError(`config names unknown task "${name}"`);
    }
    const checkpoint = (entry as { checkpoint?: unknown })?.checkpoint;
    if (typeof checkpoint !== "string" || checkpoint.length === 0) {
      configError(`task "${name}" needs a string "checkpoint"`);
    }
    out.set(name, { checkpoint });
  }
  if (out.size === 0) {
    configError(`config ${path} configures no tasks`);
  }
  return out;
}

function checkpointPath(uri: string): string {
  if (uri.startsWith("file://")) {
    return fileURLToPath(uri);
  }
  return uri;
}

// Startup gate for non-stub mode: all artifacts must be present before
// the first request is read, otherwise exit non-zero immediately.
function verifyArtifacts(config: Map<string, TaskConfig>): void {
  for (const [name, task] of config) {
    const path = checkpointPath(task.checkpoint);
    if (!existsSync(path)) {
      configError(`missing model artifact for task "${name}": ${path}`);
    }
  }
  // Artifacts may be present, but this build bundles no inference
  // runtime to load them into.
  const first = config.keys().next().value;
  configError(
    `no model runtime available for task "${first}"; ` +
      "this build scores only with --stub",
  );
}

function frameLine(frame: ResponseFrame): string {
  const record: Record<string, JsonValue> = frame.ok
    ? { id: frame.id, ok: true, result: frame.result ?? {} }
    : { id: frame.id, ok: false, error: frame.error ?? "unknown error" };
  return JSON.stringify(record) + "\n";
}

export function answer(flags: ServeFlags, line: string): ResponseFrame {
  const frame = parseRequestLine(line);
  if (frame === null) {
    return { id: "", ok: false, error: "malformed frame" };
  }
  if (flags.failTask !== null && frame.task === flags.failTask) {
    return { id: frame.id, ok: false, error: `induced failure for ${frame.task}` };
  }
  try {
    return { id: frame.id, ok: true, result: stubResult(frame.task, frame.payload) };
  } catch (err) {
    if (err instanceof UnknownTaskError) {
      return { id: frame.id, ok: false, error: "unknown task" };
    }
    return { id: frame.id, ok: false, error: `scoring failed: ${(err as Error).message}` };
  }
}

function main(): void {
  const flags = parseFlags(process.argv.slice(2));
  if (!flags.stub) {
    if (flags.config === null) {
      configError("non-stub mode needs --config FILE (or pass --stub)");
    }
    verifyArtifacts(loadConfig(flags.config));
  }

  const rl = createInterface({ input: process.stdin, crlfDelay: Infinity, terminal: false });

  // Held-back lines for --shuffle; the invariant is held.length <= 1,
  // pairs are emitted in reverse order, the tail flushes at EOF.
  const held: string[] = [];

  const write = (chunk: string): void => {
    // Pausing the reader while stdout drains is the back-pressure
    // bound; nothing else queues unboundedly.
    if (!process.stdout.write(chunk)) {
      rl.pause();
      process.stdout.once("drain", () => rl.resume());
    }
  };

  const emit = (line: string): void => {
    if (flags.shuffle) {
      held.push(line);
      if (held.length === 2) {
        write(held[1]! + held[0]!);
        held.length = 0;
      }
      return;
    }
    write(line);
  };

  let seen = 0;
  rl.on("line", (raw) => {
    if (raw.trim().length === 0) return;
    seen += 1;
    if (flags.dropEvery > 0 && seen % flags.dropEvery === 0) return;
    if (flags.garbageEvery > 0 && seen % flags.garbageEvery === 0) {
      emit("this is not json\n");
      return;
    }
    emit(frameLine(answer(flags, raw)));
  });

  rl.on("close", () => {
    for (const line of held) {
      process.stdout.write(line);
    }
    held.length = 0;
    process.exitCode = 0;
  });
}

const entry = process.argv[1];
if (entry !== undefined && import.meta.url === pathToFileURL(entry).href) {
  main();
}

import { mkdtempSync, rmSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { spawn } from "node:child_process";
import { fileURLToPath } from "node:url";
import { afterAll, describe, expect, it } from "vitest";

import { requestId } from "../src/canonical.js";

const SERVE = fileURLToPath(new URL("../dist/serve.js", import.meta.url));

interface ServeRun {
  code: number | null;
  lines: string[];
  stderr: string;
}

function runServe(args: string[], input: string): Promise<ServeRun> {
  return new Promise((resolve, reject) => {
    const child = spawn(process.execPath, [SERVE, ...args], {
      stdio: ["pipe", "pipe", "pipe"],
    });
    let out = "";
    let err = "";
    child.stdout.setEncoding("utf8");
    child.stderr.setEncoding("utf8");
    child.stdout.on("data", (chunk) => (out += chunk));
    child.stderr.on("data", (chunk) => (err += chunk));
    child.on("error", reject);
    child.on("close", (code) => {
      resolve({
        code,
        lines: out.split("\n").filter((l) => l.trim().length > 0),
        stderr: err,
      });
    });
    child.stdin.on("error", () => {
      // A startup failure closes stdin before the test input lands.
    });
    child.stdin.end(input);
  });
}

function nliLine(premise: string, hypothesis: string): { id: string; line: string } {
  const payload = { premise, hypothesis };
  const id = requestId("nli", payload);
  return { id, line: JSON.stringify({ id, task: "nli", payload }) + "\n" };
}

const scratchDirs: string[] = [];
function scratch(): string {
  const dir = mkdtempSync(join(tmpdir(), "sidecar-test-"));
  scratchDirs.push(dir);
  return dir;
}
afterAll(() => {
  for (const dir of scratchDirs) rmSync(dir, { recursive: true, force: true });
});

describe("serve in stub mode", () => {
  it("answers a request with the id echoed and exits 0 at EOF", async () => {
    const { id, line } = nliLine("Cats purr.", "A cat purrs.");
    const run = await runServe(["--stub"], line);
    expect(run.code).toBe(0);
    expect(run.lines).toHaveLength(1);
    expect(JSON.parse(run.lines[0]!)).toEqual({
      id,
      ok: true,
      result: { entailment: 0.37739890059391706 },
    });
  });

  it("skips blank lines without answering them", async () => {
    const { line } = nliLine("One.", "Two.");
    const run = await runServe(["--stub"], "\n   \n" + line + "\n");
    expect(run.lines).toHaveLength(1);
  });

  it("answers malformed input with an ok=false frame and keeps serving", async () => {
    const { id, line } = nliLine("Still here.", "Yes.");
    const run = await runServe(["--stub"], "not json at all\n" + line);
    expect(run.code).toBe(0);
    expect(run.lines).toHaveLength(2);
    expect(JSON.parse(run.lines[0]!)).toEqual({
      id: "",
      ok: false,
      error: "malformed frame",
    });
    expect(JSON.parse(run.lines[1]!).id).toBe(id);
  });

  it("rejects a frame whose id is not a string", async () => {
    const bad = JSON.stringify({ id: 7, task: "nli", payload: {} }) + "\n";
    const run = await runServe(["--stub"], bad);
    expect(JSON.parse(run.lines[0]!)).toEqual({
      id: "",
      ok: false,
      error: "malformed frame",
    });
  });

  it("answers unknown tasks with ok=false", async () => {
    const req = JSON.stringify({ id: "x1", task: "embed", payload: {} }) + "\n";
    const run = await runServe(["--stub"], req);
    expect(JSON.parse(run.lines[0]!)).toEqual({
      id: "x1",
      ok: false,
      error: "unknown task",
    });
  });
});

describe("serve fault flags", () => {
  function fourRequests(): { ids: string[]; input: string } {
    const ids: string[] = [];
    let input = "";
    for (let i = 0; i < 4; i++) {
      const { id, line } = nliLine(`Premise ${i}.`, `Claim ${i}.`);
      ids.push(id);
      input += line;
    }
    return { ids, input };
  }

  it("--shuffle emits pairs in reverse order but answers everything", async () => {
    const { ids, input } = fourRequests();
    const run = await runServe(["--stub", "--shuffle"], input);
    const got = run.lines.map((l) => JSON.parse(l).id);
    expect(got).toEqual([ids[1], ids[0], ids[3], ids[2]]);
  });

  it("--shuffle flushes a held odd response at EOF", async () => {
    const { ids, input } = fourRequests();
    const { line } = nliLine("Odd one.", "Out.");
    const run = await runServe(["--stub", "--shuffle"], input + line);
    expect(run.lines).toHaveLength(5);
    expect(run.lines.map((l) => JSON.parse(l).id).sort()).toEqual(
      [...ids, JSON.parse(line.trim()).id].sort(),
    );
  });

  it("--drop-every swallows every nth request", async () => {
    const { ids, input } = fourRequests();
    const run = await runServe(["--stub", "--drop-every", "2"], input);
    expect(run.lines.map((l) => JSON.parse(l).id)).toEqual([ids[0], ids[2]]);
  });

  it("--garbage-every replaces every nth response with junk", async () => {
    const { input } = fourRequests();
    const run = await runServe(["--stub", "--garbage-every", "3"], input);
    expect(run.lines).toHaveLength(4);
    expect(run.lines[2]).toBe("this is not json");
    expect(() => JSON.parse(run.lines[2]!)).toThrow();
  });

  it("--fail-task fails only the named task", async () => {
    const sle = { id: requestId("sle", { sentence: "Hi." }), task: "sle", payload: { sentence: "Hi." } };
    const { id: nliId, line } = nliLine("Fine.", "Ok.");
    const input = JSON.stringify(sle) + "\n" + line;
    const run = await runServe(["--stub", "--fail-task", "sle"], input);
    const frames = run.lines.map((l) => JSON.parse(l));
    expect(frames[0]).toEqual({ id: sle.id, ok: false, error: "induced failure for sle" });
    expect(frames[1]!.id).toBe(nliId);
    expect(frames[1]!.ok).toBe(true);
  });

  it("rejects a negative fault counter", async () => {
    const run = await runServe(["--stub", "--drop-every", "-3"], "");
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("config error");
  });
});

describe("serve startup without --stub", () => {
  it("refuses to start with no config", async () => {
    const { line } = nliLine("Never.", "Served.");
    const run = await runServe([], line);
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("config error");
    expect(run.stderr).toContain("--config");
    expect(run.lines).toHaveLength(0);
  });

  it("exits before serving when a checkpoint file is missing", async () => {
    const dir = scratch();
    const config = join(dir, "config.json");
    writeFileSync(
      config,
      JSON.stringify({ tasks: { nli: { checkpoint: join(dir, "absent.bin") } } }),
    );
    const { line } = nliLine("Never.", "Served.");
    const run = await runServe(["--config", config], line);
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("missing model artifact");
    expect(run.stderr).toContain("nli");
    expect(run.lines).toHaveLength(0);
  });

  it("still refuses when the artifact exists, naming the missing runtime", async () => {
    const dir = scratch();
    const ckpt = join(dir, "weights.bin");
    writeFileSync(ckpt, "not really weights");
    const config = join(dir, "config.json");
    writeFileSync(config, JSON.stringify({ tasks: { nli: { checkpoint: ckpt } } }));
    const run = await runServe(["--config", config], "");
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("no model runtime");
    expect(run.stderr).toContain("--stub");
  });

  it("rejects a config naming an unknown task", async () => {
    const dir = scratch();
    const config = join(dir, "config.json");
    writeFileSync(config, JSON.stringify({ tasks: { embed: { checkpoint: "x" } } }));
    const run = await runServe(["--config", config], "");
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("unknown task");
  });

  it("rejects unparseable config json", async () => {
    const dir = scratch();
    const config = join(dir, "config.json");
    writeFileSync(config, "{nope");
    const run = await runServe(["--config", config], "");
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("not valid JSON");
  });

  it("rejects an unknown flag", async () => {
    const run = await runServe(["--stub", "--bogus"], "");
    expect(run.code).toBe(2);
    expect(run.stderr).toContain("usage:");
  });
});

// CLI around the conformance suite: spawn the given worker command,
// print one line per check, exit 0 only when everything passes.
//
//   conformance-cli [--requests N] [--timeout-ms N] -- CMD [ARGS...]

import { parseArgs } from "node:util";

import { runConformance } from "./conformance.js";

const USAGE = "usage: conformance-cli [--requests N] [--timeout-ms N] -- CMD [ARGS...]";

function usageError(message: string): never {
  process.stderr.write(`${message}\n${USAGE}\n`);
  process.exit(2);
}

function parsePositive(raw: string | undefined, flag: string): number | undefined {
  if (raw === undefined) return undefined;
  const n = Number(raw);
  if (!Number.isInteger(n) || n < 1) {
    usageError(`${flag} needs a positive integer, got ${raw}`);
  }
  return n;
}

async function main(): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: process.argv.slice(2),
      options: {
        requests: { type: "string" },
        "timeout-ms": { type: "string" },
      },
      allowPositionals: true,
    });
  } catch (err) {
    usageError((err as Error).message);
  }
  const command = parsed.positionals;
  if (command.length === 0) {
    usageError("missing worker command");
  }
  const report = await runConformance(command, {
    requests: parsePositive(parsed.values.requests, "--requests"),
    timeoutMs: parsePositive(parsed.values["timeout-ms"], "--timeout-ms"),
  });
  for (const check of report.checks) {
    const tag = check.ok ? "PASS" : "FAIL";
    process.stdout.write(`${tag} ${check.name}: ${check.detail}\n`);
  }
  process.stdout.write(`conformance: ${report.ok ? "PASS" : "FAIL"}\n`);
  return report.ok ? 0 : 1;
}

main().then(
  (code) => process.exit(code),
  (err) => {
    process.stderr.write(`unexpected error: ${err}\n`);
    process.exit(1);
  },
);

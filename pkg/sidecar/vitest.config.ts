import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // Several tests spawn worker processes; give them slack on a
    // loaded machine.
    testTimeout: 30_000,
  },
});

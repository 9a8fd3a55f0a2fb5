import { describe, expect, it } from "vitest";

import { canonicalPayload, codePointCompare, requestId } from "../src/canonical.js";

describe("canonicalPayload", () => {
  it("sorts keys and drops insignificant whitespace", () => {
    expect(canonicalPayload({ b: "café", a: 1 })).toBe('{"a":1,"b":"café"}');
  });

  it("NFC-normalizes strings so both unicode spellings canonicalize alike", () => {
    const composed = canonicalPayload({ a: 1, b: "café" });
    const decomposed = canonicalPayload({ a: 1, b: "café" });
    expect(decomposed).toBe(composed);
    expect(Buffer.from(decomposed, "utf8").toString("hex")).toBe(
      "7b2261223a312c2262223a22636166c3a9227d",
    );
  });

  it("recurses through arrays and objects", () => {
    expect(canonicalPayload({ z: [1, { b: null, a: true }], a: "x" })).toBe(
      '{"a":"x","z":[1,{"a":true,"b":null}]}',
    );
  });

  it("escapes control characters the way the client does", () => {
    expect(canonicalPayload({ c: "\x01\n" })).toBe('{"c":"\\u0001\\n"}');
    expect(canonicalPayload({ c: '"\\' })).toBe('{"c":"\\"\\\\"}');
  });

  it("keeps non-ascii raw instead of escaping", () => {
    expect(canonicalPayload({ s: "日本語" })).toBe('{"s":"日本語"}');
  });

  it("sorts keys by code point even past the basic plane", () => {
    const text = canonicalPayload({ "\u{1f600}": 1, "￿": 2 });
    expect(Buffer.from(text, "utf8").toString("hex")).toBe(
      "7b22efbfbf223a322c22f09f9880223a317d",
    );
  });

  it("writes integers without a trailing .0", () => {
    expect(canonicalPayload({ n: 3 })).toBe('{"n":3}');
    expect(canonicalPayload({ n: 2.5 })).toBe('{"n":2.5}');
  });

  it("rejects non-finite numbers", () => {
    expect(() => canonicalPayload({ n: Infinity })).toThrow();
  });
});

describe("codePointCompare", () => {
  it("orders astral characters after the top of the basic plane", () => {
    expect(codePointCompare("￿", "\u{10000}")).toBeLessThan(0);
    // Default string comparison gets this backwards because it works
    // on UTF-16 code units.
    expect("￿" < "\u{10000}").toBe(false);
  });

  it("falls back to length for shared prefixes", () => {
    expect(codePointCompare("ab", "abc")).toBeLessThan(0);
    expect(codePointCompare("abc", "abc")).toBe(0);
  });
});

describe("requestId", () => {
  // Both ids below were computed by the client implementation; a match
  // means cache entries and fixtures are interchangeable across the two.
  it("reproduces the client's content hash", () => {
    expect(requestId("nli", { premise: "Cats purr.", hypothesis: "A cat purrs." })).toBe(
      "027b2f61ae4e802264cde8be5db68bfe55fc4fbadc1748828ea217d6334546e6",
    );
    expect(requestId("qg", { text: "Paris is the capital of France" })).toBe(
      "6126a2b95a7fd0426a8cb5f62a9c3df8070437c5c7f5e8d93912b01c1e3a9141",
    );
  });

  it("is insensitive to unicode spelling of the payload", () => {
    const a = requestId("sle", { sentence: "café" });
    const b = requestId("sle", { sentence: "café" });
    expect(a).toBe(b);
  });

  it("separates task from payload", () => {
    const payload = { sentence: "The otter swims." };
    expect(requestId("sle", payload)).not.toBe(requestId("nli", payload));
  });
});

import { describe, expect, it } from "vitest";
import { tokenize } from "../src/tokenize.js";

// Expected values are the server tokenizer's output on the same strings;
// the two implementations must agree token for token.
const PARITY: [string, string[]][] = [
  ["I ♥ you !", ["I", "♥", "you", "!"]],
  ["soooo cute !!!", ["soooo", "cute", "!", "!", "!"]],
  ["don't stop", ["don't", "stop"]],
  ["check https://x.co/a?b=1 now", ["check", "https://x.co/a?b=1", "now"]],
  ["@bob said #cool stuff", ["@bob", "said", "#cool", "stuff"]],
  ["peut-être 100%", ["peut-être", "100", "%"]],
  ["c u l8r", ["c", "u", "l8r"]],
  ["café crème", ["café", "crème"]],
];

describe("tokenize", () => {
  it.each(PARITY)("matches the server on %j", (raw, expected) => {
    expect(tokenize(raw)).toEqual(expected);
  });

  it("is idempotent on rejoined output", () => {
    for (const [raw] of PARITY) {
      const once = tokenize(raw);
      expect(tokenize(once.join(" "))).toEqual(once);
    }
  });

  it("handles empty and whitespace-only input", () => {
    expect(tokenize("")).toEqual([]);
    expect(tokenize("   ")).toEqual([]);
  });
});

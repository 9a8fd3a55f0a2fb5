// 64-bit FNV-1a over raw bytes. The stub scoring path depends on this
// exact function, so the constants are pinned rather than imported.

const FNV_OFFSET = 0xcbf29ce484222325n;
const FNV_PRIME = 0x100000001b3n;
const MASK64 = (1n << 64n) - 1n;

export function fnv1a64(data: Uint8Array): bigint {
  let h = FNV_OFFSET;
  for (const b of data) {
    h ^= BigInt(b);
    h = (h * FNV_PRIME) & MASK64;
  }
  return h;
}

export function fnv1a64Utf8(text: string): bigint {
  return fnv1a64(Buffer.from(text, "utf8"));
}

// Rounding a u64 to double commutes with division by 2**64, so every
// runtime that follows IEEE 754 lands on the same value here.
export function unitInterval(h: bigint): number {
  return Number(h) / 2 ** 64;
}

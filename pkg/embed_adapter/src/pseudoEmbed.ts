/**
 * Deterministic hash-based stand-in embeddings.
 *
 * Byte-for-byte compatible with the primary pipeline's offline embedder:
 * SHA-256 in counter mode over a domain-separated seed, big-endian u32
 * words mapped into [-1, 1), sequentially normalized to unit length in
 * float64. The same key always yields the same vector in both toolchains.
 */

import { createHash } from "node:crypto";

const DOMAIN = Buffer.from("riskgraph-embed:", "utf-8");

export const SUPPORTED_WIDTHS = [768, 300] as const;

export function pseudoEmbed(key: string | Uint8Array, width: number): Float64Array {
  if (width !== 768 && width !== 300) {
    throw new Error(`unsupported embedding width ${width} (expected 768 or 300)`);
  }
  const keyBytes = typeof key === "string" ? Buffer.from(key, "utf-8") : Buffer.from(key);
  const widthBe = Buffer.alloc(4);
  widthBe.writeUInt32BE(width, 0);
  const seed = createHash("sha256")
    .update(Buffer.concat([DOMAIN, widthBe, keyBytes]))
    .digest();

  const values = new Float64Array(width);
  let filled = 0;
  let counter = 0;
  while (filled < width) {
    const counterBe = Buffer.alloc(4);
    counterBe.writeUInt32BE(counter, 0);
    const block = createHash("sha256").update(Buffer.concat([seed, counterBe])).digest();
    for (let i = 0; i + 4 <= block.length && filled < width; i += 4) {
      const word = block.readUInt32BE(i);
      // word / 2^32 is exact in float64, so both implementations agree bitwise
      values[filled] = (word / 4294967296) * 2 - 1;
      filled += 1;
    }
    counter += 1;
  }

  let normSq = 0;
  for (let i = 0; i < width; i++) {
    normSq += values[i] * values[i];
  }
  const norm = Math.sqrt(normSq);
  for (let i = 0; i < width; i++) {
    values[i] /= norm;
  }
  return values;
}

/**
 * Encoder interfaces plus deterministic hash-projection defaults.
 *
 * Checkpoints are configuration, not code: anything that emits fixed-dimension
 * vectors satisfies the contract.  The built-in encoders derive each component
 * from a seeded stream keyed by the encoded content, so re-encoding the same
 * region or window always reproduces the same vector, with no model weights
 * required.  Swap in a real vision/language backbone by implementing the same
 * interface.
 */

import { Box } from "./geometry.js";
import { keyToUnit, keys, mix } from "./rng.js";

export interface VisualEncoder {
  readonly dim: number;
  encodeRegion(imageId: string, roi: Box): number[];
}

export interface TextEncoder {
  readonly dim: number;
  encodeWindow(tokens: string[], targetOffset: number): number[];
}

function fnv1a64(text: string): bigint {
  let h = 0xcbf29ce484222325n;
  const prime = 0x100000001b3n;
  for (let i = 0; i < text.length; i++) {
    h ^= BigInt(text.charCodeAt(i));
    h = (h * prime) & ((1n << 64n) - 1n);
  }
  return h;
}

function hashVector(key: string, seed: bigint, dim: number): number[] {
  const stream = mix(seed, fnv1a64(key));
  return keys(stream, dim).map((k) => 2 * keyToUnit(k) - 1);
}

export class HashVisualEncoder implements VisualEncoder {
  constructor(readonly dim: number, private readonly seed: bigint) {}

  encodeRegion(imageId: string, roi: Box): number[] {
    return hashVector(`${imageId}|${roi.join(",")}`, this.seed, this.dim);
  }
}

export class HashTextEncoder implements TextEncoder {
  constructor(readonly dim: number, private readonly seed: bigint) {}

  encodeWindow(tokens: string[], targetOffset: number): number[] {
    return hashVector(`${tokens.join(" ")}|@${targetOffset}`, this.seed, this.dim);
  }
}

/**
 * SplitMix64 streams over BigInt, matching the engine's generator bit for bit:
 * output t of stream s is fin(s + GAMMA*(t+1)), and sub-streams derive as
 * mix(seed, taskIndex) = output taskIndex of the parent stream.
 */

const MASK = (1n << 64n) - 1n;
const GAMMA = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

function fin(z: bigint): bigint {
  z &= MASK;
  z = ((z ^ (z >> 30n)) * MIX1) & MASK;
  z = ((z ^ (z >> 27n)) * MIX2) & MASK;
  return z ^ (z >> 31n);
}

export function mix(seed: bigint, ...taskIndices: Array<bigint | number>): bigint {
  let s = seed & MASK;
  for (const t of taskIndices) {
    const tb = (typeof t === "number" ? BigInt(t) : t) & MASK;
    s = fin((s + GAMMA * (tb + 1n)) & MASK);
  }
  return s;
}

export function keys(seed: bigint, count: number, offset = 0): bigint[] {
  const out: bigint[] = [];
  for (let t = offset + 1; t <= offset + count; t++) {
    out.push(fin((seed + GAMMA * BigInt(t)) & MASK));
  }
  return out;
}

/** Uniform permutation of 0..n-1 as the argsort of n distinct stream keys. */
export function permutation(seed: bigint, n: number): number[] {
  for (let offset = 0; ; offset += n) {
    const ks = keys(seed, n, offset);
    const order = ks.map((k, i) => i).sort((a, b) => (ks[a] < ks[b] ? -1 : ks[a] > ks[b] ? 1 : 0));
    let distinct = true;
    for (let i = 1; i < n; i++) {
      if (ks[order[i]] === ks[order[i - 1]]) {
        distinct = false;
        break;
      }
    }
    if (distinct || n < 2) return order;
  }
}

/** First k entries of a uniform permutation (prefix property in k). */
export function sampleWithoutReplacement(seed: bigint, nAvailable: number, k: number): number[] {
  if (k > nAvailable) {
    throw new Error(`cannot sample ${k} items from ${nAvailable}`);
  }
  return permutation(seed, nAvailable).slice(0, k);
}

/** Uniform double in [0, 1) from one key. */
export function keyToUnit(key: bigint): number {
  return Number(key >> 11n) * 2 ** -53;
}

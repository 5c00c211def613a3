/** Context windows around a target token, truncated at document boundaries. */

export interface ContextWindow {
  tokens: string[];
  targetOffset: number; // index of the target within tokens
}

export function tokenize(document: string): string[] {
  return document.split(/\s+/).filter((t) => t.length > 0);
}

/**
 * The halfWidth tokens before the target plus the halfWidth after it; at a
 * document edge the window simply ends there (no padding).
 */
export function contextWindow(tokens: string[], targetIndex: number, halfWidth: number): ContextWindow {
  if (targetIndex < 0 || targetIndex >= tokens.length) {
    throw new Error(`target index ${targetIndex} outside document of ${tokens.length} tokens`);
  }
  const start = Math.max(0, targetIndex - halfWidth);
  const end = Math.min(tokens.length, targetIndex + halfWidth + 1);
  return { tokens: tokens.slice(start, end), targetOffset: targetIndex - start };
}

/** All positions where the (lowercased) target word occurs. */
export function findOccurrences(tokens: string[], word: string): number[] {
  const needle = word.toLowerCase();
  const out: number[] = [];
  tokens.forEach((t, i) => {
    if (t.toLowerCase() === needle) out.push(i);
  });
  return out;
}

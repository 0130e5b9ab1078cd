/**
 * Lexicon matching compatible with the primary pipeline: tokens are
 * lowercased whitespace-separated words with edge punctuation stripped,
 * and matching is a longest-match scan counting every occurrence.
 */

export interface Lexicon {
  name: string;
  entries: Map<string, number>; // word/phrase -> positive weight
}

const EDGE_PUNCT = /^[\p{P}\p{S}]+|[\p{P}\p{S}]+$/gu;

export function tokenize(text: string): string[] {
  return text
    .toLowerCase()
    .split(/\s+/u)
    .map((tok) => tok.replace(EDGE_PUNCT, ""))
    .filter((tok) => tok.length > 0);
}

function maxPhraseLen(lexicon: Lexicon): number {
  let max = 1;
  for (const phrase of lexicon.entries.keys()) {
    max = Math.max(max, phrase.split(" ").length);
  }
  return max;
}

/** Weights of every match, in scan order (longest phrase wins at each position). */
export function matchWeights(tokens: string[], lexicon: Lexicon): number[] {
  if (lexicon.entries.size === 0) return [];
  const maxLen = maxPhraseLen(lexicon);
  const weights: number[] = [];
  let i = 0;
  while (i < tokens.length) {
    let consumed = 0;
    for (let len = Math.min(maxLen, tokens.length - i); len >= 1; len--) {
      const phrase = tokens.slice(i, i + len).join(" ");
      const weight = lexicon.entries.get(phrase);
      if (weight !== undefined) {
        weights.push(weight);
        consumed = len;
        break;
      }
    }
    i += consumed > 0 ? consumed : 1;
  }
  return weights;
}

export function matchHitCount(tokens: string[], lexicon: Lexicon): number {
  return matchWeights(tokens, lexicon).length;
}

/**
 * Per-category token counts for one post, including the suicide lexicon's
 * per-weight buckets (suicide_w1..suicide_w3) used by expression degrees.
 */
export function countCategories(
  tokens: string[],
  lexicons: Map<string, Lexicon>,
): Record<string, number> {
  const counts: Record<string, number> = {};
  for (const [name, lexicon] of lexicons) {
    const weights = matchWeights(tokens, lexicon);
    if (weights.length === 0) continue;
    counts[name] = weights.length;
    if (name === "suicide") {
      for (const weight of weights) {
        const bucket = Math.min(3, Math.max(1, Math.round(weight)));
        const key = `suicide_w${bucket}`;
        counts[key] = (counts[key] ?? 0) + 1;
      }
    }
  }
  return counts;
}

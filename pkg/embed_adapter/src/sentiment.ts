/**
 * Built-in valence scorer: polarity = (positive - negative) / total hits,
 * clamped to [-1, 1]; text with no hits (or no text) scores 0. Deliberately
 * tiny and deterministic so offline exports need no model downloads.
 */

import { tokenize } from "./lexicon.js";

const POSITIVE = new Set([
  "good", "great", "happy", "love", "joy", "hope", "calm", "nice", "win",
  "smile", "bright", "warm", "fun", "peace", "proud", "sweet", "laugh",
  "excited", "grateful", "beautiful",
]);

const NEGATIVE = new Set([
  "sad", "pain", "hate", "tired", "dark", "cry", "fear", "lost", "alone",
  "hurt", "die", "death", "despair", "hopeless", "worthless", "angry",
  "awful", "terrible", "broken", "empty",
]);

export const SENTIMENT_ENGINE = "builtin-valence-v1";

export function sentimentPolarity(text: string): number {
  if (!text) return 0.0;
  let positive = 0;
  let negative = 0;
  for (const token of tokenize(text)) {
    if (POSITIVE.has(token)) positive += 1;
    if (NEGATIVE.has(token)) negative += 1;
  }
  const total = positive + negative;
  if (total === 0) return 0.0;
  return Math.max(-1, Math.min(1, (positive - negative) / total));
}

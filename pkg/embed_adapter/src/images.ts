/**
 * Image features: PNG decoding, mean brightness, warm-color fraction, and
 * the offline hash embedding over raw file bytes.
 */

import { readFileSync } from "node:fs";
import { PNG } from "pngjs";

import { pseudoEmbed } from "./pseudoEmbed.js";

export interface ImageStats {
  brightness: number; // mean luminance in [0, 1]
  warmth: number; // fraction of pixels with red > blue
}

export function decodePng(path: string): PNG {
  return PNG.sync.read(readFileSync(path));
}

export function imageStats(png: PNG): ImageStats {
  const { data, width, height } = png;
  const pixels = width * height;
  let luminance = 0;
  let warm = 0;
  for (let i = 0; i < pixels; i++) {
    const r = data[i * 4];
    const g = data[i * 4 + 1];
    const b = data[i * 4 + 2];
    luminance += 0.299 * r + 0.587 * g + 0.114 * b;
    if (r > b) warm += 1;
  }
  return {
    brightness: luminance / (pixels * 255),
    warmth: warm / pixels,
  };
}

export interface ImageEncoding {
  embedding: Float64Array; // width 300; zero vector when no readable image
  brightness: number | null;
  warmth: number | null;
  warnings: string[];
}

/**
 * Mean per-image hash embedding plus mean brightness/warmth. Unreadable
 * files are skipped with a warning; an empty or fully-unreadable list
 * yields the null-image zero vector.
 */
export function encodeImagesOffline(paths: string[]): ImageEncoding {
  const warnings: string[] = [];
  const embedding = new Float64Array(300);
  let used = 0;
  let brightness = 0;
  let warmth = 0;
  let statsCount = 0;
  for (const path of paths) {
    let bytes: Buffer;
    try {
      bytes = readFileSync(path);
    } catch (err) {
      warnings.push(`unreadable image ${path}: ${(err as Error).message}`);
      continue;
    }
    const vec = pseudoEmbed(bytes, 300);
    for (let i = 0; i < 300; i++) embedding[i] += vec[i];
    used += 1;
    try {
      const stats = imageStats(PNG.sync.read(bytes));
      brightness += stats.brightness;
      warmth += stats.warmth;
      statsCount += 1;
    } catch (err) {
      warnings.push(`undecodable image ${path}: ${(err as Error).message}`);
    }
  }
  if (used === 0) {
    if (paths.length > 0) {
      warnings.push("all images unreadable; falling back to the null-image vector");
    }
    return { embedding, brightness: null, warmth: null, warnings };
  }
  for (let i = 0; i < 300; i++) embedding[i] /= used;
  return {
    embedding,
    brightness: statsCount ? brightness / statsCount : null,
    warmth: statsCount ? warmth / statsCount : null,
    warnings,
  };
}

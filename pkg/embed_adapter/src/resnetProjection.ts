/**
 * Seeded linear projection from ResNet-34 feature width (512) to the
 * cohort image width (300), plus the online image backend. The projection
 * matrix is derived from a fixed PRNG seed recorded in the run manifest,
 * so any two runs agree on the projected space.
 */

import { EncoderUnavailableError } from "./textEncoder.js";

export const RESNET_WIDTH = 512;
export const IMAGE_WIDTH = 300;
export const DEFAULT_PROJECTION_SEED = 200;

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

/** Row-major (512 x 300) matrix with entries uniform in ±1/sqrt(512). */
export function projectionMatrix(seed: number = DEFAULT_PROJECTION_SEED): Float64Array {
  const rand = mulberry32(seed);
  const limit = 1 / Math.sqrt(RESNET_WIDTH);
  const matrix = new Float64Array(RESNET_WIDTH * IMAGE_WIDTH);
  for (let i = 0; i < matrix.length; i++) {
    matrix[i] = (rand() * 2 - 1) * limit;
  }
  return matrix;
}

export function project(features: Float64Array, matrix: Float64Array): Float64Array {
  if (features.length !== RESNET_WIDTH) {
    throw new Error(`expected ${RESNET_WIDTH} features, got ${features.length}`);
  }
  const out = new Float64Array(IMAGE_WIDTH);
  for (let i = 0; i < RESNET_WIDTH; i++) {
    const f = features[i];
    if (f === 0) continue;
    const row = i * IMAGE_WIDTH;
    for (let j = 0; j < IMAGE_WIDTH; j++) {
      out[j] += f * matrix[row + j];
    }
  }
  return out;
}

const dynamicImport = new Function("m", "return import(m)") as (
  module: string,
) => Promise<any>;

export interface ImageEncoder {
  engine: string;
  embed(paths: string[]): Promise<Float64Array>;
}

export async function onlineImageEncoder(
  projectionSeed: number = DEFAULT_PROJECTION_SEED,
): Promise<ImageEncoder> {
  let tf: any;
  try {
    tf = await dynamicImport("@tensorflow/tfjs");
    if (!tf?.loadGraphModel) throw new Error("tfjs loaded without model support");
  } catch (err) {
    throw new EncoderUnavailableError(
      `pretrained image encoder unavailable (${(err as Error).message}); ` +
        "rerun with --offline to use the hash pseudo-embedder",
    );
  }
  throw new EncoderUnavailableError(
    "no local ResNet weights configured; rerun with --offline to use the hash pseudo-embedder",
  );
}

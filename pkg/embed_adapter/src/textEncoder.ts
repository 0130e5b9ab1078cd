/**
 * Text embedding backends.
 *
 * Offline: the hash pseudo-embedder (empty text maps to the zero vector,
 * matching the primary loader's convention). Online: a pretrained
 * transformer loaded dynamically; when the module or its weights are
 * unavailable the error tells the operator to rerun with --offline.
 */

import { pseudoEmbed } from "./pseudoEmbed.js";

export const TEXT_WIDTH = 768;

export class EncoderUnavailableError extends Error {}

export interface TextEncoder {
  engine: string;
  embed(text: string): Promise<Float64Array>;
}

export function offlineTextEncoder(): TextEncoder {
  return {
    engine: `pseudo-hash-${TEXT_WIDTH}`,
    embed: async (text: string) =>
      text.length === 0 ? new Float64Array(TEXT_WIDTH) : pseudoEmbed(text, TEXT_WIDTH),
  };
}

// indirection keeps the optional dependency invisible to the TS resolver
const dynamicImport = new Function("m", "return import(m)") as (
  module: string,
) => Promise<any>;

const ONLINE_MODEL = "Xenova/bert-base-multilingual-cased";

export async function onlineTextEncoder(): Promise<TextEncoder> {
  let extractor: any;
  try {
    const transformers = await dynamicImport("@xenova/transformers");
    extractor = await transformers.pipeline("feature-extraction", ONLINE_MODEL);
  } catch (err) {
    throw new EncoderUnavailableError(
      `pretrained text encoder unavailable (${(err as Error).message}); ` +
        "rerun with --offline to use the hash pseudo-embedder",
    );
  }
  return {
    engine: `transformers:${ONLINE_MODEL}`,
    embed: async (text: string) => {
      if (text.length === 0) return new Float64Array(TEXT_WIDTH);
      const output = await extractor(text, { pooling: "mean", normalize: true });
      const values = Float64Array.from(output.data as Iterable<number>);
      if (values.length !== TEXT_WIDTH) {
        throw new EncoderUnavailableError(
          `text encoder produced width ${values.length}, expected ${TEXT_WIDTH}; ` +
            "rerun with --offline to use the hash pseudo-embedder",
        );
      }
      return values;
    },
  };
}

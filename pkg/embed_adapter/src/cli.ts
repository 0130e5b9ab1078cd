#!/usr/bin/env node
/**
 * embed --in RAWDIR --out DIR [--offline] [--force]
 *
 * Converts a raw post/user directory into riskgraph cohort files. The
 * default mode uses pretrained encoders and fails with guidance when they
 * are unavailable; --offline switches to the hash pseudo-embedder for
 * air-gapped runs.
 */

import { existsSync, readdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";

import { EncoderUnavailableError } from "./textEncoder.js";
import { SchemaError, exportCohort } from "./exportCohort.js";

async function run(): Promise<number> {
  const args = await yargs(hideBin(process.argv))
    .scriptName("embed")
    .option("in", { type: "string", demandOption: true, describe: "raw input directory" })
    .option("out", { type: "string", demandOption: true, describe: "cohort output directory" })
    .option("offline", { type: "boolean", default: false,
                         describe: "use the deterministic hash pseudo-embedder" })
    .option("force", { type: "boolean", default: false,
                       describe: "overwrite a non-empty output directory" })
    .strict()
    .parse();

  const outDir = args.out as string;
  if (existsSync(outDir) && readdirSync(outDir).length > 0 && !args.force) {
    console.error(`error: output directory ${outDir} is not empty (use --force)`);
    return 1;
  }

  try {
    const started = new Date().toISOString();
    const result = await exportCohort(args.in as string, outDir, {
      offline: args.offline as boolean,
    });
    for (const warning of result.warnings) {
      console.warn(`warning: ${warning}`);
    }
    const manifest = {
      command: "embed",
      ...result.manifest,
      inputs: { raw: args.in },
      outputs: { cohort: outDir },
      users: result.users,
      posts: result.posts,
      warnings: result.warnings.length,
      started_at: started,
      finished_at: new Date().toISOString(),
    };
    writeFileSync(join(outDir, "manifest.json"), JSON.stringify(manifest, null, 2) + "\n");
    console.log(`wrote ${result.users} users / ${result.posts} posts to ${outDir}`);
    return 0;
  } catch (err) {
    if (err instanceof EncoderUnavailableError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    if (err instanceof SchemaError) {
      console.error(`error: ${err.message}`);
      return 1;
    }
    throw err;
  }
}

run().then(
  (code) => process.exit(code),
  (err) => {
    console.error(`internal error: ${err?.stack ?? err}`);
    process.exit(3);
  },
);

/**
 * Raw-to-cohort export.
 *
 * Raw input directory:
 *   users.jsonl   user metadata (cohort user fields minus post_ids)
 *   posts.jsonl   {"user_id", "timestamp", "text", "image_paths": [...]}
 *   edges.csv     header src,dst
 *   split.csv     header user_id,split
 *   lexicons/     word TAB weight files, copied through
 *
 * Output is a cohort directory in exactly the primary loader's formats:
 * posts gain ids, hour-of-day, per-category token counts, embeddings,
 * sentiment polarity, and image tone; users gain chronological post_ids.
 * Image paths are resolved relative to the raw directory.
 */

import {
  copyFileSync,
  existsSync,
  mkdirSync,
  readFileSync,
  readdirSync,
  writeFileSync,
} from "node:fs";
import { basename, join, resolve } from "node:path";

import { countCategories, tokenize, type Lexicon } from "./lexicon.js";
import { encodeImagesOffline } from "./images.js";
import { SENTIMENT_ENGINE, sentimentPolarity } from "./sentiment.js";
import {
  offlineTextEncoder,
  onlineTextEncoder,
  type TextEncoder,
} from "./textEncoder.js";

export interface RawUser {
  user_id: string;
  gender: string;
  age_years: number | null;
  location: string;
  stress_periods: unknown[];
  disorder_flag: boolean;
  attempt_flag: boolean;
  following_count: number;
  follower_count: number;
  interact_count: number;
  label: number;
}

export interface RawPost {
  user_id: string;
  timestamp: number;
  text: string;
  image_paths: string[];
}

export interface ExportResult {
  users: number;
  posts: number;
  warnings: string[];
  manifest: Record<string, unknown>;
}

export class SchemaError extends Error {}

function readJsonl<T>(path: string, check: (raw: any, index: number) => T): T[] {
  const out: T[] = [];
  const lines = readFileSync(path, "utf-8").split("\n");
  lines.forEach((line, i) => {
    if (!line.trim()) return;
    let raw: any;
    try {
      raw = JSON.parse(line);
    } catch (err) {
      throw new SchemaError(`${basename(path)} record ${i}: bad JSON (${(err as Error).message})`);
    }
    out.push(check(raw, i));
  });
  return out;
}

function need(raw: any, field: string, kind: string, index: number, file: string): any {
  const value = raw[field];
  const ok =
    kind === "array" ? Array.isArray(value) :
    kind === "number?" ? value === null || typeof value === "number" :
    typeof value === kind;
  if (!ok) {
    throw new SchemaError(`${file} record ${index}: field ${field} must be ${kind}`);
  }
  return value;
}

function checkUser(raw: any, index: number): RawUser {
  return {
    user_id: need(raw, "user_id", "string", index, "users.jsonl"),
    gender: need(raw, "gender", "string", index, "users.jsonl"),
    age_years: need(raw, "age_years", "number?", index, "users.jsonl"),
    location: need(raw, "location", "string", index, "users.jsonl"),
    stress_periods: need(raw, "stress_periods", "array", index, "users.jsonl"),
    disorder_flag: need(raw, "disorder_flag", "boolean", index, "users.jsonl"),
    attempt_flag: need(raw, "attempt_flag", "boolean", index, "users.jsonl"),
    following_count: need(raw, "following_count", "number", index, "users.jsonl"),
    follower_count: need(raw, "follower_count", "number", index, "users.jsonl"),
    interact_count: need(raw, "interact_count", "number", index, "users.jsonl"),
    label: need(raw, "label", "number", index, "users.jsonl"),
  };
}

function checkPost(raw: any, index: number): RawPost {
  return {
    user_id: need(raw, "user_id", "string", index, "posts.jsonl"),
    timestamp: need(raw, "timestamp", "number", index, "posts.jsonl"),
    text: need(raw, "text", "string", index, "posts.jsonl"),
    image_paths: need(raw, "image_paths", "array", index, "posts.jsonl"),
  };
}

function loadLexicons(dir: string): Map<string, Lexicon> {
  const lexicons = new Map<string, Lexicon>();
  if (!existsSync(dir)) return lexicons;
  for (const file of readdirSync(dir).sort()) {
    if (!file.endsWith(".tsv")) continue;
    const entries = new Map<string, number>();
    for (const line of readFileSync(join(dir, file), "utf-8").split("\n")) {
      if (!line.trim()) continue;
      const [word, weight] = line.split("\t");
      entries.set(word, Number(weight));
    }
    const name = file.replace(/\.tsv$/, "");
    lexicons.set(name, { name, entries });
  }
  return lexicons;
}

export interface ExportOptions {
  offline: boolean;
}

export async function exportCohort(
  rawDir: string,
  outDir: string,
  options: ExportOptions,
): Promise<ExportResult> {
  for (const required of ["users.jsonl", "posts.jsonl", "edges.csv", "split.csv"]) {
    if (!existsSync(join(rawDir, required))) {
      throw new SchemaError(`missing raw file ${required} in ${rawDir}`);
    }
  }
  const users = readJsonl(join(rawDir, "users.jsonl"), checkUser);
  const posts = readJsonl(join(rawDir, "posts.jsonl"), checkPost);
  const lexicons = loadLexicons(join(rawDir, "lexicons"));

  const userIds = new Set(users.map((u) => u.user_id));
  posts.forEach((post, i) => {
    if (!userIds.has(post.user_id)) {
      throw new SchemaError(`posts.jsonl record ${i}: unknown user_id ${post.user_id}`);
    }
  });

  const textEncoder: TextEncoder = options.offline
    ? offlineTextEncoder()
    : await onlineTextEncoder();
  if (!options.offline) {
    // the image path has no offline-equivalent pretrained backend wired in;
    // reaching here means text succeeded but images would still need one
    const { onlineImageEncoder } = await import("./resnetProjection.js");
    await onlineImageEncoder();
  }

  const warnings: string[] = [];
  const byUser = new Map<string, RawPost[]>();
  for (const user of users) byUser.set(user.user_id, []);
  for (const post of posts) byUser.get(post.user_id)!.push(post);

  const postLines: string[] = [];
  const userLines: string[] = [];
  let postCount = 0;
  for (const user of users) {
    const ordered = [...byUser.get(user.user_id)!].sort((a, b) => a.timestamp - b.timestamp);
    const postIds: string[] = [];
    for (let i = 0; i < ordered.length; i++) {
      const raw = ordered[i];
      const postId = `${user.user_id}_p${String(i).padStart(4, "0")}`;
      postIds.push(postId);
      const tokens = tokenize(raw.text);
      const counts = countCategories(tokens, lexicons);
      const images = encodeImagesOffline(
        raw.image_paths.map((p) => resolve(rawDir, String(p))),
      );
      warnings.push(...images.warnings);
      const embedding = await textEncoder.embed(raw.text);
      const record = {
        post_id: postId,
        user_id: user.user_id,
        timestamp: raw.timestamp,
        hour: new Date(raw.timestamp * 1000).getUTCHours(),
        text_embedding: Array.from(embedding),
        image_embedding: Array.from(images.embedding),
        token_counts: counts,
        total_tokens: Math.max(tokens.length, 1),
        sentiment_polarity: sentimentPolarity(raw.text),
        image_brightness: images.brightness,
        image_warmth: images.warmth,
      };
      postLines.push(JSON.stringify(record));
      postCount += 1;
    }
    userLines.push(JSON.stringify({ ...user, post_ids: postIds }));
  }

  mkdirSync(outDir, { recursive: true });
  writeFileSync(join(outDir, "users.jsonl"), userLines.join("\n") + "\n", "utf-8");
  writeFileSync(join(outDir, "posts.jsonl"), postLines.join("\n") + "\n", "utf-8");
  copyFileSync(join(rawDir, "edges.csv"), join(outDir, "edges.csv"));
  copyFileSync(join(rawDir, "split.csv"), join(outDir, "split.csv"));
  const lexOut = join(outDir, "lexicons");
  mkdirSync(lexOut, { recursive: true });
  if (existsSync(join(rawDir, "lexicons"))) {
    for (const file of readdirSync(join(rawDir, "lexicons")).sort()) {
      if (file.endsWith(".tsv")) {
        copyFileSync(join(rawDir, "lexicons", file), join(lexOut, file));
      }
    }
  }

  return {
    users: users.length,
    posts: postCount,
    warnings,
    manifest: {
      text_engine: textEncoder.engine,
      image_engine: options.offline ? "pseudo-hash-300" : "resnet34-projected-300",
      sentiment_engine: SENTIMENT_ENGINE,
      offline: options.offline,
    },
  };
}

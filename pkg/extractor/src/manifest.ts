/**
 * Extraction index parsing and dataset manifest emission.
 *
 * The index is a JSON array of { video, gloss, split } rows. The emitted
 * manifest matches the downstream dataset schema: feature_dim, sorted class
 * list, and entries of { path, label, split, id }.
 */

import { readFile } from "node:fs/promises";
import { basename, extname } from "node:path";

import { FEATURE_DIM, SPLITS, type IndexEntry, type Split } from "./types.js";

export class IndexError extends Error {}

function defaultId(video: string): string {
  let name = basename(video);
  const ext = extname(name);
  name = name.slice(0, name.length - ext.length);
  // trace fixtures use a double extension (.trace.json)
  if (name.endsWith(".trace")) {
    name = name.slice(0, -".trace".length);
  }
  return name;
}

export async function loadIndex(path: string): Promise<IndexEntry[]> {
  let parsed: unknown;
  try {
    parsed = JSON.parse(await readFile(path, "utf-8"));
  } catch (err) {
    throw new IndexError(`${path}: cannot read index (${(err as Error).message})`);
  }
  if (!Array.isArray(parsed)) {
    throw new IndexError(`${path}: index must be a JSON array of entries`);
  }
  if (parsed.length === 0) {
    throw new IndexError(`${path}: index is empty`);
  }

  const offenders: string[] = [];
  const entries: IndexEntry[] = [];
  const seenIds = new Set<string>();
  parsed.forEach((item, i) => {
    const row = item as Record<string, unknown>;
    const video = typeof row.video === "string" ? row.video : null;
    const gloss = typeof row.gloss === "string" ? row.gloss : null;
    const split = typeof row.split === "string" ? (row.split as Split) : null;
    if (!video || !gloss || !split) {
      offenders.push(`entry ${i} (${video ?? "<no video>"}): missing video/gloss/split`);
      return;
    }
    if (!SPLITS.includes(split)) {
      offenders.push(`entry ${i} (${video}): unknown split '${split}'`);
      return;
    }
    const id = typeof row.id === "string" ? row.id : defaultId(video);
    if (seenIds.has(id)) {
      offenders.push(`entry ${i} (${video}): duplicate id '${id}'`);
      return;
    }
    seenIds.add(id);
    entries.push({ video, gloss, split, id });
  });
  if (offenders.length > 0) {
    throw new IndexError(`${path}: invalid index entries:\n  ${offenders.join("\n  ")}`);
  }
  return entries;
}

export interface ExtractedRecord {
  id: string;
  path: string;
  gloss: string;
  split: Split;
}

export function buildManifest(records: ExtractedRecord[]): object {
  if (records.length === 0) {
    throw new IndexError("no samples were extracted; cannot build a manifest");
  }
  const classes = [...new Set(records.map((r) => r.gloss))].sort();
  return {
    feature_dim: FEATURE_DIM,
    classes,
    entries: records.map((r) => ({ path: r.path, label: r.gloss, split: r.split, id: r.id })),
  };
}

/**
 * Clip extraction: per-frame hand detections become 126-wide keypoint rows
 * (left-hand block then right-hand block, landmark index order as published
 * by the detector), written out as KPS1 files plus a dataset manifest.
 */

import { mkdir, writeFile } from "node:fs/promises";
import { dirname, join, resolve } from "node:path";

import { encodeKps } from "./kps.js";
import { buildManifest, loadIndex, type ExtractedRecord } from "./manifest.js";
import { mapPool } from "./pool.js";
import { ClipDecodeError, readTraceClip } from "./trace.js";
import {
  FEATURE_DIM,
  VALUES_PER_HAND,
  type FrameDetection,
  type HandLandmarks,
} from "./types.js";

function fillHandBlock(row: Float32Array, offset: number, hand: HandLandmarks | null): void {
  if (hand === null) {
    row.fill(NaN, offset, offset + VALUES_PER_HAND);
    return;
  }
  for (let i = 0; i < hand.length; i++) {
    row[offset + 3 * i] = hand[i].x;
    row[offset + 3 * i + 1] = hand[i].y;
    row[offset + 3 * i + 2] = hand[i].z;
  }
}

/** One frame's detections as a 126-wide row; an undetected hand becomes 63 NaNs. */
export function detectionToRow(detection: FrameDetection): Float32Array {
  const row = new Float32Array(FEATURE_DIM);
  fillHandBlock(row, 0, detection.left);
  fillHandBlock(row, VALUES_PER_HAND, detection.right);
  return row;
}

/** Keep every stride-th frame starting at 0: 64 frames at stride 2 -> 32 rows. */
export function extractRows(frames: FrameDetection[], stride: number): Float32Array[] {
  if (stride < 1 || !Number.isInteger(stride)) {
    throw new Error(`stride must be a positive integer, got ${stride}`);
  }
  const rows: Float32Array[] = [];
  for (let t = 0; t < frames.length; t += stride) {
    rows.push(detectionToRow(frames[t]));
  }
  return rows;
}

export interface ExtractionSummary {
  written: ExtractedRecord[];
  failed: { video: string; error: string }[];
  skipped: { video: string; reason: string }[];
  manifestPath: string | null;
}

export interface ExtractionOptions {
  stride?: number;
  workers?: number;
  log?: (line: string) => void;
}

/**
 * Run the whole job: decode every indexed clip, write KPS1 samples and the
 * manifest. Undecodable clips are reported and the job continues; clips
 * with zero frames after striding are skipped.
 */
export async function runExtraction(
  indexPath: string,
  outDir: string,
  options: ExtractionOptions = {},
): Promise<ExtractionSummary> {
  const stride = options.stride ?? 1;
  const workers = options.workers ?? 4;
  const log = options.log ?? (() => undefined);

  const entries = await loadIndex(indexPath);
  const indexRoot = dirname(resolve(indexPath));
  const samplesDir = join(outDir, "samples");
  await mkdir(samplesDir, { recursive: true });

  const written: (ExtractedRecord | null)[] = new Array(entries.length).fill(null);
  const failed: ExtractionSummary["failed"] = [];
  const skipped: ExtractionSummary["skipped"] = [];

  await mapPool(entries, workers, async (entry, index) => {
    const clipPath = resolve(indexRoot, entry.video);
    let rows: Float32Array[];
    try {
      const clip = await readTraceClip(clipPath);
      rows = extractRows(clip.frames, stride);
    } catch (err) {
      if (err instanceof ClipDecodeError) {
        failed.push({ video: entry.video, error: err.message });
        log(`error: ${entry.video}: ${err.message}`);
        return;
      }
      throw err;
    }
    if (rows.length === 0) {
      skipped.push({ video: entry.video, reason: "zero frames decoded" });
      log(`skipped: ${entry.video}: zero frames decoded`);
      return;
    }
    const relPath = `samples/${entry.id}.kps`;
    await writeFile(join(outDir, relPath), encodeKps(rows, FEATURE_DIM));
    written[index] = { id: entry.id, path: relPath, gloss: entry.gloss, split: entry.split };
    log(`wrote ${relPath} (${rows.length} frames)`);
  });

  const records = written.filter((r): r is ExtractedRecord => r !== null);
  let manifestPath: string | null = null;
  if (records.length > 0) {
    manifestPath = join(outDir, "manifest.json");
    await writeFile(manifestPath, JSON.stringify(buildManifest(records), null, 2) + "\n");
  }
  return { written: records, failed, skipped, manifestPath };
}

/**
 * Recorded-trace clips: per-frame hand detections captured once from a real
 * detector run and replayed deterministically. This is the decode backend
 * used in tests and CI, where neither video decoding nor the WASM detector
 * is available.
 */

import { readFile } from "node:fs/promises";

import { LANDMARKS_PER_HAND, type FrameDetection, type TraceClip } from "./types.js";

export class ClipDecodeError extends Error {}

function checkHand(hand: unknown, where: string): FrameDetection["left"] {
  if (hand === null || hand === undefined) {
    return null;
  }
  if (!Array.isArray(hand) || hand.length !== LANDMARKS_PER_HAND) {
    throw new ClipDecodeError(`${where}: expected ${LANDMARKS_PER_HAND} landmarks or null`);
  }
  return hand.map((point, i) => {
    const { x, y, z } = point ?? {};
    if (![x, y, z].every((v) => typeof v === "number" && Number.isFinite(v))) {
      throw new ClipDecodeError(`${where} landmark ${i}: non-finite coordinates`);
    }
    return { x, y, z };
  });
}

export async function readTraceClip(path: string): Promise<TraceClip> {
  let raw: string;
  try {
    raw = await readFile(path, "utf-8");
  } catch (err) {
    throw new ClipDecodeError(`${path}: ${(err as Error).message}`);
  }
  let parsed: unknown;
  try {
    parsed = JSON.parse(raw);
  } catch {
    throw new ClipDecodeError(`${path}: not a valid trace clip (bad JSON)`);
  }
  const clip = parsed as Partial<TraceClip>;
  if (clip.format !== "hand-trace-v1" || !Array.isArray(clip.frames)) {
    throw new ClipDecodeError(`${path}: not a hand-trace-v1 clip`);
  }
  const frames = clip.frames.map((frame, t) => ({
    left: checkHand((frame as FrameDetection)?.left, `${path} frame ${t} left`),
    right: checkHand((frame as FrameDetection)?.right, `${path} frame ${t} right`),
  }));
  return { format: "hand-trace-v1", fps: clip.fps, frames };
}

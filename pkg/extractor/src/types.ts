export interface Landmark {
  x: number;
  y: number;
  z: number;
}

/** Exactly 21 landmarks per hand, in the detector's published index order. */
export type HandLandmarks = Landmark[];

/** Detection result for one video frame; null means the hand was not found. */
export interface FrameDetection {
  left: HandLandmarks | null;
  right: HandLandmarks | null;
}

/** Recorded per-frame detections of one clip (the replayable fixture format). */
export interface TraceClip {
  format: "hand-trace-v1";
  fps?: number;
  frames: FrameDetection[];
}

export type Split = "train" | "val" | "test";

/** One row of the extraction index: a video with its gloss label and split. */
export interface IndexEntry {
  video: string;
  gloss: string;
  split: Split;
  id: string;
}

export const LANDMARKS_PER_HAND = 21;
export const VALUES_PER_HAND = LANDMARKS_PER_HAND * 3;
/** Two hands x 21 landmarks x (x, y, z). */
export const FEATURE_DIM = 2 * VALUES_PER_HAND;

export const SPLITS: readonly Split[] = ["train", "val", "test"];

/**
 * Live-detector adapter around @mediapipe/tasks-vision's HandLandmarker.
 *
 * Requires the tasks-vision package, its WASM bundle, and a frame source
 * (browser/electron video element or ImageData), none of which exist in a
 * headless CI sandbox; there the recorded-trace backend stands in. Note the
 * live detector is not guaranteed bit-reproducible across machines; for
 * reproducible datasets, capture traces once and extract from those.
 */

import {
  LANDMARKS_PER_HAND,
  type FrameDetection,
  type HandLandmarks,
  type Landmark,
} from "./types.js";

const DEFAULT_WASM_BASE =
  "https://cdn.jsdelivr.net/npm/@mediapipe/tasks-vision@latest/wasm";
const DEFAULT_MODEL =
  "https://storage.googleapis.com/mediapipe-models/hand_landmarker/hand_landmarker/float16/1/hand_landmarker.task";

export interface LiveDetector {
  detect(frame: unknown, timestampMs: number): FrameDetection;
  close(): void;
}

export async function createMediaPipeDetector(
  wasmBase: string = DEFAULT_WASM_BASE,
  modelAssetPath: string = DEFAULT_MODEL,
): Promise<LiveDetector> {
  const vision = await import("@mediapipe/tasks-vision");
  const fileset = await vision.FilesetResolver.forVisionTasks(wasmBase);
  const landmarker = await vision.HandLandmarker.createFromOptions(fileset, {
    baseOptions: { modelAssetPath },
    runningMode: "VIDEO",
    numHands: 2,
  });

  function toHand(landmarks: Array<Landmark> | undefined): HandLandmarks | null {
    if (!landmarks || landmarks.length !== LANDMARKS_PER_HAND) {
      return null;
    }
    return landmarks.map(({ x, y, z }) => ({ x, y, z }));
  }

  return {
    detect(frame: unknown, timestampMs: number): FrameDetection {
      const result = landmarker.detectForVideo(frame, timestampMs);
      const detection: FrameDetection = { left: null, right: null };
      result.handedness?.forEach((categories: Array<{ categoryName: string }>, i: number) => {
        const side = categories[0]?.categoryName === "Left" ? "left" : "right";
        detection[side] = toHand(result.landmarks?.[i]);
      });
      return detection;
    },
    close() {
      landmarker.close();
    },
  };
}

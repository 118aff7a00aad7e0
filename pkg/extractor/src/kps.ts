/**
 * KPS1 sample encoding: 4 magic bytes "KPS1", u32 frame count, u32 feature
 * width (little-endian), then frame-major little-endian float32 values.
 * Missing markers are quiet NaNs.
 */

import { writeFile } from "node:fs/promises";

export const KPS_MAGIC = "KPS1";

export function encodeKps(rows: Float32Array[], featureDim: number): Buffer {
  if (rows.length === 0) {
    throw new Error("cannot encode a clip with zero frames");
  }
  for (const row of rows) {
    if (row.length !== featureDim) {
      throw new Error(`row width ${row.length} does not match feature dim ${featureDim}`);
    }
  }
  const header = Buffer.alloc(12);
  header.write(KPS_MAGIC, 0, "ascii");
  header.writeUInt32LE(rows.length, 4);
  header.writeUInt32LE(featureDim, 8);

  const payload = Buffer.alloc(4 * rows.length * featureDim);
  let offset = 0;
  for (const row of rows) {
    for (let i = 0; i < row.length; i++) {
      payload.writeFloatLE(row[i], offset);
      offset += 4;
    }
  }
  return Buffer.concat([header, payload]);
}

export async function writeKpsFile(
  path: string,
  rows: Float32Array[],
  featureDim: number,
): Promise<void> {
  await writeFile(path, encodeKps(rows, featureDim));
}

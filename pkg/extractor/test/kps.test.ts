import { describe, expect, it } from "vitest";

import { encodeKps, KPS_MAGIC } from "../src/kps.js";

describe("encodeKps", () => {
  it("writes the documented header layout", () => {
    const buf = encodeKps([new Float32Array([1.5, -2])], 2);
    expect(buf.subarray(0, 4).toString("ascii")).toBe(KPS_MAGIC);
    expect(buf.readUInt32LE(4)).toBe(1); // T
    expect(buf.readUInt32LE(8)).toBe(2); // D
    expect(buf.length).toBe(12 + 8);
    expect(buf.readFloatLE(12)).toBe(1.5);
    expect(buf.readFloatLE(16)).toBe(-2);
  });

  it("encodes floats little-endian", () => {
    const buf = encodeKps([new Float32Array([1.0])], 1);
    // 1.0f = 0x3F800000 -> LE bytes 00 00 80 3F
    expect([...buf.subarray(12)]).toEqual([0x00, 0x00, 0x80, 0x3f]);
  });

  it("encodes missing markers as quiet NaN", () => {
    const buf = encodeKps([new Float32Array([NaN])], 1);
    expect(buf.readUInt32LE(12)).toBe(0x7fc00000);
  });

  it("is frame-major", () => {
    const buf = encodeKps([new Float32Array([1, 2]), new Float32Array([3, 4])], 2);
    const values = [0, 1, 2, 3].map((i) => buf.readFloatLE(12 + 4 * i));
    expect(values).toEqual([1, 2, 3, 4]);
  });

  it("rejects zero frames and ragged rows", () => {
    expect(() => encodeKps([], 2)).toThrow(/zero frames/);
    expect(() => encodeKps([new Float32Array(3)], 2)).toThrow(/width/);
  });
});

import { describe, expect, it } from "vitest";

import {
  DEFAULT_SLIDERS,
  rotate,
  synthesizeFrame,
  synthesizeJoints,
  wristRotation,
  type SliderState,
} from "../src/handmodel.js";
import type { Vec } from "../src/protocol.js";

function dist(a: Vec, b: Vec): number {
  return Math.hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

function randomSliders(rand: () => number): SliderState {
  return {
    wristX: rand() * 1.2 - 0.6,
    wristY: 0.4 + rand() * 1.2,
    wristZ: rand() * 0.8 - 0.1,
    yawDeg: rand() * 180 - 90,
    pitchDeg: rand() * 180 - 90,
    rollDeg: rand() * 180 - 90,
    mcpFlex: rand(),
    pipFlex: rand(),
    thumbCurl: rand(),
    grabCurl: rand(),
  };
}

// deterministic LCG so failures reproduce
function lcg(seed: number): () => number {
  let s = seed >>> 0;
  return () => {
    s = (s * 1664525 + 1013904223) >>> 0;
    return s / 2 ** 32;
  };
}

describe("finger chain", () => {
  it("keeps segment lengths fixed for any slider state", () => {
    const rand = lcg(42);
    for (let i = 0; i < 200; i++) {
      const joints = synthesizeJoints(randomSliders(rand));
      expect(dist([0, 0, 0], joints.index_mcp!)).toBeCloseTo(0.08, 12);
      expect(dist(joints.index_mcp!, joints.index_pip!)).toBeCloseTo(0.045, 12);
      expect(dist(joints.index_pip!, joints.index_tip!)).toBeCloseTo(0.05, 12);
    }
  });

  it("spans the full curl range of the mapping", () => {
    const straight = synthesizeJoints({ ...DEFAULT_SLIDERS, mcpFlex: 0, pipFlex: 0 });
    expect(dist(straight.index_mcp!, straight.index_tip!)).toBeCloseTo(0.095, 12);

    // full curl folds the tip under the 0.15 * 0.095 m retraction floor
    const curled = synthesizeJoints({ ...DEFAULT_SLIDERS, mcpFlex: 1, pipFlex: 1 });
    expect(dist(curled.index_mcp!, curled.index_tip!)).toBeLessThan(0.15 * 0.095);
  });

  it("moves the tip monotonically closer as flexion grows", () => {
    let prev = Infinity;
    for (let i = 0; i <= 10; i++) {
      const s = { ...DEFAULT_SLIDERS, mcpFlex: i / 10, pipFlex: i / 10 };
      const joints = synthesizeJoints(s);
      const d = dist(joints.index_mcp!, joints.index_tip!);
      expect(d).toBeLessThan(prev);
      prev = d;
    }
  });
});

describe("gesture joints", () => {
  it("sweeps the thumb gap across the press and release bands", () => {
    const open = synthesizeJoints({ ...DEFAULT_SLIDERS, thumbCurl: 0 });
    const closed = synthesizeJoints({ ...DEFAULT_SLIDERS, thumbCurl: 1 });
    expect(dist(open.middle_pip!, open.thumb_tip!)).toBeCloseTo(0.06, 12);
    expect(dist(closed.middle_pip!, closed.thumb_tip!)).toBeCloseTo(0.004, 12);

    let prev = Infinity;
    for (let i = 0; i <= 10; i++) {
      const joints = synthesizeJoints({ ...DEFAULT_SLIDERS, thumbCurl: i / 10 });
      const d = dist(joints.middle_pip!, joints.thumb_tip!);
      expect(d).toBeLessThan(prev);
      prev = d;
    }
  });

  it("sweeps the mean fingertip distance across the grab bands", () => {
    for (const [curl, expected] of [
      [0, 0.17],
      [1, 0.05],
    ] as const) {
      const joints = synthesizeJoints({ ...DEFAULT_SLIDERS, grabCurl: curl });
      const mean =
        (dist([0, 0, 0], joints.middle_tip!) +
          dist([0, 0, 0], joints.ring_tip!) +
          dist([0, 0, 0], joints.pinky_tip!)) /
        3;
      expect(mean).toBeCloseTo(expected, 12);
    }
  });
});

describe("frame synthesis", () => {
  it("produces the wire shape with all tracked joints", () => {
    const frame = synthesizeFrame(DEFAULT_SLIDERS, 1.25);
    expect(frame.t).toBe(1.25);
    expect(frame.hmd.position).toEqual([0, 1.7, 0]);
    expect(frame.hmd.rotation).toEqual([1, 0, 0, 0]);
    const hand = frame.hands.right!;
    expect(hand.wrist.position).toEqual([
      DEFAULT_SLIDERS.wristX,
      DEFAULT_SLIDERS.wristY,
      DEFAULT_SLIDERS.wristZ,
    ]);
    expect(Object.keys(hand.joints).sort()).toEqual([
      "index_mcp",
      "index_pip",
      "index_tip",
      "middle_pip",
      "middle_tip",
      "pinky_tip",
      "ring_tip",
      "thumb_tip",
    ]);
  });

  it("rotates joints rigidly around the wrist", () => {
    const rand = lcg(7);
    for (let i = 0; i < 50; i++) {
      const s = randomSliders(rand);
      const frame = synthesizeFrame(s, i * 0.01);
      const hand = frame.hands.right!;
      const w = hand.wrist.position;
      // rotation never changes the wrist-to-joint distances
      const locals = synthesizeJoints(s);
      for (const [name, local] of Object.entries(locals)) {
        const world = hand.joints[name]!;
        expect(dist(w, world)).toBeCloseTo(dist([0, 0, 0], local), 10);
      }
    }
  });

  it("rotation helper preserves vector length", () => {
    const rand = lcg(99);
    for (let i = 0; i < 100; i++) {
      const s = randomSliders(rand);
      const q = wristRotation(s);
      const v: Vec = [rand() - 0.5, rand() - 0.5, rand() - 0.5];
      const r = rotate(q, v);
      expect(Math.hypot(...r)).toBeCloseTo(Math.hypot(...v), 10);
    }
  });
});

// Synthesizes tracked-hand frames from slider values. This is input
// synthesis (a stand-in for a camera tracker); all arm mapping happens
// on the server and comes back as pose messages.

import type { FrameDict, PoseDict, Quat, Vec } from "./protocol.js";

export interface SliderState {
  wristX: number;
  wristY: number;
  wristZ: number;
  yawDeg: number;
  pitchDeg: number;
  rollDeg: number;
  mcpFlex: number; // 0 straight .. 1 fully bent
  pipFlex: number;
  thumbCurl: number; // 0 open .. 1 touching the middle finger
  grabCurl: number; // 0 open .. 1 fist
}

export const DEFAULT_SLIDERS: SliderState = {
  wristX: 0.18,
  wristY: 0.95,
  wristZ: 0.25,
  yawDeg: 0,
  pitchDeg: 0,
  rollDeg: 0,
  mcpFlex: 0,
  pipFlex: 0,
  thumbCurl: 0,
  grabCurl: 0,
};

// Segment lengths (m). Knuckle-to-tip spans 0.095 when straight, the
// default index finger calibration; full flexion folds the distal
// chain far enough back that the curl fraction hits its 0.15 floor.
const WRIST_TO_MCP = 0.08;
const PROXIMAL_LEN = 0.045;
const DISTAL_LEN = 0.05;
const MCP_FLEX_MAX = (80 * Math.PI) / 180;
const PIP_FLEX_MAX = (170 * Math.PI) / 180;

// Thumb-to-middle-finger gap range (m); the server's press/release
// thresholds (0.015/0.025 by default) sit inside it.
const THUMB_OPEN = 0.06;
const THUMB_CLOSED = 0.004;

// Fingertip-to-wrist range (m) for the grab gesture (0.09/0.12 bands).
const GRAB_OPEN = 0.17;
const GRAB_CLOSED = 0.05;

const HMD_POSE: PoseDict = { position: [0, 1.7, 0], rotation: [1, 0, 0, 0] };

function norm(v: Vec): Vec {
  const n = Math.hypot(v[0], v[1], v[2]);
  return [v[0] / n, v[1] / n, v[2] / n];
}

const THUMB_DIR = norm([-0.8, -0.3, 0.5]);
const GRAB_DIRS: Vec[] = [norm([-0.02, 0, 1]), norm([-0.3, -0.1, 0.9]), norm([-0.5, -0.15, 0.8])];

function quatMul(a: Quat, b: Quat): Quat {
  const [aw, ax, ay, az] = a;
  const [bw, bx, by, bz] = b;
  return [
    aw * bw - ax * bx - ay * by - az * bz,
    aw * bx + ax * bw + ay * bz - az * by,
    aw * by - ax * bz + ay * bw + az * bx,
    aw * bz + ax * by - ay * bx + az * bw,
  ];
}

function quatAxisAngle(axis: Vec, rad: number): Quat {
  const s = Math.sin(rad / 2);
  return [Math.cos(rad / 2), axis[0] * s, axis[1] * s, axis[2] * s];
}

export function wristRotation(s: SliderState): Quat {
  const yaw = quatAxisAngle([0, 1, 0], (s.yawDeg * Math.PI) / 180);
  const pitch = quatAxisAngle([1, 0, 0], (s.pitchDeg * Math.PI) / 180);
  const roll = quatAxisAngle([0, 0, 1], (s.rollDeg * Math.PI) / 180);
  return quatMul(quatMul(yaw, pitch), roll);
}

export function rotate(q: Quat, v: Vec): Vec {
  const [w, x, y, z] = q;
  // q * (0,v) * q^-1 expanded
  const tx = 2 * (y * v[2] - z * v[1]);
  const ty = 2 * (z * v[0] - x * v[2]);
  const tz = 2 * (x * v[1] - y * v[0]);
  return [
    v[0] + w * tx + y * tz - z * ty,
    v[1] + w * ty + z * tx - x * tz,
    v[2] + w * tz + x * ty - y * tx,
  ];
}

function clamp01(x: number): number {
  return Math.min(Math.max(x, 0), 1);
}

// Index chain in the wrist-local frame: +z points along the straight
// finger, flexion folds it downward (-y) in the y-z plane.
function indexJoints(s: SliderState): { mcp: Vec; pip: Vec; tip: Vec } {
  const a1 = clamp01(s.mcpFlex) * MCP_FLEX_MAX;
  const a2 = a1 + clamp01(s.pipFlex) * PIP_FLEX_MAX;
  const mcp: Vec = [0, 0, WRIST_TO_MCP];
  const pip: Vec = [mcp[0], mcp[1] - PROXIMAL_LEN * Math.sin(a1), mcp[2] + PROXIMAL_LEN * Math.cos(a1)];
  const tip: Vec = [pip[0], pip[1] - DISTAL_LEN * Math.sin(a2), pip[2] + DISTAL_LEN * Math.cos(a2)];
  return { mcp, pip, tip };
}

export function synthesizeJoints(s: SliderState): Record<string, Vec> {
  const { mcp, pip, tip } = indexJoints(s);
  const middlePip: Vec = [-0.012, 0, 0.1];
  const thumbGap = THUMB_OPEN - clamp01(s.thumbCurl) * (THUMB_OPEN - THUMB_CLOSED);
  const grabDist = GRAB_OPEN - clamp01(s.grabCurl) * (GRAB_OPEN - GRAB_CLOSED);
  const joints: Record<string, Vec> = {
    index_mcp: mcp,
    index_pip: pip,
    index_tip: tip,
    middle_pip: middlePip,
    thumb_tip: [
      middlePip[0] + THUMB_DIR[0] * thumbGap,
      middlePip[1] + THUMB_DIR[1] * thumbGap,
      middlePip[2] + THUMB_DIR[2] * thumbGap,
    ],
    middle_tip: [GRAB_DIRS[0]![0] * grabDist, GRAB_DIRS[0]![1] * grabDist, GRAB_DIRS[0]![2] * grabDist],
    ring_tip: [GRAB_DIRS[1]![0] * grabDist, GRAB_DIRS[1]![1] * grabDist, GRAB_DIRS[1]![2] * grabDist],
    pinky_tip: [GRAB_DIRS[2]![0] * grabDist, GRAB_DIRS[2]![1] * grabDist, GRAB_DIRS[2]![2] * grabDist],
  };
  return joints;
}

export function synthesizeFrame(s: SliderState, t: number, side = "right"): FrameDict {
  const q = wristRotation(s);
  const wrist: Vec = [s.wristX, s.wristY, s.wristZ];
  const joints: Record<string, Vec> = {};
  for (const [name, local] of Object.entries(synthesizeJoints(s))) {
    const r = rotate(q, local);
    joints[name] = [wrist[0] + r[0], wrist[1] + r[1], wrist[2] + r[2]];
  }
  return {
    t,
    hmd: HMD_POSE,
    hands: { [side]: { wrist: { position: wrist, rotation: q }, joints } },
  };
}

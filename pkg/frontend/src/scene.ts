// Canvas renderer. Draws exactly what the last pose message said:
// two-bone arm, reach sphere, pointer, physical hand ghost. World
// coordinates are y-up, z-forward; panels are orthographic.

import type { PoseMsg, Vec } from "./protocol.js";

interface Panel {
  x: number;
  y: number;
  w: number;
  h: number;
  label: string;
  // world axes mapped to panel right/up
  project: (p: Vec) => [number, number];
}

const METERS_WIDE = 2.4;

function panels(w: number, h: number): Panel[] {
  const half = w / 2;
  const scale = Math.min(half / METERS_WIDE, h / 2.4);
  const front: Panel = {
    x: 0,
    y: 0,
    w: half,
    h,
    label: "front (x/y)",
    project: (p) => [half / 2 + p[0] * scale, h * 0.9 - p[1] * scale],
  };
  const top: Panel = {
    x: half,
    y: 0,
    w: half,
    h,
    label: "top (x/z)",
    project: (p) => [half / 2 + p[0] * scale, h * 0.8 - p[2] * scale],
  };
  return [front, top];
}

function seg(ctx: CanvasRenderingContext2D, panel: Panel, a: Vec, b: Vec, color: string, width: number): void {
  const [ax, ay] = panel.project(a);
  const [bx, by] = panel.project(b);
  ctx.strokeStyle = color;
  ctx.lineWidth = width;
  ctx.beginPath();
  ctx.moveTo(panel.x + ax, panel.y + ay);
  ctx.lineTo(panel.x + bx, panel.y + by);
  ctx.stroke();
}

function dot(ctx: CanvasRenderingContext2D, panel: Panel, p: Vec, color: string, r: number): void {
  const [px, py] = panel.project(p);
  ctx.fillStyle = color;
  ctx.beginPath();
  ctx.arc(panel.x + px, panel.y + py, r, 0, Math.PI * 2);
  ctx.fill();
}

function circle(ctx: CanvasRenderingContext2D, panel: Panel, center: Vec, radiusM: number, color: string): void {
  const [cx, cy] = panel.project(center);
  const [ex] = panel.project([center[0] + radiusM, center[1], center[2]]);
  ctx.strokeStyle = color;
  ctx.lineWidth = 1;
  ctx.setLineDash([4, 4]);
  ctx.beginPath();
  ctx.arc(panel.x + cx, panel.y + cy, Math.abs(ex - cx), 0, Math.PI * 2);
  ctx.stroke();
  ctx.setLineDash([]);
}

export function renderScene(
  ctx: CanvasRenderingContext2D,
  width: number,
  height: number,
  pose: PoseMsg | null,
  side: string,
  flash: boolean,
): void {
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height);
  for (const panel of panels(width, height)) {
    ctx.strokeStyle = "#2a3242";
    ctx.lineWidth = 1;
    ctx.strokeRect(panel.x + 0.5, panel.y + 0.5, panel.w - 1, panel.h - 1);
    ctx.fillStyle = "#5b6a85";
    ctx.font = "11px system-ui, sans-serif";
    ctx.fillText(panel.label, panel.x + 8, panel.y + 16);
    if (pose === null) continue;

    const arm = pose.poses[side];
    if (arm === undefined) continue;
    const reach = pose.reach[side];
    if (reach !== undefined) circle(ctx, panel, arm.shoulder, reach, "#31507a");

    seg(ctx, panel, arm.shoulder, arm.elbow, "#7fd4a8", 4);
    seg(ctx, panel, arm.elbow, arm.wrist, "#7fd4a8", 4);
    dot(ctx, panel, arm.shoulder, "#d8e1f0", 4);
    dot(ctx, panel, arm.elbow, "#9fb6d8", 4);
    dot(ctx, panel, arm.wrist, "#ffd479", 5);
    for (const p of Object.values(arm.fingers)) dot(ctx, panel, p, "#ffd479", 2);

    const physical = pose.physical[side];
    if (physical !== undefined) {
      dot(ctx, panel, physical.wrist, "#4b5a74", 4);
      if (physical.index_tip) dot(ctx, panel, physical.index_tip, "#4b5a74", 2);
    }

    const pointer = pose.pointers[side];
    if (pointer !== undefined) {
      dot(ctx, panel, pointer, flash ? "#ff7d66" : "#66c4ff", flash ? 8 : 4);
    }
  }
}

// Canvas skeleton renderer: projects segment endpoints with a fixed
// isometric-ish camera and strokes one line per segment. Works against any
// CanvasRenderingContext2D-compatible surface, which keeps it testable.

import type { FrameUpdate, Vec3 } from "./protocol.js";

export interface Ctx2D {
  canvas?: { width: number; height: number };
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  lineCap: string;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  stroke(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  fill(): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  fillText(text: string, x: number, y: number): void;
  font: string;
}

export const PALETTE: Record<string, string> = {
  red: "#e5484d",
  green: "#46a758",
  blue: "#3e63dd",
  orange: "#f76b15",
  cyan: "#00a2c7",
  purple: "#8e4ec6",
  silver: "#c9c9d1",
};

const COS30 = Math.cos(Math.PI / 6);
const SIN30 = Math.sin(Math.PI / 6);

// Isometric projection: x-y ground plane recedes diagonally, z is up.
export function project(p: Vec3, width: number, height: number, scale: number,
                        center: Vec3): [number, number] {
  const dx = p[0] - center[0];
  const dy = p[1] - center[1];
  const dz = p[2];
  const u = (dx - dy) * COS30;
  const v = (dx + dy) * SIN30 - dz;
  return [width / 2 + u * scale, height * 0.62 + v * scale];
}

function frameCenter(frame: FrameUpdate): Vec3 {
  let cx = 0;
  let cy = 0;
  let n = 0;
  for (const [a, b] of frame.segment_endpoints) {
    cx += a[0] + b[0];
    cy += a[1] + b[1];
    n += 2;
  }
  return n ? [cx / n, cy / n, 0] : [0, 0, 0];
}

export function renderFrame(ctx: Ctx2D, frame: FrameUpdate, width: number,
                            height: number, buffering = false): void {
  ctx.fillStyle = "#101018";
  ctx.fillRect(0, 0, width, height);

  const center = frameCenter(frame);
  const scale = Math.min(width, height) / 3.2;

  // ground grid under the robot
  ctx.strokeStyle = "#22232e";
  ctx.lineWidth = 1;
  for (let g = -2; g <= 2; g++) {
    for (const line of [
      [[g * 0.5 + center[0] - 2, center[1] - 2, 0], [g * 0.5 + center[0] + 2, center[1] + 2, 0]],
      [[center[0] - 2, g * 0.5 + center[1] - 2, 0], [center[0] + 2, g * 0.5 + center[1] + 2, 0]],
    ] as [Vec3, Vec3][]) {
      const [a, b] = line;
      const pa = project(a, width, height, scale, center);
      const pb = project(b, width, height, scale, center);
      ctx.beginPath();
      ctx.moveTo(pa[0], pa[1]);
      ctx.lineTo(pb[0], pb[1]);
      ctx.stroke();
    }
  }

  const color = PALETTE[frame.color] ?? "#ffffff";
  ctx.lineCap = "round";
  for (const [a, b] of frame.segment_endpoints) {
    const pa = project(a, width, height, scale, center);
    const pb = project(b, width, height, scale, center);
    const zero = Math.abs(a[0] - b[0]) + Math.abs(a[1] - b[1]) + Math.abs(a[2] - b[2]) < 1e-9;
    if (zero) {
      // point-like segment (a sphere body): draw a disc
      ctx.fillStyle = color;
      ctx.beginPath();
      ctx.arc(pa[0], pa[1], 10, 0, 2 * Math.PI);
      ctx.fill();
    } else {
      ctx.strokeStyle = color;
      ctx.lineWidth = frame.color === "silver" ? 7 : 5;
      ctx.beginPath();
      ctx.moveTo(pa[0], pa[1]);
      ctx.lineTo(pb[0], pb[1]);
      ctx.stroke();
    }
  }

  // silver robots get an extra halo so injections stand out
  if (frame.color === "silver") {
    ctx.strokeStyle = "#ffffff";
    ctx.lineWidth = 1;
    const p0 = project(center, width, height, scale, center);
    ctx.beginPath();
    ctx.arc(p0[0], p0[1] - 40, 52, 0, 2 * Math.PI);
    ctx.stroke();
  }

  ctx.fillStyle = "#8b8d98";
  ctx.font = "12px monospace";
  ctx.fillText(`#${frame.robot_id} ${frame.species} (${frame.color})`, 10, 16);
  if (buffering) {
    ctx.fillStyle = "#f5d90a";
    ctx.fillText("buffering...", 10, 32);
  }
}

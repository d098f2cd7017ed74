import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import type { Ctx2D } from "../src/render.js";
import { PALETTE, project, renderFrame } from "../src/render.js";
import type { FrameUpdate, ServerMessage } from "../src/protocol.js";

class FakeCtx implements Ctx2D {
  fillStyle: string = "";
  strokeStyle: string = "";
  lineWidth = 1;
  lineCap = "butt";
  font = "";
  strokes = 0;
  arcs = 0;
  texts: string[] = [];
  strokeStyles = new Set<string>();
  widths = new Set<number>();
  beginPath() {}
  moveTo() {}
  lineTo() {}
  stroke() {
    this.strokes++;
    this.strokeStyles.add(String(this.strokeStyle));
    this.widths.add(this.lineWidth);
  }
  arc() { this.arcs++; }
  fill() {}
  fillRect() {}
  fillText(t: string) { this.texts.push(t); }
}

const stream: ServerMessage[] = JSON.parse(
  readFileSync(new URL("./fixtures/stream.json", import.meta.url), "utf-8"),
);
const frames = stream.filter((m): m is FrameUpdate => m.type === "frame");

describe("renderer", () => {
  it("fixture carries a full recorded session", () => {
    expect(frames.length).toBeGreaterThan(300);
    expect(new Set(frames.map((f) => f.color)).has("silver")).toBe(true);
  });

  it("strokes every segment in the frame color", () => {
    const ctx = new FakeCtx();
    const f = frames.find((x) => x.color === "red")!;
    renderFrame(ctx, f, 900, 640);
    expect(ctx.strokes).toBeGreaterThanOrEqual(f.segment_endpoints.length);
    expect(ctx.strokeStyles.has(PALETTE.red)).toBe(true);
  });

  it("silver robots render visibly distinct", () => {
    const normal = new FakeCtx();
    renderFrame(normal, frames.find((x) => x.color === "red")!, 900, 640);
    const silver = new FakeCtx();
    renderFrame(silver, frames.find((x) => x.color === "silver")!, 900, 640);
    expect(silver.strokeStyles.has(PALETTE.silver)).toBe(true);
    expect(silver.strokeStyles.has("#ffffff")).toBe(true); // halo
    const maxSilver = Math.max(...[...silver.widths]);
    const maxNormal = Math.max(...[...normal.widths]);
    expect(maxSilver).toBeGreaterThan(maxNormal);
  });

  it("buffering indicator shows when frames stall", () => {
    const ctx = new FakeCtx();
    renderFrame(ctx, frames[0], 900, 640, true);
    expect(ctx.texts.some((t) => t.includes("buffering"))).toBe(true);
  });

  it("projection keeps ground-plane z out of the horizontal axis", () => {
    const [u0] = project([1, 0, 0], 900, 640, 100, [0, 0, 0]);
    const [u1] = project([1, 0, 5], 900, 640, 100, [0, 0, 0]);
    expect(u0).toBeCloseTo(u1); // z only moves the vertical axis
  });

  it("replays the recorded stream at 10 fps or better", () => {
    const ctx = new FakeCtx();
    const t0 = performance.now();
    for (const f of frames) {
      renderFrame(ctx, f, 900, 640);
    }
    const secs = (performance.now() - t0) / 1000;
    const fps = frames.length / secs;
    expect(fps).toBeGreaterThan(10);
  });
});

// Canvas scene: solid slider square, dotted target outline, pusher disc,
// red mouse triangle, mode badge. Pure function of the view model; the
// context interface is the minimal Canvas2D subset so tests can record it.

import { WorldTransform } from "./transform.js";
import type { ViewModel } from "./viewmodel.js";

export interface Scene2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(rad: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  rect(x: number, y: number, w: number, h: number): void;
  fill(): void;
  stroke(): void;
  setLineDash(segments: number[]): void;
  fillText(text: string, x: number, y: number): void;
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  font: string;
}

export interface RenderOptions {
  width: number;
  height: number;
  halfSide: number; // slider half side in meters (matches server params)
  pusherRadius: number;
}

export const defaultOptions: RenderOptions = {
  width: 640,
  height: 640,
  halfSide: 0.05,
  pusherRadius: 0.008,
};

function squarePath(ctx: Scene2D, tf: WorldTransform, pose: [number, number, number], half: number): void {
  const [x, y, th] = pose;
  const [sx, sy] = tf.toScreen(x, y);
  ctx.save();
  ctx.translate(sx, sy);
  ctx.rotate(-th); // canvas y points down, so positive world angles are CCW on screen via negation
  const h = tf.lengthToPixels(half);
  ctx.beginPath();
  ctx.rect(-h, -h, 2 * h, 2 * h);
}

export function render(ctx: Scene2D, vm: ViewModel, opts: RenderOptions = defaultOptions): void {
  const tf = new WorldTransform({ width: opts.width, height: opts.height });
  ctx.clearRect(0, 0, opts.width, opts.height);
  if (vm.frame === null) {
    ctx.fillStyle = "#555";
    ctx.font = "16px sans-serif";
    ctx.fillText(`connection: ${vm.connection}`, 12, 24);
    return;
  }
  const f = vm.frame;

  // target: dotted square outline
  ctx.setLineDash([6, 6]);
  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1.5;
  squarePath(ctx, tf, [f.target[0], f.target[1], f.target[2]], opts.halfSide);
  ctx.stroke();
  ctx.restore();
  ctx.setLineDash([]);

  // slider: solid square
  ctx.fillStyle = "#4477cc";
  squarePath(ctx, tf, [f.x[0], f.x[1], f.x[2]], opts.halfSide);
  ctx.fill();
  ctx.restore();

  // pusher: filled disc; state stores its position in the slider frame
  const c = Math.cos(f.x[2]);
  const s = Math.sin(f.x[2]);
  const wx = f.x[0] + c * f.x[3] - s * f.x[4];
  const wy = f.x[1] + s * f.x[3] + c * f.x[4];
  const [px, py] = tf.toScreen(wx, wy);
  ctx.fillStyle = "#222";
  ctx.beginPath();
  ctx.arc(px, py, tf.lengthToPixels(opts.pusherRadius), 0, 2 * Math.PI);
  ctx.fill();

  // mouse: red triangle at the cursor's world position
  if (vm.mouseWorld !== null) {
    const [mx, my] = tf.toScreen(vm.mouseWorld[0], vm.mouseWorld[1]);
    const r = 8;
    ctx.fillStyle = "#cc2222";
    ctx.beginPath();
    ctx.moveTo(mx, my - r);
    ctx.lineTo(mx - r * 0.866, my + r / 2);
    ctx.lineTo(mx + r * 0.866, my + r / 2);
    ctx.closePath();
    ctx.fill();
  }

  // mode badge and status line
  ctx.fillStyle = f.recording ? "#cc2222" : "#333";
  ctx.font = "14px monospace";
  ctx.fillText(`mode ${f.mode}  t=${f.t}${f.recording ? "  REC" : ""}`, 12, 20);
}

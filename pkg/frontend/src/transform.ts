// World (meters, y up) to canvas (pixels, y down) mapping.

export interface Size {
  width: number;
  height: number;
}

export class WorldTransform {
  readonly scale: number; // pixels per meter
  private readonly cx: number;
  private readonly cy: number;

  constructor(canvas: Size, worldHalfWidth = 0.35) {
    const halfPx = Math.min(canvas.width, canvas.height) / 2;
    this.scale = halfPx / worldHalfWidth;
    this.cx = canvas.width / 2;
    this.cy = canvas.height / 2;
  }

  toScreen(wx: number, wy: number): [number, number] {
    return [this.cx + wx * this.scale, this.cy - wy * this.scale];
  }

  toWorld(px: number, py: number): [number, number] {
    return [(px - this.cx) / this.scale, (this.cy - py) / this.scale];
  }

  lengthToPixels(meters: number): number {
    return meters * this.scale;
  }
}

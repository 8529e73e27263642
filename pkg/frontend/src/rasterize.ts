import type { Point } from "./coords";

const NEIGHBORS: Point[] = [
  [-1, -1], [0, -1], [1, -1], [-1, 0], [1, 0], [-1, 1], [0, 1], [1, 1],
];

/** Integer line from p0 to p1 inclusive, classic Bresenham order. */
export function bresenham(p0: Point, p1: Point): Point[] {
  let [x0, y0] = p0;
  const [x1, y1] = p1;
  const dx = Math.abs(x1 - x0);
  const dy = -Math.abs(y1 - y0);
  const sx = x0 < x1 ? 1 : -1;
  const sy = y0 < y1 ? 1 : -1;
  let err = dx + dy;
  const points: Point[] = [];
  for (;;) {
    points.push([x0, y0]);
    if (x0 === x1 && y0 === y1) break;
    const e2 = 2 * err;
    if (e2 >= dy) {
      err += dy;
      x0 += sx;
    }
    if (e2 <= dx) {
      err += dx;
      y0 += sy;
    }
  }
  return points;
}

/**
 * Strokes to pixels: Bresenham segments then radius-1 dilation over the
 * 8-neighborhood.  Pixel order is the server's exactly: each stroke pixel
 * immediately followed by its fresh neighbors.
 */
export function rasterizeDoodle(polylines: Point[][], imageSize: number): Point[] {
  if (polylines.length === 0) {
    throw new Error("doodle has no strokes");
  }
  const seen = new Set<number>();
  const ordered: Point[] = [];

  const push = (x: number, y: number) => {
    if (x < 0 || x >= imageSize || y < 0 || y >= imageSize) return;
    const key = y * imageSize + x;
    if (seen.has(key)) return;
    seen.add(key);
    ordered.push([x, y]);
  };

  for (const line of polylines) {
    if (line.length === 0) continue;
    let base: Point[] = [];
    if (line.length === 1) {
      base = [[Math.trunc(line[0][0]), Math.trunc(line[0][1])]];
    } else {
      for (let i = 0; i + 1 < line.length; i++) {
        const a: Point = [Math.trunc(line[i][0]), Math.trunc(line[i][1])];
        const b: Point = [Math.trunc(line[i + 1][0]), Math.trunc(line[i + 1][1])];
        let seg = bresenham(a, b);
        if (base.length > 0) seg = seg.slice(1); // shared endpoint
        base.push(...seg);
      }
    }
    for (const [px, py] of base) {
      push(px, py);
      for (const [ox, oy] of NEIGHBORS) push(px + ox, py + oy);
    }
  }
  if (ordered.length === 0) {
    throw new Error("doodle rasterized to no pixels inside the image");
  }
  return ordered;
}

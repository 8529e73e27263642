export const IMAGE_SIZE = 64;

export type Point = [number, number];

/** Map a canvas-space point to image-pixel space: floor scale, clamp. */
export function canvasToImageCoords(
  canvasPt: Point,
  canvasSize: number,
  imageSize: number = IMAGE_SIZE,
): Point {
  const clamp = (v: number) =>
    Math.min(imageSize - 1, Math.max(0, Math.floor((v * imageSize) / canvasSize)));
  return [clamp(canvasPt[0]), clamp(canvasPt[1])];
}

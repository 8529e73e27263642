import { IMAGE_SIZE } from "./coords";
import { rleDecode } from "./prompts";

/** Decode a base64 PNG into an HTMLImageElement. */
export function loadPng(b64: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const img = new Image();
    img.onload = () => resolve(img);
    img.onerror = () => reject(new Error("bad PNG"));
    img.src = "data:image/png;base64," + b64;
  });
}

/** Paint a binary RLE mask as a translucent red layer on its own canvas. */
export function maskOverlayCanvas(maskRle: string, color = [255, 64, 64]): HTMLCanvasElement {
  const mask = rleDecode(maskRle, IMAGE_SIZE * IMAGE_SIZE);
  const canvas = document.createElement("canvas");
  canvas.width = IMAGE_SIZE;
  canvas.height = IMAGE_SIZE;
  const ctx = canvas.getContext("2d")!;
  const img = ctx.createImageData(IMAGE_SIZE, IMAGE_SIZE);
  for (let i = 0; i < mask.length; i++) {
    const o = i * 4;
    img.data[o] = color[0];
    img.data[o + 1] = color[1];
    img.data[o + 2] = color[2];
    img.data[o + 3] = mask[i] ? 160 : 0;
  }
  ctx.putImageData(img, 0, 0);
  return canvas;
}

/** Draw a 64x64 source scaled to the display canvas without smoothing. */
export function drawScaled(
  ctx: CanvasRenderingContext2D,
  source: CanvasImageSource,
  size: number,
): void {
  ctx.imageSmoothingEnabled = false;
  ctx.drawImage(source, 0, 0, size, size);
}

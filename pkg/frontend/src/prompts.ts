import { IMAGE_SIZE, Point } from "./coords";
import { rasterizeDoodle } from "./rasterize";

export type PromptKind = "click" | "bbox" | "doodle" | "seglab";

export interface ClickDraft {
  kind: "click";
  fg: Point[];
  bg: Point[];
}

export interface BBoxDraft {
  kind: "bbox";
  tl: Point | null;
  br: Point | null;
}

export interface DoodleDraft {
  kind: "doodle";
  fg: Point[][];
  bg: Point[][];
}

export interface SeglabDraft {
  kind: "seglab";
  /** Row-major binary mask, image_size squared entries of 0/1. */
  mask: Uint8Array | null;
}

export type PromptDraft = ClickDraft | BBoxDraft | DoodleDraft | SeglabDraft;

export interface PromptJson {
  kind: PromptKind;
  [key: string]: unknown;
}

export function emptyDraft(kind: PromptKind): PromptDraft {
  switch (kind) {
    case "click":
      return { kind, fg: [], bg: [] };
    case "bbox":
      return { kind, tl: null, br: null };
    case "doodle":
      return { kind, fg: [], bg: [] };
    case "seglab":
      return { kind, mask: null };
  }
}

/** Deep value-copy so history snapshots cannot alias live drafts. */
export function cloneDraft(draft: PromptDraft): PromptDraft {
  switch (draft.kind) {
    case "click":
      return {
        kind: "click",
        fg: draft.fg.map((p) => [p[0], p[1]] as Point),
        bg: draft.bg.map((p) => [p[0], p[1]] as Point),
      };
    case "bbox":
      return {
        kind: "bbox",
        tl: draft.tl ? [draft.tl[0], draft.tl[1]] : null,
        br: draft.br ? [draft.br[0], draft.br[1]] : null,
      };
    case "doodle":
      return {
        kind: "doodle",
        fg: draft.fg.map((line) => line.map((p) => [p[0], p[1]] as Point)),
        bg: draft.bg.map((line) => line.map((p) => [p[0], p[1]] as Point)),
      };
    case "seglab":
      return { kind: "seglab", mask: draft.mask ? new Uint8Array(draft.mask) : null };
  }
}

/** Row-major binary run-length; counts start with a background run. */
export function rleEncode(mask: ArrayLike<number>): string {
  const counts: number[] = [];
  let current = 0;
  let run = 0;
  for (let i = 0; i < mask.length; i++) {
    const v = mask[i] ? 1 : 0;
    if (v === current) {
      run += 1;
    } else {
      counts.push(run);
      current = v;
      run = 1;
    }
  }
  counts.push(run);
  return counts.join(" ");
}

export function rleDecode(rle: string, size: number): Uint8Array {
  const counts = rle.trim() === "" ? [] : rle.trim().split(/\s+/).map(Number);
  if (counts.some((c) => !Number.isInteger(c) || c < 0)) {
    throw new Error(`malformed RLE counts: ${rle}`);
  }
  const total = counts.reduce((a, b) => a + b, 0);
  if (total !== size) {
    throw new Error(`RLE length ${total} does not match mask size ${size}`);
  }
  const flat = new Uint8Array(size);
  let pos = 0;
  let value = 0;
  for (const c of counts) {
    if (value) flat.fill(1, pos, pos + c);
    pos += c;
    value ^= 1;
  }
  return flat;
}

/** Client-side mirror of the server's prompt validation rules. */
export function validateDraft(draft: PromptDraft): string | null {
  switch (draft.kind) {
    case "click":
      if (draft.fg.length === 0) return "place at least one foreground click";
      return null;
    case "bbox": {
      if (!draft.tl || !draft.br) return "drag a box on the template";
      const [x0, y0] = draft.tl;
      const [x1, y1] = draft.br;
      if (!(x0 < x1 && y0 < y1)) return "box corners must be ordered tl < br";
      return null;
    }
    case "doodle": {
      if (draft.fg.filter((l) => l.length > 0).length === 0)
        return "draw at least one foreground stroke";
      try {
        rasterizeDoodle([...draft.fg, ...draft.bg].filter((l) => l.length > 0), IMAGE_SIZE);
      } catch (err) {
        return String(err instanceof Error ? err.message : err);
      }
      return null;
    }
    case "seglab":
      if (!draft.mask) return "upload or draw a template mask";
      if (!Array.from(draft.mask).some((v) => v === 1)) return "mask is empty";
      return null;
  }
}

/** Serialize a draft to the shared prompt JSON schema.  Throws on invalid. */
export function draftToJson(draft: PromptDraft): PromptJson {
  const problem = validateDraft(draft);
  if (problem !== null) throw new Error(problem);
  switch (draft.kind) {
    case "click":
      return {
        kind: "click",
        fg: draft.fg.map((p) => [p[0], p[1]]),
        bg: draft.bg.map((p) => [p[0], p[1]]),
      };
    case "bbox":
      return { kind: "bbox", tl: [...draft.tl!], br: [...draft.br!] };
    case "doodle":
      return {
        kind: "doodle",
        fg: draft.fg.filter((l) => l.length > 0).map((l) => l.map((p) => [p[0], p[1]])),
        bg: draft.bg.filter((l) => l.length > 0).map((l) => l.map((p) => [p[0], p[1]])),
      };
    case "seglab":
      return {
        kind: "seglab",
        mask_rle: rleEncode(draft.mask!),
        size: [IMAGE_SIZE, IMAGE_SIZE],
      };
  }
}

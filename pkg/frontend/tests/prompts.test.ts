import { describe, expect, it } from "vitest";
import {
  PromptDraft,
  cloneDraft,
  draftToJson,
  emptyDraft,
  rleDecode,
  rleEncode,
  validateDraft,
} from "../src/prompts";

describe("rle", () => {
  it("round trips arbitrary binary rows", () => {
    for (let seed = 0; seed < 50; seed++) {
      // deterministic LCG so the fuzz corpus is stable
      let s = seed * 2654435761 + 1;
      const next = () => {
        s = (s * 1103515245 + 12345) & 0x7fffffff;
        return s / 0x7fffffff;
      };
      const mask = Uint8Array.from({ length: 4096 }, () => (next() > 0.5 ? 1 : 0));
      expect(rleDecode(rleEncode(mask), 4096)).toEqual(mask);
    }
  });

  it("starts with a background run", () => {
    expect(rleEncode(Uint8Array.from([1, 1, 0, 0]))).toBe("0 2 2");
    expect(rleEncode(Uint8Array.from([0, 0, 0, 0]))).toBe("4");
  });

  it("rejects length mismatches", () => {
    expect(() => rleDecode("3 2", 4096)).toThrow(/does not match/);
  });
});

describe("draft validation and serialization", () => {
  it("serializes every kind to the shared schema", () => {
    const drafts: PromptDraft[] = [
      { kind: "click", fg: [[32, 32]], bg: [[1, 2]] },
      { kind: "bbox", tl: [10, 10], br: [20, 20] },
      { kind: "doodle", fg: [[[5, 5], [9, 9]]], bg: [] },
      {
        kind: "seglab",
        mask: Uint8Array.from({ length: 4096 }, (_, i) => (i < 100 ? 1 : 0)),
      },
    ];
    for (const draft of drafts) {
      expect(validateDraft(draft)).toBeNull();
      const doc = draftToJson(draft);
      expect(doc.kind).toBe(draft.kind);
      expect(() => JSON.stringify(doc)).not.toThrow();
    }
  });

  it("mirrors the server's rejection rules", () => {
    expect(validateDraft({ kind: "click", fg: [], bg: [[1, 1]] })).toMatch(/foreground/);
    expect(validateDraft({ kind: "bbox", tl: [20, 20], br: [10, 10] })).toMatch(/tl < br/);
    expect(validateDraft({ kind: "bbox", tl: null, br: null })).not.toBeNull();
    expect(validateDraft({ kind: "doodle", fg: [], bg: [[[1, 1]]] })).toMatch(/foreground/);
    expect(
      validateDraft({ kind: "seglab", mask: new Uint8Array(4096) }),
    ).toMatch(/empty/);
    expect(() => draftToJson({ kind: "click", fg: [], bg: [] })).toThrow();
  });

  it("drops empty doodle strokes when serializing", () => {
    const doc = draftToJson({ kind: "doodle", fg: [[[1, 1]], []], bg: [[]] });
    expect(doc.fg).toEqual([[[1, 1]]]);
    expect(doc.bg).toEqual([]);
  });

  it("seglab serializes to RLE of the full 64x64 grid", () => {
    const mask = new Uint8Array(4096);
    mask.fill(1, 0, 64); // first row
    const doc = draftToJson({ kind: "seglab", mask });
    expect(doc.mask_rle).toBe("0 64 4032");
    expect(doc.size).toEqual([64, 64]);
  });
});

describe("cloneDraft", () => {
  it("is a deep value copy for every kind", () => {
    const doodle: PromptDraft = { kind: "doodle", fg: [[[1, 1]]], bg: [] };
    const copy = cloneDraft(doodle);
    (doodle.fg[0][0] as number[])[0] = 99;
    expect((copy as typeof doodle).fg[0][0]).toEqual([1, 1]);

    const seglab: PromptDraft = { kind: "seglab", mask: Uint8Array.from([1, 0]) };
    const sCopy = cloneDraft(seglab);
    seglab.mask![0] = 0;
    expect((sCopy as typeof seglab).mask![0]).toBe(1);
  });

  it("emptyDraft produces an invalid draft for every kind", () => {
    for (const kind of ["click", "bbox", "doodle", "seglab"] as const) {
      expect(validateDraft(emptyDraft(kind))).not.toBeNull();
    }
  });
});

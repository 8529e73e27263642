import { describe, expect, it } from "vitest";
import type { PredictResponse } from "../src/api";
import type { ClickDraft } from "../src/prompts";
import { StudioSession } from "../src/session";

const RESPONSE: PredictResponse = {
  mask_rle: "4096",
  prob_png: "",
  latency_ms: 1,
  model_hash: "abc",
};

describe("StudioSession", () => {
  it("undo restores the exact previous draft", () => {
    const s = new StudioSession("click");
    s.edit((d) => (d as ClickDraft).fg.push([10, 10]));
    s.edit((d) => (d as ClickDraft).fg.push([20, 20]));
    expect((s.draft as ClickDraft).fg).toEqual([
      [10, 10],
      [20, 20],
    ]);
    expect(s.undo()).toBe(true);
    expect((s.draft as ClickDraft).fg).toEqual([[10, 10]]);
    expect(s.undo()).toBe(true);
    expect((s.draft as ClickDraft).fg).toEqual([]);
    expect(s.undo()).toBe(false);
  });

  it("undo snapshots are value copies, not aliases", () => {
    const s = new StudioSession("click");
    s.edit((d) => (d as ClickDraft).fg.push([10, 10]));
    const live = s.draft as ClickDraft;
    s.edit((d) => (d as ClickDraft).fg.push([20, 20]));
    live.fg[0] = [99, 99]; // mutate through the old reference
    s.undo();
    s.undo();
    expect((s.draft as ClickDraft).fg).toEqual([]);
  });

  it("switching kinds starts a fresh draft and is undoable", () => {
    const s = new StudioSession("click");
    s.edit((d) => (d as ClickDraft).fg.push([5, 5]));
    s.switchKind("bbox");
    expect(s.draft.kind).toBe("bbox");
    s.undo();
    expect(s.draft.kind).toBe("click");
    expect((s.draft as ClickDraft).fg).toEqual([[5, 5]]);
  });

  it("history entries snapshot the submitted prompt", () => {
    const s = new StudioSession("click");
    s.edit((d) => (d as ClickDraft).fg.push([1, 1]));
    s.recordResult(RESPONSE, 0.5);
    s.edit((d) => (d as ClickDraft).fg.push([2, 2]));
    expect(s.history).toHaveLength(1);
    expect((s.history[0].prompt as ClickDraft).fg).toEqual([[1, 1]]);
    expect(s.history[0].dice).toBe(0.5);
    expect(s.lastResponse).toBe(RESPONSE);
  });
});

import type { PredictResponse } from "./api";
import { PromptDraft, PromptKind, cloneDraft, emptyDraft } from "./prompts";

export interface HistoryEntry {
  prompt: PromptDraft;
  dice?: number;
}

/**
 * Studio session state.  Coordinates in drafts are image-pixel space, never
 * canvas space; history entries are value snapshots so undo is exact.
 */
export class StudioSession {
  sessionId: string | null = null;
  templatePng: string | null = null;
  queryPng: string | null = null;
  draft: PromptDraft;
  lastResponse: PredictResponse | null = null;
  readonly history: HistoryEntry[] = [];
  private undoStack: PromptDraft[] = [];

  constructor(kind: PromptKind = "click") {
    this.draft = emptyDraft(kind);
  }

  /** Switch prompt-kind tab; each kind starts from a fresh draft. */
  switchKind(kind: PromptKind): void {
    if (kind === this.draft.kind) return;
    this.snapshot();
    this.draft = emptyDraft(kind);
  }

  /** Record the current draft before mutating it. */
  snapshot(): void {
    this.undoStack.push(cloneDraft(this.draft));
  }

  /** Restore the exact previous draft; returns false when nothing to undo. */
  undo(): boolean {
    const prev = this.undoStack.pop();
    if (!prev) return false;
    this.draft = prev;
    return true;
  }

  /** Mutate the draft through `fn` with an automatic undo snapshot. */
  edit(fn: (draft: PromptDraft) => void): void {
    this.snapshot();
    fn(this.draft);
  }

  recordResult(response: PredictResponse, dice?: number): void {
    this.lastResponse = response;
    const entry: HistoryEntry = { prompt: cloneDraft(this.draft) };
    if (dice !== undefined) entry.dice = dice;
    this.history.push(entry);
  }

  clearDraft(): void {
    this.snapshot();
    this.draft = emptyDraft(this.draft.kind);
  }
}

import { ApiError, DemoTask, StudioApi } from "./api";
import { IMAGE_SIZE, Point, canvasToImageCoords } from "./coords";
import { drawScaled, loadPng, maskOverlayCanvas } from "./overlay";
import {
  BBoxDraft,
  ClickDraft,
  DoodleDraft,
  PromptKind,
  SeglabDraft,
  draftToJson,
  rleDecode,
  validateDraft,
} from "./prompts";
import { rasterizeDoodle } from "./rasterize";
import { StudioSession } from "./session";

const CANVAS_SIZE = 384;
const KINDS: PromptKind[] = ["click", "bbox", "doodle", "seglab"];

const api = new StudioApi("");
const session = new StudioSession("click");

let tasks: DemoTask[] = [];
let templateImage: HTMLImageElement | null = null;
let queryImage: HTMLImageElement | null = null;
let templateMaskRle: string | null = null;
let queryMaskRle: string | null = null;
let overlayCanvas: HTMLCanvasElement | null = null;
let dragStart: Point | null = null;
let activeStroke: Point[] | null = null;

const $ = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;

function setError(message: string | null, field: string | null = null): void {
  const box = $("error-box");
  box.textContent = message ?? "";
  box.style.display = message ? "block" : "none";
  document.querySelectorAll("[data-field]").forEach((el) => {
    (el as HTMLElement).classList.toggle(
      "field-error",
      field !== null && (el as HTMLElement).dataset.field === field,
    );
  });
}

function setOffline(offline: boolean): void {
  $("offline-banner").style.display = offline ? "block" : "none";
}

function drawTemplate(): void {
  const canvas = $<HTMLCanvasElement>("template-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (templateImage) drawScaled(ctx, templateImage, CANVAS_SIZE);
  const scale = CANVAS_SIZE / IMAGE_SIZE;
  const draft = session.draft;
  ctx.save();
  if (draft.kind === "click") {
    for (const [points, color] of [
      [draft.fg, "#3fa34d"],
      [draft.bg, "#d7263d"],
    ] as [Point[], string][]) {
      ctx.fillStyle = color;
      for (const [x, y] of points) {
        ctx.beginPath();
        ctx.arc((x + 0.5) * scale, (y + 0.5) * scale, 5, 0, 2 * Math.PI);
        ctx.fill();
      }
    }
  } else if (draft.kind === "bbox" && draft.tl && draft.br) {
    ctx.strokeStyle = "#ffb703";
    ctx.lineWidth = 2;
    ctx.strokeRect(
      draft.tl[0] * scale,
      draft.tl[1] * scale,
      (draft.br[0] - draft.tl[0]) * scale,
      (draft.br[1] - draft.tl[1]) * scale,
    );
  } else if (draft.kind === "doodle") {
    for (const [lines, color] of [
      [draft.fg, "#3fa34d"],
      [draft.bg, "#d7263d"],
    ] as [Point[][], string][]) {
      ctx.fillStyle = color;
      for (const line of lines) {
        if (line.length === 0) continue;
        try {
          // client-side rasterization: preview is exactly what the model sees
          for (const [x, y] of rasterizeDoodle([line], IMAGE_SIZE)) {
            ctx.fillRect(x * scale, y * scale, scale, scale);
          }
        } catch {
          /* stroke entirely outside the image */
        }
      }
    }
  } else if (draft.kind === "seglab" && draft.mask) {
    ctx.globalAlpha = 0.5;
    ctx.fillStyle = "#3fa34d";
    for (let i = 0; i < draft.mask.length; i++) {
      if (!draft.mask[i]) continue;
      const x = i % IMAGE_SIZE;
      const y = Math.floor(i / IMAGE_SIZE);
      ctx.fillRect(x * scale, y * scale, scale, scale);
    }
  }
  ctx.restore();
}

function drawQuery(): void {
  const canvas = $<HTMLCanvasElement>("query-canvas");
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  if (queryImage) drawScaled(ctx, queryImage, CANVAS_SIZE);
  if (overlayCanvas) {
    ctx.save();
    ctx.globalAlpha = Number($<HTMLInputElement>("opacity").value);
    drawScaled(ctx, overlayCanvas, CANVAS_SIZE);
    ctx.restore();
  }
}

function redraw(): void {
  drawTemplate();
  drawQuery();
  $("undo-btn").toggleAttribute("disabled", false);
  const problem = validateDraft(session.draft);
  $("submit-btn").toggleAttribute("disabled", problem !== null);
  $<HTMLElement>("draft-status").textContent = problem ?? "prompt ready";
}

function selectKind(kind: PromptKind): void {
  session.switchKind(kind);
  document.querySelectorAll(".tab").forEach((el) => {
    el.classList.toggle("active", (el as HTMLElement).dataset.kind === kind);
  });
  if (kind === "seglab" && templateMaskRle) {
    session.edit((d) => {
      (d as SeglabDraft).mask = rleDecode(templateMaskRle!, IMAGE_SIZE * IMAGE_SIZE);
    });
  }
  redraw();
}

function canvasPoint(ev: MouseEvent, canvas: HTMLCanvasElement): Point {
  const rect = canvas.getBoundingClientRect();
  return canvasToImageCoords(
    [ev.clientX - rect.left, ev.clientY - rect.top],
    rect.width,
  );
}

function wireTemplateCanvas(): void {
  const canvas = $<HTMLCanvasElement>("template-canvas");
  canvas.addEventListener("mousedown", (ev) => {
    const pt = canvasPoint(ev, canvas);
    const draft = session.draft;
    if (draft.kind === "click") {
      session.edit((d) => {
        const c = d as ClickDraft;
        (ev.shiftKey ? c.bg : c.fg).push(pt);
      });
      redraw();
    } else if (draft.kind === "bbox") {
      dragStart = pt;
    } else if (draft.kind === "doodle") {
      session.snapshot();
      activeStroke = [pt];
      const d = session.draft as DoodleDraft;
      (ev.shiftKey ? d.bg : d.fg).push(activeStroke);
      redraw();
    }
  });
  canvas.addEventListener("mousemove", (ev) => {
    if (activeStroke) {
      const pt = canvasPoint(ev, canvas);
      const last = activeStroke[activeStroke.length - 1];
      if (!last || last[0] !== pt[0] || last[1] !== pt[1]) {
        activeStroke.push(pt);
        redraw();
      }
    } else if (dragStart) {
      const pt = canvasPoint(ev, canvas);
      const d = session.draft as BBoxDraft;
      d.tl = [Math.min(dragStart[0], pt[0]), Math.min(dragStart[1], pt[1])];
      d.br = [Math.max(dragStart[0], pt[0]), Math.max(dragStart[1], pt[1])];
      redraw();
    }
  });
  const finish = (ev: MouseEvent) => {
    if (dragStart) {
      const pt = canvasPoint(ev, canvas);
      session.edit((d) => {
        const b = d as BBoxDraft;
        b.tl = [Math.min(dragStart![0], pt[0]), Math.min(dragStart![1], pt[1])];
        b.br = [Math.max(dragStart![0], pt[0]) + 1, Math.max(dragStart![1], pt[1]) + 1];
        b.br = [Math.min(b.br[0], IMAGE_SIZE - 0), Math.min(b.br[1], IMAGE_SIZE - 0)];
      });
      dragStart = null;
      redraw();
    }
    activeStroke = null;
  };
  canvas.addEventListener("mouseup", finish);
  canvas.addEventListener("mouseleave", () => {
    activeStroke = null;
    dragStart = null;
  });
}

async function submit(): Promise<void> {
  if (!session.templatePng || !session.queryPng) {
    setError("load a template and a query image first");
    return;
  }
  let promptJson;
  try {
    promptJson = draftToJson(session.draft);
  } catch (err) {
    setError(err instanceof Error ? err.message : String(err), "prompt");
    return;
  }
  setError(null);
  $("submit-btn").toggleAttribute("disabled", true);
  try {
    const resp = await api.predict({
      template_png: session.templatePng,
      query_png: session.queryPng,
      prompt: promptJson,
      ensemble_k: Number($<HTMLInputElement>("ensemble-k").value) || 1,
      session_id: session.sessionId ?? undefined,
    });
    setOffline(false);
    let dice: number | undefined;
    if (queryMaskRle) {
      dice = diceFromRle(resp.mask_rle, queryMaskRle);
      $("dice-readout").textContent = `Dice vs reference: ${dice.toFixed(3)}`;
    } else {
      $("dice-readout").textContent = "";
    }
    session.recordResult(resp, dice);
    overlayCanvas = maskOverlayCanvas(resp.mask_rle);
    $("latency-readout").textContent = `latency ${resp.latency_ms.toFixed(0)} ms`;
    renderHistory();
    redraw();
  } catch (err) {
    if (err instanceof DOMException && err.name === "AbortError") return;
    if (err instanceof ApiError) {
      setError(err.message, err.field);
    } else {
      setOffline(true);
    }
  } finally {
    redraw();
  }
}

export function diceFromRle(aRle: string, bRle: string): number {
  const a = rleDecode(aRle, IMAGE_SIZE * IMAGE_SIZE);
  const b = rleDecode(bRle, IMAGE_SIZE * IMAGE_SIZE);
  let inter = 0;
  let total = 0;
  for (let i = 0; i < a.length; i++) {
    inter += a[i] & b[i];
    total += a[i] + b[i];
  }
  return total === 0 ? 1 : (2 * inter) / total;
}

async function segmentAll(): Promise<void> {
  if (!session.templatePng || !session.queryPng) return;
  try {
    const resp = await api.segmentEverything({
      template_png: session.templatePng,
      query_png: session.queryPng,
      stride: 16,
    });
    setOffline(false);
    const gallery = $("everything-gallery");
    gallery.innerHTML = "";
    for (const m of resp.masks) {
      const cell = document.createElement("canvas");
      cell.width = cell.height = 96;
      const ctx = cell.getContext("2d")!;
      if (queryImage) drawScaled(ctx, queryImage, 96);
      ctx.globalAlpha = 0.6;
      drawScaled(ctx, maskOverlayCanvas(m.mask_rle, [64, 128, 255]), 96);
      cell.title = `score ${m.score.toFixed(3)}`;
      gallery.appendChild(cell);
    }
  } catch (err) {
    if (err instanceof ApiError) setError(err.message, err.field);
    else setOffline(true);
  }
}

function renderHistory(): void {
  const list = $("history-list");
  list.innerHTML = "";
  session.history.forEach((entry, i) => {
    const li = document.createElement("li");
    const dice = entry.dice !== undefined ? ` — dice ${entry.dice.toFixed(3)}` : "";
    li.textContent = `#${i + 1} ${entry.prompt.kind}${dice}`;
    list.appendChild(li);
  });
}

function fillPicker(select: HTMLSelectElement, role: "templates" | "queries"): void {
  select.innerHTML = "";
  tasks.forEach((task, ti) => {
    task[role].forEach((sample, si) => {
      const opt = document.createElement("option");
      opt.value = `${ti}:${si}`;
      opt.textContent = `${task.family} #${sample.index}`;
      select.appendChild(opt);
    });
  });
}

async function pickTemplate(value: string): Promise<void> {
  const [ti, si] = value.split(":").map(Number);
  const sample = tasks[ti]?.templates[si];
  if (!sample) return;
  session.templatePng = sample.image_png;
  templateMaskRle = sample.mask_rle;
  templateImage = await loadPng(sample.image_png);
  redraw();
}

async function pickQuery(value: string): Promise<void> {
  const [ti, si] = value.split(":").map(Number);
  const sample = tasks[ti]?.queries[si];
  if (!sample) return;
  session.queryPng = sample.image_png;
  queryMaskRle = sample.mask_rle;
  queryImage = await loadPng(sample.image_png);
  overlayCanvas = null;
  redraw();
}

function wireUpload(inputId: string, apply: (b64: string) => Promise<void>): void {
  $<HTMLInputElement>(inputId).addEventListener("change", async (ev) => {
    const file = (ev.target as HTMLInputElement).files?.[0];
    if (!file) return;
    const buf = new Uint8Array(await file.arrayBuffer());
    let binary = "";
    buf.forEach((b) => (binary += String.fromCharCode(b)));
    await apply(btoa(binary));
  });
}

async function init(): Promise<void> {
  KINDS.forEach((kind) => {
    const tab = document.querySelector(`.tab[data-kind="${kind}"]`);
    tab?.addEventListener("click", () => selectKind(kind));
  });
  wireTemplateCanvas();
  $("submit-btn").addEventListener("click", () => void submit());
  $("everything-btn").addEventListener("click", () => void segmentAll());
  $("undo-btn").addEventListener("click", () => {
    session.undo();
    redraw();
  });
  $("clear-btn").addEventListener("click", () => {
    session.clearDraft();
    redraw();
  });
  $<HTMLInputElement>("opacity").addEventListener("input", drawQuery);
  $<HTMLSelectElement>("template-picker").addEventListener("change", (ev) =>
    void pickTemplate((ev.target as HTMLSelectElement).value),
  );
  $<HTMLSelectElement>("query-picker").addEventListener("change", (ev) =>
    void pickQuery((ev.target as HTMLSelectElement).value),
  );
  wireUpload("template-upload", async (b64) => {
    session.templatePng = b64;
    templateMaskRle = null;
    templateImage = await loadPng(b64);
    redraw();
  });
  wireUpload("query-upload", async (b64) => {
    session.queryPng = b64;
    queryMaskRle = null;
    queryImage = await loadPng(b64);
    overlayCanvas = null;
    redraw();
  });

  try {
    const health = await api.health();
    $("model-hash").textContent =
      health.status === "ok" ? `model ${health.model_hash}` : "no model loaded";
    session.sessionId = await api.newSession();
    tasks = await api.tasks();
    setOffline(false);
  } catch {
    setOffline(true);
  }
  fillPicker($<HTMLSelectElement>("template-picker"), "templates");
  fillPicker($<HTMLSelectElement>("query-picker"), "queries");
  if (tasks.length > 0) {
    await pickTemplate("0:0");
    await pickQuery("0:0");
  }
  selectKind("click");
}

if (typeof document !== "undefined" && document.getElementById("template-canvas")) {
  void init();
}

import type { PromptJson } from "./prompts";

export interface PredictResponse {
  mask_rle: string;
  prob_png: string;
  latency_ms: number;
  model_hash: string;
}

export interface SegmentEverythingResponse {
  masks: { mask_rle: string; score: number }[];
  latency_ms: number;
  model_hash: string;
}

export interface TaskSample {
  index: number;
  image_png: string;
  mask_rle: string;
}

export interface DemoTask {
  task_id: string;
  family: string;
  templates: TaskSample[];
  queries: TaskSample[];
}

export interface FieldError {
  error: string;
  field: string;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public field: string | null,
    message: string,
  ) {
    super(message);
  }
}

async function post<T>(
  base: string,
  path: string,
  body: unknown,
  signal?: AbortSignal,
): Promise<T> {
  const resp = await fetch(base + path, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(body),
    signal,
  });
  const doc = await resp.json();
  if (!resp.ok) {
    throw new ApiError(resp.status, doc.field ?? null, doc.error ?? resp.statusText);
  }
  return doc as T;
}

/**
 * Thin client over the inference service.  At most one predict request is in
 * flight; a new submit aborts the previous one (cancel-and-replace).
 */
export class StudioApi {
  private inflight: AbortController | null = null;

  constructor(private base: string = "") {}

  async health(): Promise<{ status: string; model_hash?: string }> {
    const resp = await fetch(this.base + "/api/health");
    return resp.json();
  }

  async newSession(): Promise<string> {
    const doc = await post<{ session_id: string }>(this.base, "/api/session", {});
    return doc.session_id;
  }

  async tasks(): Promise<DemoTask[]> {
    const resp = await fetch(this.base + "/api/tasks");
    const doc = await resp.json();
    return doc.tasks;
  }

  /** Cancel-and-replace predict: aborts any in-flight request first. */
  async predict(body: {
    template_png: string;
    query_png: string;
    prompt: PromptJson;
    ensemble_k?: number;
    session_id?: string;
  }): Promise<PredictResponse> {
    this.inflight?.abort();
    const controller = new AbortController();
    this.inflight = controller;
    try {
      return await post<PredictResponse>(this.base, "/api/predict", body, controller.signal);
    } finally {
      if (this.inflight === controller) this.inflight = null;
    }
  }

  async segmentEverything(body: {
    template_png: string;
    query_png: string;
    stride?: number;
  }): Promise<SegmentEverythingResponse> {
    return post<SegmentEverythingResponse>(this.base, "/api/segment_everything", body);
  }
}

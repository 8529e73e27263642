"""HTTP inference service backing the Prompt Studio."""

from __future__ import annotations

import base64
import hashlib
import io
import json
import os
import threading
import time
import uuid

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from PIL import Image

from .evalsuite import predict_prob_batch, segment_everything
from .prompts import InvalidPromptError, prompt_from_json, rle_encode
from .taskgen import generate_task, read_manifest

IMAGE_SIZE = 64


class RequestError(Exception):
    """400-level problem; carries the offending field name."""

    def __init__(self, field, message):
        super().__init__(message)
        self.field = field


def _decode_image(field: str, b64: str) -> np.ndarray:
    if not isinstance(b64, str) or not b64:
        raise RequestError(field, "expected a base64 PNG string")
    try:
        raw = base64.b64decode(b64, validate=True)
        img = Image.open(io.BytesIO(raw)).convert("L")
    except Exception as exc:
        raise RequestError(field, f"not a decodable PNG: {exc}") from exc
    resized = img.size != (IMAGE_SIZE, IMAGE_SIZE)
    if resized:
        img = img.resize((IMAGE_SIZE, IMAGE_SIZE), Image.BILINEAR)
    arr = np.asarray(img, dtype=np.float32) / 255.0
    if resized:
        lo, hi = float(arr.min()), float(arr.max())
        if hi > lo:
            arr = (arr - lo) / (hi - lo)
    return arr


def _encode_png(array: np.ndarray) -> str:
    data = np.clip(np.asarray(array) * 255.0, 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data, mode="L").save(buf, format="PNG")
    return base64.b64encode(buf.getvalue()).decode("ascii")


def _request_seed(body: dict) -> int:
    """Per-request determinism: seed derived from the request content."""
    blob = json.dumps(body, sort_keys=True).encode("utf-8")
    return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


def _load_demo_tasks(manifest_path):
    tasks = []
    for spec in read_manifest(manifest_path):
        task = generate_task(spec)
        entry = {"task_id": task.task_id, "family": spec.family,
                 "templates": [], "queries": []}
        for sample in task.splits["template"][:4]:
            entry["templates"].append({
                "index": sample.index,
                "image_png": _encode_png(sample.image),
                "mask_rle": rle_encode(sample.mask)})
        for sample in task.splits["test"][:4]:
            entry["queries"].append({
                "index": sample.index,
                "image_png": _encode_png(sample.image),
                "mask_rle": rle_encode(sample.mask)})
        tasks.append(entry)
    return tasks


def create_app(ckpt_path=None, demo_manifest=None,
               prompt_log="prompt-log.jsonl", seed=0) -> FastAPI:
    app = FastAPI(title="oneprompt")
    app.add_middleware(CORSMiddleware, allow_origins=["*"],
                       allow_methods=["*"], allow_headers=["*"])

    state = {"model": None, "model_hash": "", "started": time.time()}
    log_lock = threading.Lock()

    if ckpt_path:
        from .net import ModelConfig, OnePromptModel
        from .trainer import checkpoint_hash, load_into_model

        model = OnePromptModel(ModelConfig(), seed=seed)
        load_into_model(model, ckpt_path)
        state["model"] = model
        state["model_hash"] = checkpoint_hash(ckpt_path)

    demo_tasks = _load_demo_tasks(demo_manifest) if demo_manifest else []

    def log_prompt(session_id, prompt_doc, dice=None):
        record = {"session": session_id, "ts": time.time(),
                  "prompt": prompt_doc}
        if dice is not None:
            record["dice"] = dice
        with log_lock:
            with open(prompt_log, "a") as fh:
                fh.write(json.dumps(record) + "\n")

    def no_model():
        return JSONResponse({"status": "no_model",
                             "error": "no checkpoint loaded"},
                            status_code=503)

    @app.exception_handler(RequestError)
    async def request_error_handler(_req, exc: RequestError):
        return JSONResponse({"error": str(exc), "field": exc.field},
                            status_code=400)

    @app.get("/api/health")
    async def health():
        if state["model"] is None:
            return no_model()
        return {"status": "ok", "model_hash": state["model_hash"],
                "uptime_s": time.time() - state["started"]}

    @app.post("/api/session")
    async def session():
        return {"session_id": uuid.uuid4().hex}

    @app.get("/api/tasks")
    async def tasks():
        return {"tasks": demo_tasks}

    async def _json_body(request: Request) -> dict:
        try:
            body = await request.json()
        except Exception as exc:
            raise RequestError("body", f"invalid JSON body: {exc}") from exc
        if not isinstance(body, dict):
            raise RequestError("body", "expected a JSON object")
        return body

    @app.post("/api/predict")
    async def predict(request: Request):
        if state["model"] is None:
            return no_model()
        body = await _json_body(request)
        template = _decode_image("template_png", body.get("template_png"))
        query = _decode_image("query_png", body.get("query_png"))
        prompt_doc = body.get("prompt")
        if not isinstance(prompt_doc, dict):
            raise RequestError("prompt", "expected a prompt JSON object")
        try:
            prompt = prompt_from_json(prompt_doc)
        except (InvalidPromptError, ValueError, KeyError) as exc:
            raise RequestError("prompt", str(exc)) from exc
        k = body.get("ensemble_k", 1)
        if not isinstance(k, int) or k < 1:
            raise RequestError("ensemble_k", "must be an integer >= 1")
        t0 = time.perf_counter()
        probs = predict_prob_batch(state["model"], [query] * k,
                                   [template] * k, [prompt] * k)
        prob = probs.mean(axis=0)
        latency = (time.perf_counter() - t0) * 1000.0
        session_id = body.get("session_id")
        if session_id:
            log_prompt(session_id, prompt_doc)
        return {"mask_rle": rle_encode(prob > 0.5),
                "prob_png": _encode_png(prob),
                "latency_ms": latency,
                "model_hash": state["model_hash"]}

    @app.post("/api/segment_everything")
    async def segment_all(request: Request):
        if state["model"] is None:
            return no_model()
        body = await _json_body(request)
        template = _decode_image("template_png", body.get("template_png"))
        query = _decode_image("query_png", body.get("query_png"))
        stride = body.get("stride", 16)
        if (not isinstance(stride, int) or stride < 1
                or IMAGE_SIZE % stride != 0):
            raise RequestError("stride",
                               f"must divide the image size {IMAGE_SIZE}")
        t0 = time.perf_counter()
        results = segment_everything(state["model"], query, template,
                                     grid_stride=stride)
        latency = (time.perf_counter() - t0) * 1000.0
        return {"masks": [{"mask_rle": rle_encode(mask), "score": score}
                          for mask, score in results],
                "latency_ms": latency,
                "model_hash": state["model_hash"]}

    static_dir = os.path.join(os.path.dirname(__file__), "..", "..",
                              "frontend", "dist")
    static_dir = os.path.abspath(static_dir)
    if os.path.isdir(static_dir):
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="studio")
    return app

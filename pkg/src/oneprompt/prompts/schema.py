"""Shared prompt JSON schema and the run-length mask wire format.

The same schema is consumed by the HTTP service and the browser studio;
all coordinates are integer pixels.
"""

from __future__ import annotations

import numpy as np

from .types import InvalidPromptError, Prompt, PromptKind


def rle_encode(mask: np.ndarray) -> str:
    """Row-major binary run-length; counts start with a background run."""
    flat = np.asarray(mask).reshape(-1).astype(bool)
    counts = []
    current, run = False, 0
    for v in flat:
        if v == current:
            run += 1
        else:
            counts.append(run)
            current, run = v, 1
    counts.append(run)
    return " ".join(str(c) for c in counts)


def rle_decode(rle: str, shape) -> np.ndarray:
    try:
        counts = [int(c) for c in rle.split()]
    except ValueError as exc:
        raise InvalidPromptError(f"malformed RLE counts: {exc}") from exc
    total = int(np.prod(shape))
    if sum(counts) != total:
        raise InvalidPromptError(
            f"RLE length {sum(counts)} does not match mask size {total}")
    flat = np.zeros(total, dtype=np.uint8)
    pos, value = 0, 0
    for c in counts:
        if value:
            flat[pos:pos + c] = 1
        pos += c
        value ^= 1
    return flat.reshape(shape)


def _point(obj, where):
    if (not isinstance(obj, (list, tuple)) or len(obj) != 2
            or not all(isinstance(v, (int, np.integer)) for v in obj)):
        raise InvalidPromptError(f"{where}: expected an integer [x, y] pair, got {obj!r}")
    return (int(obj[0]), int(obj[1]))


def prompt_to_json(prompt: Prompt) -> dict:
    k = prompt.kind
    if k == PromptKind.CLICK:
        return {"kind": "click",
                "fg": [list(p) for p in prompt.fg_points],
                "bg": [list(p) for p in prompt.bg_points]}
    if k == PromptKind.BBOX:
        return {"kind": "bbox", "tl": list(prompt.top_left),
                "br": list(prompt.bottom_right)}
    if k == PromptKind.DOODLE:
        return {"kind": "doodle",
                "fg": [[list(p) for p in line] for line in prompt.fg_polylines],
                "bg": [[list(p) for p in line] for line in prompt.bg_polylines]}
    return {"kind": "seglab", "mask_rle": rle_encode(prompt.mask),
            "size": list(prompt.mask.shape)}


def prompt_from_json(obj: dict, image_size: int = 64) -> Prompt:
    if not isinstance(obj, dict) or "kind" not in obj:
        raise InvalidPromptError("prompt JSON must be an object with a 'kind' field")
    kind = obj["kind"]
    if kind == "click":
        prompt = Prompt(PromptKind.CLICK,
                        fg_points=[_point(p, "fg") for p in obj.get("fg", [])],
                        bg_points=[_point(p, "bg") for p in obj.get("bg", [])])
    elif kind == "bbox":
        prompt = Prompt(PromptKind.BBOX,
                        top_left=_point(obj.get("tl"), "tl"),
                        bottom_right=_point(obj.get("br"), "br"))
    elif kind == "doodle":
        prompt = Prompt(
            PromptKind.DOODLE,
            fg_polylines=[[_point(p, "fg") for p in line]
                          for line in obj.get("fg", [])],
            bg_polylines=[[_point(p, "bg") for p in line]
                          for line in obj.get("bg", [])])
    elif kind == "seglab":
        if "mask_rle" not in obj:
            raise InvalidPromptError("seglab prompt JSON needs 'mask_rle'")
        shape = tuple(obj.get("size", (image_size, image_size)))
        prompt = Prompt(PromptKind.SEGLAB,
                        mask=rle_decode(obj["mask_rle"], shape))
    else:
        raise InvalidPromptError(f"unknown prompt kind: {kind!r}")
    return prompt.validate()

"""Shape renderers for the eight synthetic task families.

Every renderer draws one shape instance into a boolean canvas using only
seeded-rng integer/float math, so generation is identical across machines.
"""

from __future__ import annotations

import numpy as np

FAMILIES = ["disks", "squares", "rings", "crosses", "blobs", "vessels",
            "bars", "holes"]

# Families held out of training for the unseen-task benchmark.
TRAIN_FAMILIES = ["disks", "squares", "rings", "crosses", "blobs", "bars"]
HELDOUT_FAMILIES = ["vessels", "holes"]

SUITED_KIND = {
    "disks": "click", "holes": "click",
    "squares": "bbox", "bars": "bbox",
    "crosses": "doodle", "blobs": "doodle",
    "rings": "seglab", "vessels": "seglab",
}


def _grid(size):
    ys, xs = np.mgrid[0:size, 0:size]
    return xs, ys


def _center(rng, size, margin):
    return (int(rng.integers(margin, size - margin)),
            int(rng.integers(margin, size - margin)))


def draw_disk(rng, size, params=None):
    p = params or {}
    radius = p.get("radius", (6, 13))
    r = int(radius) if np.isscalar(radius) else int(rng.integers(*radius))
    if "center" in p:
        cx, cy = p["center"]
    else:
        cx, cy = _center(rng, size, r + 2)
    xs, ys = _grid(size)
    return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r


def draw_square(rng, size, params=None):
    p = params or {}
    side = int(rng.integers(*p.get("side", (10, 21))))
    half = side // 2
    cx, cy = _center(rng, size, half + 2)
    xs, ys = _grid(size)
    return (np.abs(xs - cx) <= half) & (np.abs(ys - cy) <= half)


def draw_ring(rng, size, params=None):
    p = params or {}
    outer = int(rng.integers(*p.get("outer", (8, 15))))
    thick = int(rng.integers(*p.get("thickness", (2, 5))))
    cx, cy = _center(rng, size, outer + 2)
    xs, ys = _grid(size)
    d2 = (xs - cx) ** 2 + (ys - cy) ** 2
    return (d2 <= outer * outer) & (d2 >= (outer - thick) ** 2)


def draw_cross(rng, size, params=None):
    p = params or {}
    arm = int(rng.integers(*p.get("arm", (8, 15))))
    thick = int(rng.integers(*p.get("thickness", (3, 6))))
    half = thick // 2
    cx, cy = _center(rng, size, arm + 2)
    xs, ys = _grid(size)
    horiz = (np.abs(ys - cy) <= half) & (np.abs(xs - cx) <= arm)
    vert = (np.abs(xs - cx) <= half) & (np.abs(ys - cy) <= arm)
    return horiz | vert


def draw_blob(rng, size, params=None):
    p = params or {}
    r0 = float(rng.uniform(*p.get("radius", (7, 12))))
    cx, cy = _center(rng, size, int(r0 * 1.5) + 2)
    harmonics = rng.normal(0.0, 1.0, size=(3, 2))
    xs, ys = _grid(size)
    theta = np.arctan2(ys - cy, xs - cx)
    wobble = sum(0.15 * (harmonics[k, 0] * np.cos((k + 2) * theta)
                         + harmonics[k, 1] * np.sin((k + 2) * theta))
                 for k in range(3))
    radius = r0 * (1.0 + np.clip(wobble, -0.45, 0.45))
    d = np.sqrt((xs - cx) ** 2 + (ys - cy) ** 2)
    return d <= radius


def draw_vessel(rng, size, params=None):
    p = params or {}
    steps = int(rng.integers(*p.get("steps", (40, 71))))
    thick = int(rng.integers(*p.get("thickness", (1, 3))))
    canvas = np.zeros((size, size), dtype=bool)
    x = float(rng.integers(8, size - 8))
    y = float(rng.integers(8, size - 8))
    angle = float(rng.uniform(0, 2 * np.pi))
    xs, ys = _grid(size)
    for _ in range(steps):
        angle += float(rng.normal(0.0, 0.35))
        x = float(np.clip(x + np.cos(angle), 2, size - 3))
        y = float(np.clip(y + np.sin(angle), 2, size - 3))
        canvas |= (xs - x) ** 2 + (ys - y) ** 2 <= thick * thick
    return canvas


def draw_bar(rng, size, params=None):
    p = params or {}
    length = int(rng.integers(*p.get("length", (16, 31))))
    width = int(rng.integers(*p.get("width", (4, 8))))
    angle = float(rng.uniform(0, np.pi))
    cx, cy = _center(rng, size, 10)
    xs, ys = _grid(size)
    ca, sa = np.cos(angle), np.sin(angle)
    u = (xs - cx) * ca + (ys - cy) * sa
    v = -(xs - cx) * sa + (ys - cy) * ca
    return (np.abs(u) <= length / 2) & (np.abs(v) <= width / 2)


def draw_hole_shape(rng, size, params=None):
    p = params or {}
    r = int(rng.integers(*p.get("radius", (12, 19))))
    cx, cy = _center(rng, size, r + 2)
    xs, ys = _grid(size)
    body = (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    n_holes = int(rng.integers(*p.get("holes", (1, 4))))
    for _ in range(n_holes):
        hr = int(rng.integers(3, 6))
        ang = float(rng.uniform(0, 2 * np.pi))
        dist = float(rng.uniform(0, max(r - hr - 2, 1)))
        hx, hy = cx + dist * np.cos(ang), cy + dist * np.sin(ang)
        body &= (xs - hx) ** 2 + (ys - hy) ** 2 > hr * hr
    return body


RENDERERS = {
    "disks": draw_disk,
    "squares": draw_square,
    "rings": draw_ring,
    "crosses": draw_cross,
    "blobs": draw_blob,
    "vessels": draw_vessel,
    "bars": draw_bar,
    "holes": draw_hole_shape,
}

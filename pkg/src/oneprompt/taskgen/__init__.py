"""Synthetic meta-task generation: task families, splits, episodes, manifests."""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from ..prompts import Prompt, PromptKind, QualityLevel, simulate_prompt
from .families import (FAMILIES, HELDOUT_FAMILIES, RENDERERS, SUITED_KIND,
                       TRAIN_FAMILIES)

IMAGE_SIZE = 64
DEFAULT_SPLITS = {"template": 8, "train": 64, "val": 16, "test": 32}
MIN_FG_FRACTION = 0.01
MAX_FG_FRACTION = 0.60


class TaskGenError(RuntimeError):
    pass


class ManifestError(ValueError):
    pass


@dataclass
class TaskSpec:
    family: str
    seed: int
    noise_level: float = 0.05
    splits: dict = field(default_factory=lambda: dict(DEFAULT_SPLITS))
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ManifestError(f"unknown family {self.family!r}; "
                                f"expected one of {FAMILIES}")
        if any(v <= 0 for v in self.splits.values()):
            raise ManifestError(f"split sizes must be positive: {self.splits}")

    @property
    def task_id(self):
        return f"{self.family}-{self.seed}"


@dataclass
class Sample:
    image: np.ndarray   # 64x64 float32 in [0, 1]
    mask: np.ndarray    # 64x64 uint8
    task_id: str
    split: str
    index: int


@dataclass
class Episode:
    query: Sample
    template: Sample
    prompt: Prompt
    kind: PromptKind
    quality: QualityLevel


class Task:
    def __init__(self, spec: TaskSpec, splits: dict):
        self.spec = spec
        self.splits = splits  # split name -> list[Sample]

    @property
    def task_id(self):
        return self.spec.task_id


def _background(rng, size):
    coarse = rng.uniform(0.05, 0.45, size=(8, 8))
    return ndimage.zoom(coarse, size / 8, order=1, mode="nearest")


def _render_sample(spec: TaskSpec, task_rng_seed, index, split) -> Sample:
    size = IMAGE_SIZE
    for attempt in range(10):
        split_id = zlib.crc32(split.encode())
        rng = np.random.default_rng(
            np.random.SeedSequence([task_rng_seed, split_id, index, attempt]))
        target_intensity = float(rng.uniform(0.65, 0.95))
        n_targets = int(rng.integers(1, 3))
        mask = np.zeros((size, size), dtype=bool)
        for _ in range(n_targets):
            mask |= RENDERERS[spec.family](rng, size, spec.params)
        frac = mask.mean()
        if not (MIN_FG_FRACTION <= frac <= MAX_FG_FRACTION):
            continue
        image = _background(rng, size)
        others = [f for f in FAMILIES if f != spec.family]
        n_distract = int(rng.integers(2, 6))
        for _ in range(n_distract):
            fam = others[int(rng.integers(len(others)))]
            shape = RENDERERS[fam](rng, size, None)
            image[shape] = float(rng.uniform(0.45, 0.80))
        image[mask] = target_intensity
        image = image + rng.normal(0.0, spec.noise_level, size=(size, size))
        image = np.clip(image, 0.0, 1.0).astype(np.float32)
        return Sample(image, mask.astype(np.uint8), spec.task_id, split, index)
    raise TaskGenError(
        f"task {spec.task_id}: no valid mask after 10 attempts (split={split}, "
        f"index={index})")


def generate_task(spec: TaskSpec, seed: int | None = None) -> Task:
    """Materialize all splits; fully reproducible from the spec's seed."""
    base = spec.seed if seed is None else seed
    splits = {}
    for split, count in spec.splits.items():
        splits[split] = [_render_sample(spec, base, i, split)
                         for i in range(count)]
    return Task(spec, splits)


# ------------------------------------------------------------------ episodes


def resolve_kind(policy, task: Task, rng) -> PromptKind:
    """policy: 'suited', 'uniform', a PromptKind, or a kind name."""
    if isinstance(policy, PromptKind):
        return policy
    if policy == "suited":
        return PromptKind(SUITED_KIND[task.spec.family])
    if policy == "uniform":
        kinds = list(PromptKind)
        return kinds[int(rng.integers(len(kinds)))]
    return PromptKind(policy)


def sample_episode(task: Task, rng, kind_policy="suited",
                   quality_policy=QualityLevel.ORACLE,
                   query_split: str = "train") -> Episode:
    """One training/eval episode: uniform template + uniform query + prompt.

    The prompt annotates the template sample's mask.
    """
    if query_split == "template":
        raise ValueError("query must not come from the template split")
    templates = task.splits["template"]
    queries = task.splits[query_split]
    template = templates[int(rng.integers(len(templates)))]
    query = queries[int(rng.integers(len(queries)))]
    kind = resolve_kind(kind_policy, task, rng)
    quality = (quality_policy if isinstance(quality_policy, QualityLevel)
               else QualityLevel(quality_policy))
    prompt = simulate_prompt(template.mask, kind, quality, rng)
    return Episode(query, template, prompt, kind, quality)


# ------------------------------------------------------------------ manifest


def write_manifest(tasks, path):
    doc = {"version": 1,
           "tasks": [{"family": t.family, "seed": t.seed,
                      "noise_level": t.noise_level, "splits": t.splits,
                      "params": t.params} for t in tasks]}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)


def read_manifest(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: malformed JSON at line {exc.lineno}, "
                            f"column {exc.colno}: {exc.msg}") from exc
    if doc.get("version") != 1:
        raise ManifestError(f"{path}: unsupported manifest version "
                            f"{doc.get('version')!r}")
    tasks = []
    for i, entry in enumerate(doc.get("tasks", [])):
        try:
            tasks.append(TaskSpec(family=entry["family"], seed=entry["seed"],
                                  noise_level=entry.get("noise_level", 0.05),
                                  splits=entry.get("splits", dict(DEFAULT_SPLITS)),
                                  params=entry.get("params", {})))
        except (KeyError, ManifestError) as exc:
            raise ManifestError(f"{path}: tasks[{i}]: {exc}") from exc
    return tasks


def mask_corpus(per_family: int = 96, seed: int = 0):
    """Standalone binary masks from every family's renderer.

    Used to pre-train the SegLab mask autoencoder on generic shape priors;
    draws are seeded independently of any benchmark task.
    """
    masks = []
    for fi, family in enumerate(FAMILIES):
        for j in range(per_family):
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, 7777, fi, j]))
            for _ in range(10):
                mask = RENDERERS[family](rng, IMAGE_SIZE, None)
                if int(rng.integers(2)):
                    mask = mask | RENDERERS[family](rng, IMAGE_SIZE, None)
                frac = mask.mean()
                if MIN_FG_FRACTION <= frac <= MAX_FG_FRACTION:
                    masks.append(mask.astype(np.uint8))
                    break
    return masks


def default_benchmark(tasks_per_family: int = 2, noise_level: float = 0.05):
    """The standard train/held-out manifest: 6 train families, 2 held out."""
    train = [TaskSpec(f, seed=100 * i + j, noise_level=noise_level)
             for i, f in enumerate(TRAIN_FAMILIES)
             for j in range(tasks_per_family)]
    heldout = [TaskSpec(f, seed=1000 + 100 * i + j, noise_level=noise_level)
               for i, f in enumerate(HELDOUT_FAMILIES)
               for j in range(tasks_per_family)]
    return train, heldout

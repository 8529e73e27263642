"""The experiment grid: transfer, interactive, variance, quality, ablation."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from ..net import MASKING_VARIANTS, PROMPTING_VARIANTS, ModelConfig
from ..prompts import PromptKind, QualityLevel, simulate_prompt
from ..taskgen import resolve_kind
from .metrics import dice_score
from .predict import ensemble_predict, predict_prob_batch

QUALITY_LADDER = (QualityLevel.LOW, QualityLevel.MEDIUM,
                  QualityLevel.HIGH, QualityLevel.ORACLE)


@dataclass
class EvalReport:
    experiment: str
    seed: int
    checkpoint_hash: str = ""
    ensemble_k: int = 1
    per_task: dict = field(default_factory=dict)   # task_id -> {...}
    per_kind: dict = field(default_factory=dict)   # kind -> mean dice
    per_quality: dict = field(default_factory=dict)
    overall_mean: float = 0.0

    def to_dict(self):
        return {
            "experiment": self.experiment, "seed": self.seed,
            "checkpoint_hash": self.checkpoint_hash,
            "ensemble_k": self.ensemble_k, "per_task": self.per_task,
            "per_kind": self.per_kind, "per_quality": self.per_quality,
            "overall_mean": self.overall_mean,
        }


def _report_paths(out_dir, experiment, ckpt_hash, seed):
    stem = f"{experiment}-{ckpt_hash or 'nockpt'}-{seed}"
    return (os.path.join(out_dir, stem + ".json"),
            os.path.join(out_dir, stem + ".csv"))


def write_report(report: EvalReport, out_dir, csv_rows=None, csv_header=None):
    """Emit the JSON report plus a CSV; returns (json_path, csv_path)."""
    os.makedirs(out_dir, exist_ok=True)
    json_path, csv_path = _report_paths(out_dir, report.experiment,
                                        report.checkpoint_hash, report.seed)
    with open(json_path, "w") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
    if csv_rows is None:
        csv_header = ["task_id", "mean_dice", "std_dice"]
        csv_rows = [[tid, stats["mean"], stats["std"]]
                    for tid, stats in sorted(report.per_task.items())]
    with open(csv_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(csv_header)
        writer.writerows(csv_rows)
    return json_path, csv_path


def _eval_task(model, task, kind, rng, k, quality=QualityLevel.ORACLE,
               split="test"):
    """Per-sample Dice list over a split with ensemble prediction."""
    templates = task.splits["template"]
    scores = []
    for sample in task.splits[split]:
        mask, _ = ensemble_predict(model, sample.image, templates, kind, rng,
                                   k=k, quality=quality)
        scores.append(dice_score(mask, sample.mask))
    return scores


def run_transfer_eval(model, tasks, seed, k: int = 10, kind_policy="suited",
                      quality=QualityLevel.ORACLE,
                      checkpoint_hash: str = "") -> EvalReport:
    """One-prompt evaluation on held-out tasks with suited prompt kinds."""
    report = EvalReport("transfer", seed, checkpoint_hash, ensemble_k=k)
    rng = np.random.default_rng(seed)
    by_kind = {}
    all_scores = []
    for task in tasks:
        kind = resolve_kind(kind_policy, task, rng)
        scores = _eval_task(model, task, kind, rng, k, quality)
        report.per_task[task.task_id] = {
            "mean": float(np.mean(scores)), "std": float(np.std(scores)),
            "kind": kind.value, "n": len(scores),
        }
        by_kind.setdefault(kind.value, []).extend(scores)
        all_scores.extend(scores)
    report.per_kind = {kd: float(np.mean(v)) for kd, v in by_kind.items()}
    report.overall_mean = float(np.mean(all_scores))
    return report


def run_interactive_eval(model, tasks, seed, kind_policy="suited",
                         checkpoint_hash: str = "") -> EvalReport:
    """Degenerate interactive mode: template := query, Oracle query prompt."""
    report = EvalReport("interactive", seed, checkpoint_hash, ensemble_k=1)
    rng = np.random.default_rng(seed)
    all_scores = []
    for task in tasks:
        kind = resolve_kind(kind_policy, task, rng)
        samples = task.splits["test"]
        prompts = [simulate_prompt(s.mask, kind, QualityLevel.ORACLE, rng)
                   for s in samples]
        images = [s.image for s in samples]
        probs = predict_prob_batch(model, images, images, prompts)
        scores = [dice_score(p > 0.5, s.mask)
                  for p, s in zip(probs, samples)]
        report.per_task[task.task_id] = {
            "mean": float(np.mean(scores)), "std": float(np.std(scores)),
            "kind": kind.value, "n": len(scores),
        }
        all_scores.extend(scores)
    report.overall_mean = float(np.mean(all_scores))
    return report


def run_template_variance(model, task, kind: PromptKind, seed,
                          r: int = 100, template_index=None):
    """R single-template runs over the test split; returns distribution stats.

    Each run draws one template (with a fresh prompt) and scores the whole
    test split with that fixed pair.
    """
    if r < 2:
        raise ValueError("template variance needs R >= 2 repetitions")
    rng = np.random.default_rng(seed)
    templates = task.splits["template"]
    samples = task.splits["test"]
    images = [s.image for s in samples]
    run_means = []
    for _ in range(r):
        idx = (int(rng.integers(len(templates))) if template_index is None
               else template_index)
        template = templates[idx]
        prompt = simulate_prompt(template.mask, kind, QualityLevel.ORACLE,
                                 rng)
        probs = predict_prob_batch(model, images,
                                   [template.image] * len(images),
                                   [prompt] * len(images))
        run_means.append(float(np.mean(
            [dice_score(p > 0.5, s.mask) for p, s in zip(probs, samples)])))
    return {"mean": float(np.mean(run_means)),
            "std": float(np.std(run_means)),
            "min": float(np.min(run_means)), "max": float(np.max(run_means)),
            "runs": run_means}


def run_quality_sweep(model, task, kind: PromptKind, seed, k: int = 5):
    """Mean test Dice per tier with templates paired across tiers."""
    templates = task.splits["template"]
    samples = task.splits["test"]
    # Template draws and prompt-noise streams derive from (seed, query, draw)
    # only, so every tier sees the same templates and coupled noise.
    per_tier = {}
    for tier in QUALITY_LADDER:
        scores = []
        for qi, sample in enumerate(samples):
            t_imgs, prompts = [], []
            for draw in range(k):
                child = np.random.default_rng(
                    np.random.SeedSequence([seed, qi, draw]))
                template = templates[int(child.integers(len(templates)))]
                t_imgs.append(template.image)
                prompts.append(simulate_prompt(template.mask, kind, tier,
                                               child))
            probs = predict_prob_batch(model, [sample.image] * k, t_imgs,
                                       prompts)
            scores.append(dice_score(probs.mean(axis=0) > 0.5, sample.mask))
        per_tier[tier.value] = float(np.mean(scores))
    return per_tier


def ablation_variants():
    return [(p, m) for p in PROMPTING_VARIANTS for m in MASKING_VARIANTS]


def run_ablation(train_tasks, heldout_tasks, budget: int, seed,
                 base_config: ModelConfig | None = None, k: int = 3,
                 ae_params=None, progress=None):
    """Train all 12 prompting x masking variants and score held-out Dice.

    Every variant trains from the same seed under the same step budget.
    `ae_params` (name -> array, "mask_ae." prefix) seeds each variant with
    the shared pre-trained mask autoencoder.  Returns a list of row dicts
    {prompting, masking, dice, param_count}.
    """
    from ..net import OnePromptModel
    from ..trainer import TrainConfig, train

    base = base_config or ModelConfig()
    rows = []
    for prompting, masking in ablation_variants():
        cfg = ModelConfig(
            image_size=base.image_size, in_channels=base.in_channels,
            encoder_channels=list(base.encoder_channels),
            token_grid=base.token_grid, length=base.length, heads=base.heads,
            ffn_hidden=base.ffn_hidden, gaussian_window=base.gaussian_window,
            sigma_floor=base.sigma_floor, prompting=prompting,
            masking=masking, with_mask_ae=base.with_mask_ae)
        model = OnePromptModel(cfg, seed=seed)
        if ae_params:
            for name, value in ae_params.items():
                tensor = model.params[name]
                tensor.data = np.asarray(value, dtype=tensor.data.dtype)
        train(model, train_tasks,
              TrainConfig(steps=budget, seed=seed))
        rng = np.random.default_rng(seed)
        scores = []
        for task in heldout_tasks:
            kind = resolve_kind("suited", task, rng)
            scores.extend(_eval_task(model, task, kind, rng, k))
        row = {"prompting": prompting, "masking": masking,
               "dice": float(np.mean(scores)),
               "param_count": model.params.total_size()}
        rows.append(row)
        if progress:
            progress(row)
    return rows


def write_ablation_csv(rows, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["prompting", "masking", "dice"])
        for row in rows:
            writer.writerow([row["prompting"], row["masking"], row["dice"]])
    return path

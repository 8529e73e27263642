#!/usr/bin/env python3
"""Run every checkpoint-dependent experiment and cache results as JSON.

Reads the trained checkpoint and benchmark manifest from artifacts/run1/,
writes one JSON per experiment into artifacts/acceptance/.  The acceptance
test suite gates on these cached artifacts so the (hours-long) experiment
grid runs once, not on every pytest invocation.
"""

import argparse
import json
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from scipy.ndimage import label as cc_label

from oneprompt.evalsuite import (dice_score, mask_iou, run_ablation,
                                 run_interactive_eval, run_quality_sweep,
                                 run_template_variance, run_transfer_eval,
                                 segment_everything, write_ablation_csv,
                                 write_report)
from oneprompt.net import ModelConfig, OnePromptModel
from oneprompt.prompts import PromptKind
from oneprompt.taskgen import generate_task, read_manifest
from oneprompt.taskgen.families import HELDOUT_FAMILIES, TRAIN_FAMILIES
from oneprompt.trainer import checkpoint_hash, load_into_model

RUN_DIR = os.path.join(os.path.dirname(__file__), "..", "artifacts", "run1")
OUT_DIR = os.path.join(os.path.dirname(__file__), "..", "artifacts",
                       "acceptance")


def log(msg):
    print(f"[{time.strftime('%H:%M:%S')}] {msg}", flush=True)


def save(name, payload):
    os.makedirs(OUT_DIR, exist_ok=True)
    path = os.path.join(OUT_DIR, name + ".json")
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
    log(f"wrote {path}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--ckpt", default=os.path.join(RUN_DIR, "model.ckpt"))
    ap.add_argument("--manifest", default=os.path.join(RUN_DIR,
                                                       "manifest.json"))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--ablation-budget", type=int, default=400)
    ap.add_argument("--variance-r", type=int, default=100)
    ap.add_argument("--skip", nargs="*", default=[],
                    choices=["transfer", "interactive", "quality", "variance",
                             "segment", "ablation"])
    args = ap.parse_args()

    model = OnePromptModel(ModelConfig(), seed=args.seed)
    load_into_model(model, args.ckpt)
    ckpt_hash = checkpoint_hash(args.ckpt)
    log(f"loaded checkpoint {args.ckpt} ({ckpt_hash})")

    specs = read_manifest(args.manifest)
    train_tasks = [generate_task(s) for s in specs
                   if s.family in TRAIN_FAMILIES]
    heldout_tasks = [generate_task(s) for s in specs
                     if s.family in HELDOUT_FAMILIES]
    log(f"tasks: {len(train_tasks)} train, {len(heldout_tasks)} held-out")

    transfer_mean = None
    if "transfer" not in args.skip:
        t0 = time.time()
        report = run_transfer_eval(model, heldout_tasks, args.seed, k=10,
                                   checkpoint_hash=ckpt_hash)
        eval_seconds = time.time() - t0
        write_report(report, OUT_DIR)
        train_runtime = {}
        runtime_path = os.path.join(RUN_DIR, "runtime.json")
        if os.path.exists(runtime_path):
            with open(runtime_path) as fh:
                train_runtime = json.load(fh)
        transfer_mean = report.overall_mean
        save("transfer", {
            "overall_mean": report.overall_mean,
            "per_task": report.per_task,
            "per_kind": report.per_kind,
            "ensemble_k": 10,
            "checkpoint_hash": ckpt_hash,
            "eval_seconds": eval_seconds,
            "train_wall_seconds": train_runtime.get("wall_seconds"),
            "total_wall_seconds": (train_runtime.get("wall_seconds", 0)
                                   + eval_seconds),
        })
        log(f"transfer mean dice {report.overall_mean:.4f} "
            f"({eval_seconds:.0f}s eval)")

    if "interactive" not in args.skip:
        report = run_interactive_eval(model, heldout_tasks, args.seed,
                                      checkpoint_hash=ckpt_hash)
        write_report(report, OUT_DIR)
        save("interactive", {
            "overall_mean": report.overall_mean,
            "per_task": report.per_task,
            "one_prompt_mean": transfer_mean,
            "checkpoint_hash": ckpt_hash,
        })
        log(f"interactive mean dice {report.overall_mean:.4f}")

    if "quality" not in args.skip:
        from oneprompt.taskgen.families import SUITED_KIND
        per_family = {}
        for task in heldout_tasks:
            kind = PromptKind(SUITED_KIND[task.family])
            tiers = run_quality_sweep(model, task, kind, args.seed, k=5)
            per_family.setdefault(task.family, []).append(tiers)
            log(f"quality {task.task_id}: {tiers}")
        aggregated = {
            fam: {tier: float(np.mean([t[tier] for t in runs]))
                  for tier in runs[0]}
            for fam, runs in per_family.items()
        }
        save("quality", {"per_family": aggregated,
                         "checkpoint_hash": ckpt_hash})

    if "variance" not in args.skip:
        vessels = next(t for t in heldout_tasks if t.family == "vessels")
        out = {"task_id": vessels.task_id, "r": args.variance_r,
               "checkpoint_hash": ckpt_hash}
        for kind in (PromptKind.SEGLAB, PromptKind.CLICK):
            t0 = time.time()
            stats = run_template_variance(model, vessels, kind, args.seed,
                                          r=args.variance_r)
            out[kind.value] = stats
            log(f"variance {kind.value}: std {stats['std']:.4f} "
                f"mean {stats['mean']:.4f} ({time.time()-t0:.0f}s)")
        save("variance", out)

    if "segment" not in args.skip:
        per_image = []
        images_done = 0
        for task in heldout_tasks:
            template = task.splits["template"][0]
            for sample in task.splits["test"]:
                if images_done >= 20:
                    break
                results = segment_everything(model, sample.image,
                                             template.image, grid_stride=16)
                masks = [m for m, _ in results]
                max_pair_iou = 0.0
                for i in range(len(masks)):
                    for j in range(i + 1, len(masks)):
                        max_pair_iou = max(max_pair_iou,
                                           mask_iou(masks[i], masks[j]))
                components, n_comp = cc_label(sample.mask)
                best_dice = 0.0
                for comp in range(1, n_comp + 1):
                    comp_mask = components == comp
                    for m in masks:
                        best_dice = max(best_dice, dice_score(m, comp_mask))
                per_image.append({
                    "task_id": task.task_id, "index": sample.index,
                    "n_masks": len(masks),
                    "max_pairwise_iou": max_pair_iou,
                    "best_component_dice": best_dice,
                })
                images_done += 1
            if images_done >= 20:
                break
        frac_good = float(np.mean(
            [1.0 if r["best_component_dice"] >= 0.5 else 0.0
             for r in per_image]))
        save("segment_everything", {
            "per_image": per_image, "n_images": len(per_image),
            "fraction_with_good_mask": frac_good,
            "checkpoint_hash": ckpt_hash,
        })
        log(f"segment-everything: {frac_good:.2f} of images have a "
            f"dice>=0.5 mask")

    if "ablation" not in args.skip:
        ae_params = {name: tensor.data
                     for name, tensor in model.params.items()
                     if name.startswith("mask_ae.")}
        t0 = time.time()
        rows = run_ablation(train_tasks, heldout_tasks,
                            budget=args.ablation_budget, seed=args.seed,
                            k=3, ae_params=ae_params,
                            progress=lambda row: log(
                                f"ablation {row['prompting']}+"
                                f"{row['masking']}: {row['dice']:.4f}"))
        write_ablation_csv(rows, os.path.join(OUT_DIR, "ablation.csv"))
        save("ablation", {"rows": rows, "budget": args.ablation_budget,
                          "seed": args.seed,
                          "elapsed_seconds": time.time() - t0})

    log("all experiments complete")


if __name__ == "__main__":
    main()

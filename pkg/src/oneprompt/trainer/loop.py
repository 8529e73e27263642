"""Training configuration, the single optimizer step, and the outer loop."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from ..numerics import Adam
from ..prompts import QualityLevel
from ..taskgen import sample_episode
from .checkpoint import save_checkpoint
from .loss import combined_loss_batch

SIMULATED_TIERS = (QualityLevel.LOW, QualityLevel.MEDIUM,
                   QualityLevel.HIGH, QualityLevel.ORACLE)


class TrainError(RuntimeError):
    pass


class NonFiniteLossError(TrainError):
    """Loss left the finite range; carries the offending batch diagnostics."""


@dataclass
class TrainConfig:
    steps: int
    seed: int
    batch_size: int = 8
    learning_rate: float = 3e-4
    dice_smooth: float = 1.0
    checkpoint_every: int = 0   # 0 = only at the end
    eval_every: int = 0

    def __post_init__(self):
        if self.seed is None:
            raise ValueError("TrainConfig.seed is mandatory")
        for field in ("steps", "batch_size"):
            if getattr(self, field) <= 0:
                raise ValueError(f"TrainConfig.{field} must be positive")
        for field in ("learning_rate", "dice_smooth"):
            if getattr(self, field) <= 0:
                raise ValueError(f"TrainConfig.{field} must be positive")


def train_step(model, episodes, optimizer, dice_smooth: float = 1.0):
    """Forward the batch, apply one Adam update, return pre-update losses.

    Returns (loss, ce, dice) as Python floats.
    """
    if not episodes:
        raise ValueError("train_step requires a nonempty batch")
    queries = np.stack([ep.query.image for ep in episodes])
    templates = np.stack([ep.template.image for ep in episodes])
    targets = np.stack([ep.query.mask for ep in episodes])
    prompts = [ep.prompt for ep in episodes]
    logits = model.forward_batch(queries, templates, prompts)
    total, ce, dice = combined_loss_batch(logits, targets, dice_smooth)
    values = (float(total.data), float(ce.data), float(dice.data))
    if not all(np.isfinite(values)):
        raise NonFiniteLossError(
            f"non-finite loss {values[0]} (ce={values[1]}, dice={values[2]}) "
            f"on tasks {[ep.query.task_id for ep in episodes]}")
    optimizer.zero_grad()
    total.backward()
    optimizer.step()
    return values


def sample_batch(tasks, rng, batch_size, kind_policy="uniform",
                 quality_policy=None, query_split="train"):
    """Draw `batch_size` episodes, task chosen uniformly per episode."""
    episodes = []
    for _ in range(batch_size):
        task = tasks[int(rng.integers(len(tasks)))]
        quality = quality_policy
        if quality is None:
            quality = SIMULATED_TIERS[int(rng.integers(len(SIMULATED_TIERS)))]
        episodes.append(sample_episode(task, rng, kind_policy=kind_policy,
                                       quality_policy=quality,
                                       query_split=query_split))
    return episodes


def train(model, tasks, config: TrainConfig, log_path=None,
          checkpoint_path=None, kind_policy="uniform", progress=None):
    """Run the full loop; returns the list of per-step log records.

    Prompt kinds are sampled uniformly by default so every prompt encoder
    trains; quality tiers are sampled uniformly over the four simulated
    tiers.  Writes JSON-lines log records {"step", "loss", "ce", "dice"}.
    """
    rng = np.random.default_rng(config.seed)
    optimizer = Adam(model.trainable_params(), lr=config.learning_rate)
    history = []
    log_fh = open(log_path, "w") if log_path else None
    try:
        for step in range(1, config.steps + 1):
            episodes = sample_batch(tasks, rng, config.batch_size,
                                    kind_policy=kind_policy)
            try:
                loss, ce, dice = train_step(model, episodes, optimizer,
                                            config.dice_smooth)
            except NonFiniteLossError as exc:
                raise NonFiniteLossError(f"step {step}: {exc}") from exc
            record = {"step": step, "loss": loss, "ce": ce, "dice": dice}
            history.append(record)
            if log_fh:
                log_fh.write(json.dumps(record) + "\n")
                log_fh.flush()
            if progress:
                progress(record)
            if (checkpoint_path and config.checkpoint_every
                    and step % config.checkpoint_every == 0):
                save_checkpoint(model, checkpoint_path)
        if checkpoint_path:
            save_checkpoint(model, checkpoint_path)
    finally:
        if log_fh:
            log_fh.close()
    return history

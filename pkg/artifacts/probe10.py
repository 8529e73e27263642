import sys
import time

import numpy as np

sys.path.insert(0, "src")
from oneprompt.net import ModelConfig, OnePromptModel
from oneprompt.numerics import Adam
from oneprompt.taskgen import TaskSpec, generate_task
from oneprompt.trainer import sample_batch, train_step
from oneprompt.trainer.loss import combined_loss

task = generate_task(TaskSpec(family="disks", seed=11, noise_level=0.05,
                              splits={"template": 8, "train": 64,
                                      "val": 16, "test": 32}))
eps = sample_batch([task], np.random.default_rng(0), 8)
print("kinds:", [ep.prompt.kind for ep in eps],
      "quality:", [getattr(ep, "quality", "?") for ep in eps], flush=True)


def per_episode(model):
    queries = np.stack([ep.query.image for ep in eps])
    templates = np.stack([ep.template.image for ep in eps])
    prompts = [ep.prompt for ep in eps]
    logits = model.forward_batch(queries, templates, prompts)
    rows = []
    for i, ep in enumerate(eps):
        _, ce, dice = combined_loss(logits[i], ep.query.mask)
        rows.append((float(ce.data), float(dice.data)))
    return rows


model = OnePromptModel(ModelConfig(), seed=0)
opt = Adam(model.trainable_params(), lr=2e-3, betas=(0.9, 0.99))
t0 = time.time()
for step in range(1, 401):
    loss, ce, dice = train_step(model, eps, opt)
    if step % 50 == 0 or step == 1:
        print(f"step {step} loss {loss:.4f} ce {ce:.4f} dice {dice:.4f} "
              f"({time.time()-t0:.0f}s)", flush=True)
    if step in (200, 400):
        for i, (c, d) in enumerate(per_episode(model)):
            print(f"  ep{i} kind={eps[i].prompt.kind} ce={c:.4f} "
                  f"dice={d:.4f}", flush=True)

import sys
import time

import numpy as np

sys.path.insert(0, "src")
from oneprompt.net import ModelConfig, OnePromptModel
from oneprompt.numerics import Adam
from oneprompt.taskgen import TaskSpec, generate_task
from oneprompt.trainer import sample_batch, train_step

task = generate_task(TaskSpec(family="disks", seed=11, noise_level=0.05,
                              splits={"template": 8, "train": 64,
                                      "val": 16, "test": 32}))
eps = sample_batch([task], np.random.default_rng(0), 8)

for label, lr, beta2 in [("2e-3_b99", 2e-3, 0.99),
                         ("3e-3_b99", 3e-3, 0.99)]:
    model = OnePromptModel(ModelConfig(), seed=0)
    opt = Adam(model.trainable_params(), lr=lr, betas=(0.9, beta2))
    t0 = time.time()
    for step in range(1, 201):
        loss, ce, dice = train_step(model, eps, opt)
        if step % 50 == 0 or step == 1:
            print(f"{label} step {step} loss {loss:.4f} ce {ce:.4f} "
                  f"dice {dice:.4f} ({time.time()-t0:.0f}s)", flush=True)
    print(f"{label} final {loss:.4f} elapsed {time.time()-t0:.0f}s",
          flush=True)

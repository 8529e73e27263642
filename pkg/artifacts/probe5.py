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

for label, base_lr, decay in [("const3e-3", 3e-3, False),
                              ("cos3e-3", 3e-3, True)]:
    model = OnePromptModel(ModelConfig(), seed=0)
    opt = Adam(model.trainable_params(), lr=base_lr)
    t0 = time.time()
    for step in range(1, 201):
        if decay:
            opt.lr = base_lr * 0.5 * (1 + np.cos(np.pi * (step - 1) / 200))
        loss = train_step(model, eps, opt)[0]
        if step % 50 == 0 or step == 1:
            print(f"{label} step {step} loss {loss:.4f} "
                  f"({time.time()-t0:.0f}s)", flush=True)
    print(f"{label} final {loss:.4f} elapsed {time.time()-t0:.0f}s",
          flush=True)

"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

# Thread cap must land in the environment before the numeric stack loads.
_threads = os.environ.get("ONEPROMPT_THREADS")
if _threads:
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                "MKL_NUM_THREADS", "NUMEXPR_NUM_THREADS"):
        os.environ.setdefault(var, _threads)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2

TRAIN_CONFIG_KEYS = ("steps", "batch_size", "learning_rate", "dice_smooth",
                     "seed", "checkpoint_every", "eval_every")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _load_png(path):
    import numpy as np
    from PIL import Image

    img = Image.open(path).convert("L")
    if img.size != (64, 64):
        img = img.resize((64, 64), Image.BILINEAR)
    arr = np.asarray(img, dtype=np.float32) / 255.0
    return arr


def _save_png(path, array, binary=False):
    import numpy as np
    from PIL import Image

    arr = np.asarray(array)
    if binary:
        data = (arr.astype(bool) * 255).astype(np.uint8)
    else:
        data = np.clip(arr * 255.0, 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path)


def _read_tasks(manifest_path):
    from .taskgen import generate_task, read_manifest

    specs = read_manifest(manifest_path)
    return [generate_task(spec) for spec in specs]


def _split_tasks(tasks):
    from .taskgen.families import HELDOUT_FAMILIES

    train = [t for t in tasks if t.spec.family not in HELDOUT_FAMILIES]
    heldout = [t for t in tasks if t.spec.family in HELDOUT_FAMILIES]
    return train, heldout


def _merge_train_config(args):
    """Config file (JSON) merged with flags; flags win; unknown keys fail."""
    settings = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        unknown = [k for k in doc if k not in TRAIN_CONFIG_KEYS]
        if unknown:
            raise UsageError(f"unknown config key {unknown[0]!r} in "
                             f"{args.config}")
        settings.update(doc)
    for key in TRAIN_CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            settings[key] = flag
    if "seed" not in settings:
        raise UsageError("seed is required (flag --seed or config file)")
    if "steps" not in settings:
        raise UsageError("steps is required (flag --steps or config file)")
    return settings


# ------------------------------------------------------------------ commands


def cmd_gen_tasks(args):
    from .prompts import rle_encode
    from .taskgen import default_benchmark, read_manifest, write_manifest

    if args.init_default:
        train_specs, heldout_specs = default_benchmark(
            tasks_per_family=args.tasks_per_family)
        write_manifest(train_specs + heldout_specs, args.manifest)
    specs = read_manifest(args.manifest)
    from .taskgen import generate_task

    os.makedirs(args.out, exist_ok=True)
    for spec in specs:
        task = generate_task(spec)
        task_dir = os.path.join(args.out, task.task_id)
        os.makedirs(task_dir, exist_ok=True)
        for split, samples in task.splits.items():
            for sample in samples:
                stem = os.path.join(task_dir, f"{split}-{sample.index:03d}")
                _save_png(stem + ".png", sample.image)
                with open(stem + ".rle", "w") as fh:
                    fh.write(rle_encode(sample.mask) + "\n")
        print(f"wrote {task.task_id} -> {task_dir}")
    return EXIT_OK


def cmd_train(args):
    import numpy as np

    from .net import ModelConfig, OnePromptModel
    from .prompts import train_mask_autoencoder
    from .trainer import TrainConfig, load_into_model, save_checkpoint, train

    settings = _merge_train_config(args)
    config = TrainConfig(**settings)
    tasks = _read_tasks(args.manifest)
    train_tasks, _ = _split_tasks(tasks)
    if not train_tasks:
        raise UsageError("manifest contains no train-family tasks")
    model = OnePromptModel(ModelConfig(), seed=config.seed)
    if args.init_from:
        load_into_model(model, args.init_from)
    elif args.ae_epochs > 0:
        from .taskgen import mask_corpus

        masks = mask_corpus(seed=config.seed)
        rng = np.random.default_rng(config.seed)
        print(f"pretraining mask autoencoder on {len(masks)} masks",
              flush=True)
        train_mask_autoencoder(masks, epochs=args.ae_epochs, rng=rng,
                               ae=model.mask_ae)
    log_path = args.log or (args.out + ".log.jsonl")

    def progress(rec):
        if rec["step"] % 100 == 0 or rec["step"] == 1:
            print(f"step {rec['step']} loss {rec['loss']:.4f}", flush=True)

    train(model, train_tasks, config, log_path=log_path,
          checkpoint_path=args.out, progress=progress)
    save_checkpoint(model, args.out)
    print(f"checkpoint written to {args.out}")
    return EXIT_OK


def _load_model(ckpt):
    from .net import ModelConfig, OnePromptModel
    from .trainer import checkpoint_hash, load_into_model

    model = OnePromptModel(ModelConfig(), seed=0)
    load_into_model(model, ckpt)
    return model, checkpoint_hash(ckpt)


def cmd_eval(args):
    from .evalsuite import (EvalReport, run_ablation, run_interactive_eval,
                            run_quality_sweep, run_template_variance,
                            run_transfer_eval, write_ablation_csv,
                            write_report)
    from .prompts import PromptKind

    tasks = _read_tasks(args.manifest)
    train_tasks, heldout = _split_tasks(tasks)
    os.makedirs(args.out, exist_ok=True)

    if args.experiment == "ablate":
        from .trainer import load_checkpoint

        ae_params = None
        if args.ckpt:
            ae_params = {n: v for n, v in load_checkpoint(args.ckpt).items()
                         if n.startswith("mask_ae.")}
        rows = run_ablation(train_tasks, heldout, budget=args.budget,
                            seed=args.seed, ae_params=ae_params,
                            progress=lambda r: print(
                                f"{r['prompting']}+{r['masking']}: "
                                f"dice {r['dice']:.4f}", flush=True))
        report = EvalReport("ablation", args.seed, ensemble_k=args.k)
        report.per_task = {f"{r['prompting']}+{r['masking']}":
                           {"mean": r["dice"], "std": 0.0,
                            "params": r["param_count"]} for r in rows}
        json_path, csv_path = write_report(report, args.out)
        write_ablation_csv(rows, csv_path)
        print(f"reports: {json_path} {csv_path}")
        return EXIT_OK

    model, ckpt_hash = _load_model(args.ckpt)
    if args.experiment == "transfer":
        report = run_transfer_eval(model, heldout, seed=args.seed, k=args.k,
                                   checkpoint_hash=ckpt_hash)
    elif args.experiment == "interactive":
        report = run_interactive_eval(model, heldout, seed=args.seed,
                                      checkpoint_hash=ckpt_hash)
    elif args.experiment == "variance":
        report = EvalReport("variance", args.seed, ckpt_hash)
        by_task = [t for t in tasks if t.spec.family == args.family]
        for task in by_task:
            for kind in (PromptKind.SEGLAB, PromptKind.CLICK):
                stats = run_template_variance(model, task, kind,
                                              seed=args.seed, r=args.r)
                key = f"{task.task_id}:{kind.value}"
                report.per_task[key] = {"mean": stats["mean"],
                                        "std": stats["std"]}
    elif args.experiment == "quality":
        report = EvalReport("quality", args.seed, ckpt_hash, ensemble_k=args.k)
        for task in heldout:
            from .taskgen import resolve_kind
            import numpy as np

            kind = resolve_kind("suited", task, np.random.default_rng(0))
            tiers = run_quality_sweep(model, task, kind, seed=args.seed,
                                      k=args.k)
            report.per_task[task.task_id] = {"mean": tiers["oracle"],
                                             "std": 0.0}
            report.per_quality[task.task_id] = tiers
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown experiment {args.experiment}")
    json_path, csv_path = write_report(report, args.out)
    print(f"reports: {json_path} {csv_path}")
    return EXIT_OK


def cmd_predict(args):
    import numpy as np

    from .evalsuite import predict_prob_batch
    from .prompts import prompt_from_json

    model, _ = _load_model(args.ckpt)
    template = _load_png(args.template)
    query = _load_png(args.query)
    with open(args.prompt) as fh:
        prompt = prompt_from_json(json.load(fh))
    rng = np.random.default_rng(args.seed)
    probs = predict_prob_batch(model, [query] * args.k,
                               [template] * args.k, [prompt] * args.k)
    mask = probs.mean(axis=0) > 0.5
    _save_png(args.out, mask, binary=True)
    print(f"mask written to {args.out}")
    return EXIT_OK


def cmd_serve(args):
    import uvicorn

    from .serve import create_app

    app = create_app(ckpt_path=args.ckpt, demo_manifest=args.manifest,
                     prompt_log=args.prompt_log, seed=args.seed)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# -------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="oneprompt",
                     description="One-prompt segmentation toolkit: task "
                                 "generation, training, evaluation, serving.")
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("gen-tasks",
                       help="materialize tasks from a manifest")
    p.add_argument("--manifest", required=True, help="manifest JSON path")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--init-default", action="store_true",
                   help="write the default benchmark manifest first")
    p.add_argument("--tasks-per-family", type=int, default=2,
                   help="tasks per family for --init-default")
    p.add_argument("--seed", type=int, default=0, help="unused; reserved")
    p.set_defaults(func=cmd_gen_tasks)

    p = sub.add_parser("train", help="train a model")
    p.add_argument("--manifest", required=True, help="manifest JSON path")
    p.add_argument("--config", help="training config JSON (flags override)")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--steps", type=int, help="training steps")
    p.add_argument("--seed", type=int, help="training seed (mandatory)")
    p.add_argument("--batch-size", type=int, dest="batch_size",
                   help="episodes per step")
    p.add_argument("--learning-rate", type=float, dest="learning_rate",
                   help="Adam learning rate")
    p.add_argument("--dice-smooth", type=float, dest="dice_smooth",
                   help="dice smoothing constant")
    p.add_argument("--checkpoint-every", type=int, dest="checkpoint_every",
                   help="periodic checkpoint interval")
    p.add_argument("--eval-every", type=int, dest="eval_every",
                   help="periodic eval interval")
    p.add_argument("--log", help="JSONL training log path")
    p.add_argument("--init-from", help="warm-start checkpoint (skips mask-"
                                       "autoencoder pretraining)")
    p.add_argument("--ae-epochs", type=int, default=12,
                   help="mask-autoencoder pretraining epochs")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run an experiment")
    p.add_argument("experiment",
                   choices=["transfer", "interactive", "variance", "quality",
                            "ablate"])
    p.add_argument("--ckpt", help="checkpoint path (required except ablate)")
    p.add_argument("--manifest", required=True, help="manifest JSON path")
    p.add_argument("--out", required=True, help="report output directory")
    p.add_argument("--seed", type=int, default=0, help="evaluation seed")
    p.add_argument("--k", type=int, default=10, help="ensemble size")
    p.add_argument("--r", type=int, default=100,
                   help="repetitions for variance")
    p.add_argument("--family", default="vessels",
                   help="task family for variance")
    p.add_argument("--budget", type=int, default=1000,
                   help="per-variant step budget for ablate")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("predict",
                       help="segment one query image")
    p.add_argument("--ckpt", required=True, help="checkpoint path")
    p.add_argument("--template", required=True, help="template PNG")
    p.add_argument("--query", required=True, help="query PNG")
    p.add_argument("--prompt", required=True, help="prompt JSON path")
    p.add_argument("--out", required=True, help="output mask PNG")
    p.add_argument("--k", type=int, default=1, help="ensemble size")
    p.add_argument("--seed", type=int, default=0, help="prediction seed")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("serve",
                       help="run the HTTP inference service")
    p.add_argument("--ckpt", help="checkpoint path")
    p.add_argument("--port", type=int, default=8000, help="listen port")
    p.add_argument("--host", default="127.0.0.1", help="bind address")
    p.add_argument("--manifest", help="manifest for bundled demo tasks")
    p.add_argument("--prompt-log", dest="prompt_log",
                   default="prompt-log.jsonl", help="recorded prompt log")
    p.add_argument("--seed", type=int, default=0, help="service seed")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())

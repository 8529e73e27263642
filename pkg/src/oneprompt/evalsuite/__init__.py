from .experiments import (QUALITY_LADDER, EvalReport, ablation_variants,
                          run_ablation, run_interactive_eval,
                          run_quality_sweep, run_template_variance,
                          run_transfer_eval, write_ablation_csv, write_report)
from .metrics import dice_score, mask_iou
from .predict import (ensemble_predict, grid_points, predict_prob_batch,
                      segment_everything)

__all__ = [
    "QUALITY_LADDER", "EvalReport", "ablation_variants", "run_ablation",
    "run_interactive_eval", "run_quality_sweep", "run_template_variance",
    "run_transfer_eval", "write_ablation_csv", "write_report", "dice_score",
    "mask_iou", "ensemble_predict", "grid_points", "predict_prob_batch",
    "segment_everything",
]

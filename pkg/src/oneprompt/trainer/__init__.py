from .checkpoint import (CheckpointError, CorruptCheckpointError,
                         ParameterMismatchError, VersionError,
                         checkpoint_hash, load_checkpoint, load_into_model,
                         save_checkpoint)
from .loop import (NonFiniteLossError, TrainConfig, TrainError, sample_batch,
                   train, train_step)
from .loss import combined_loss, combined_loss_batch

__all__ = [
    "CheckpointError", "CorruptCheckpointError", "ParameterMismatchError",
    "VersionError", "checkpoint_hash", "load_checkpoint", "load_into_model",
    "save_checkpoint", "NonFiniteLossError", "TrainConfig", "TrainError",
    "sample_batch", "train", "train_step", "combined_loss",
    "combined_loss_batch",
]

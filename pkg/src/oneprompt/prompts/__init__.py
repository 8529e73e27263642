from .types import (InvalidPromptError, Prompt, PromptEmbeddingPair,
                    PromptKind, QualityLevel)
from .schema import prompt_from_json, prompt_to_json, rle_decode, rle_encode
from .encode import (bresenham, encode_prompt, encode_prompt_batch,
                     encode_prompt_vecs, init_prompt_params, rasterize_doodle)
from .simulate import simulate_prompt
from .autoencoder import (MaskAutoencoder, reconstruction_iou,
                          train_mask_autoencoder)

__all__ = [
    "InvalidPromptError", "Prompt", "PromptEmbeddingPair", "PromptKind",
    "QualityLevel", "prompt_from_json", "prompt_to_json", "rle_decode",
    "rle_encode", "bresenham", "encode_prompt", "encode_prompt_batch",
    "encode_prompt_vecs", "init_prompt_params", "rasterize_doodle",
    "simulate_prompt", "MaskAutoencoder", "reconstruction_iou",
    "train_mask_autoencoder",
]

from .config import MASKING_VARIANTS, PROMPTING_VARIANTS, ModelConfig
from .encoder import FeaturePyramid, encode_image, project_level
from .former import former_block, init_former_block
from .parser import (gaussian_window_weights, prompt_parser,
                     prompt_parser_details)
from .model import OnePromptModel

__all__ = [
    "MASKING_VARIANTS", "PROMPTING_VARIANTS", "ModelConfig", "FeaturePyramid",
    "encode_image", "project_level", "former_block", "init_former_block",
    "gaussian_window_weights", "prompt_parser", "prompt_parser_details",
    "OnePromptModel",
]

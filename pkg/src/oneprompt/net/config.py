"""Model configuration (desk-scale by default, micro for gradient checks)."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..numerics import ConfigError

PROMPTING_VARIANTS = ("add", "concat", "stack_mlp")
MASKING_VARIANTS = ("add", "binary", "norm", "gaussian")


@dataclass
class ModelConfig:
    image_size: int = 64
    in_channels: int = 1
    encoder_channels: list = field(default_factory=lambda: [16, 32, 64])
    token_grid: int = 8
    length: int = 128          # token embedding width L
    heads: int = 4
    ffn_hidden: int = 256
    gaussian_window: int = 5
    sigma_floor: float = 0.1
    prompting: str = "stack_mlp"
    masking: str = "gaussian"
    with_mask_ae: bool = True

    def __post_init__(self):
        if self.image_size % self.token_grid != 0:
            raise ConfigError(f"image_size {self.image_size} not divisible by "
                              f"token grid {self.token_grid}")
        if self.length % self.heads != 0:
            raise ConfigError(f"L={self.length} not divisible by {self.heads} heads")
        if self.prompting not in PROMPTING_VARIANTS:
            raise ConfigError(f"unknown prompting variant {self.prompting!r}")
        if self.masking not in MASKING_VARIANTS:
            raise ConfigError(f"unknown masking variant {self.masking!r}")
        for level in range(self.num_blocks):
            if (self.image_size >> level) % self.token_grid != 0:
                raise ConfigError(f"level {level} feature map not patchable "
                                  f"into a {self.token_grid}x{self.token_grid} grid")

    @property
    def n_tokens(self):
        return self.token_grid * self.token_grid

    @property
    def num_blocks(self):
        # one former block per skip level
        return len(self.encoder_channels)

    def level_size(self, level):
        return self.image_size >> level

    def patch_size(self, level):
        """Patch edge for `level` (or 'bottleneck') yielding the token grid."""
        if level == "bottleneck":
            return self.bottleneck_size // self.token_grid
        return self.level_size(level) // self.token_grid

    @property
    def bottleneck_size(self):
        return self.image_size >> self.num_blocks

    @staticmethod
    def micro():
        """Small config for finite-difference checks (N=16, L=32)."""
        return ModelConfig(image_size=16, encoder_channels=[8, 16],
                           token_grid=4, length=32, heads=4, ffn_hidden=64,
                           with_mask_ae=False)

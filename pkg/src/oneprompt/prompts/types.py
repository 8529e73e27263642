"""Prompt modalities and validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class InvalidPromptError(ValueError):
    """The prompt payload violates its modality's invariants."""


class PromptKind(str, Enum):
    CLICK = "click"
    BBOX = "bbox"
    DOODLE = "doodle"
    SEGLAB = "seglab"


class QualityLevel(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    ORACLE = "oracle"
    RECORDED = "recorded"  # only produced by the service from UI sessions


@dataclass
class Prompt:
    """One user annotation. Exactly one payload, matching `kind`.

    Coordinates are integer pixels (x, y) in image space.
    """
    kind: PromptKind
    fg_points: list = field(default_factory=list)
    bg_points: list = field(default_factory=list)
    top_left: tuple | None = None
    bottom_right: tuple | None = None
    fg_polylines: list = field(default_factory=list)
    bg_polylines: list = field(default_factory=list)
    mask: np.ndarray | None = None

    def validate(self):
        k = self.kind
        if k == PromptKind.CLICK:
            if not self.fg_points:
                raise InvalidPromptError("click prompt needs at least one foreground point")
            self._forbid(bbox=True, doodle=True, mask=True)
        elif k == PromptKind.BBOX:
            if self.top_left is None or self.bottom_right is None:
                raise InvalidPromptError("bbox prompt needs both corners")
            (x0, y0), (x1, y1) = self.top_left, self.bottom_right
            if not (x0 < x1 and y0 < y1):
                raise InvalidPromptError(
                    f"bbox corners must satisfy tl < br, got {self.top_left} / {self.bottom_right}")
            self._forbid(click=True, doodle=True, mask=True)
        elif k == PromptKind.DOODLE:
            if not self.fg_polylines:
                raise InvalidPromptError("doodle prompt needs at least one foreground stroke")
            self._forbid(click=True, bbox=True, mask=True)
        elif k == PromptKind.SEGLAB:
            if self.mask is None:
                raise InvalidPromptError("seglab prompt needs a mask")
            self._forbid(click=True, bbox=True, doodle=True)
        else:  # pragma: no cover
            raise InvalidPromptError(f"unknown prompt kind {k}")
        return self

    def _forbid(self, click=False, bbox=False, doodle=False, mask=False):
        if click and (self.fg_points or self.bg_points):
            raise InvalidPromptError(f"{self.kind.value} prompt carries click points")
        if bbox and (self.top_left is not None or self.bottom_right is not None):
            raise InvalidPromptError(f"{self.kind.value} prompt carries bbox corners")
        if doodle and (self.fg_polylines or self.bg_polylines):
            raise InvalidPromptError(f"{self.kind.value} prompt carries doodle strokes")
        if mask and self.mask is not None:
            raise InvalidPromptError(f"{self.kind.value} prompt carries a mask")


@dataclass
class PromptEmbeddingPair:
    """The two token embeddings (N x L each) representing a prompt."""
    p1: "object"
    p2: "object"

"""Domain types shared by the whole pipeline: mask kinds, samples, colors, boxes.

All types here are immutable after construction (arrays are marked read-only),
so they can be shared freely across threads.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np


class ConfigError(ValueError):
    """A parameter is outside its documented range."""


class TransitionError(ValueError):
    """A mask kind was requested that cannot be produced from the input kind."""


class MaskKind(Enum):
    """The five annotation mask types a scene can carry."""

    SINGLE = "S"
    MULTI_OBJECT = "MO"
    MULTI_PART = "MP"
    SEMANTIC = "Sema"
    CLASS = "C"

    @property
    def code(self) -> str:
        return self.value

    @classmethod
    def parse(cls, text: str) -> "MaskKind":
        for kind in cls:
            if kind.value.lower() == text.strip().lower():
                return kind
        raise ConfigError(
            f"unknown mask kind {text!r}; expected one of "
            + ", ".join(k.value for k in cls)
        )


# Which output kinds each input kind can produce. MULTI_OBJECT and CLASS are
# derived-only and never appear as inputs.
TRANSITIONS: dict[MaskKind, frozenset[MaskKind]] = {
    MaskKind.SINGLE: frozenset(
        {MaskKind.SINGLE, MaskKind.MULTI_OBJECT, MaskKind.CLASS}
    ),
    MaskKind.MULTI_PART: frozenset(
        {MaskKind.SINGLE, MaskKind.MULTI_OBJECT, MaskKind.MULTI_PART, MaskKind.CLASS}
    ),
    MaskKind.SEMANTIC: frozenset(
        {MaskKind.SINGLE, MaskKind.MULTI_OBJECT, MaskKind.SEMANTIC, MaskKind.CLASS}
    ),
}

INPUT_KINDS: frozenset[MaskKind] = frozenset(TRANSITIONS)


def allowed_outputs(kind: MaskKind, has_class_labels: bool = True) -> frozenset[MaskKind]:
    """Return the mask kinds producible from ``kind``.

    CLASS is only producible when every sample carries a class label.
    Raises TransitionError for kinds that are never valid inputs.
    """
    if kind not in TRANSITIONS:
        raise TransitionError(f"{kind.code} masks are derived outputs, not valid inputs")
    outputs = TRANSITIONS[kind]
    if not has_class_labels:
        outputs = outputs - {MaskKind.CLASS}
    return outputs


@dataclass(frozen=True)
class Color:
    """An object/part color with channels in (0, 1]; never pure white or black."""

    r: float
    g: float
    b: float

    def __post_init__(self) -> None:
        for name, c in (("r", self.r), ("g", self.g), ("b", self.b)):
            if not 0.0 < c <= 1.0:
                raise ValueError(f"color channel {name}={c} outside (0, 1]")
        if self.r == self.g == self.b == 1.0:
            raise ValueError("white is reserved for SINGLE-mask foreground")

    @property
    def rgb8(self) -> tuple[int, int, int]:
        """8-bit quantization used at render time (round half up)."""
        return (
            int(self.r * 255 + 0.5),
            int(self.g * 255 + 0.5),
            int(self.b * 255 + 0.5),
        )


@dataclass(frozen=True)
class BoundingBox:
    """Axis-aligned pixel box: offsets from the scene top-left plus extents."""

    x: int
    y: int
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.x < 0 or self.y < 0:
            raise ValueError(f"box origin ({self.x}, {self.y}) must be non-negative")
        if self.w <= 0 or self.h <= 0:
            raise ValueError(f"box extents ({self.w}, {self.h}) must be positive")

    def as_list(self) -> list[int]:
        return [self.x, self.y, self.w, self.h]


def _as_mask3(mask: np.ndarray) -> np.ndarray:
    """Normalize a mask raster to HxWx3 uint8."""
    if mask.ndim == 2:
        mask = np.repeat(mask[:, :, None], 3, axis=2)
    return mask


@dataclass(frozen=True)
class ObjectSample:
    """One input object: an RGB image plus an aligned mask and a class label.

    The mask uses black (0,0,0) for background; any non-black pixel belongs to
    the single object in the sample. For MULTI_PART inputs each distinct
    non-black color is one part; for SEMANTIC inputs each distinct non-black
    color is one semantic category.
    """

    image: np.ndarray  # (H, W, 3) uint8, RGB
    mask: np.ndarray  # (H, W, 3) uint8
    class_label: str
    input_kind: MaskKind

    def __post_init__(self) -> None:
        object.__setattr__(self, "mask", _as_mask3(self.mask))
        if self.image.ndim != 3 or self.image.shape[2] != 3:
            raise ValueError(f"image must be HxWx3, got shape {self.image.shape}")
        if self.mask.shape != self.image.shape:
            raise ValueError(
                f"mask shape {self.mask.shape} does not match image shape {self.image.shape}"
            )
        if self.image.dtype != np.uint8 or self.mask.dtype != np.uint8:
            raise ValueError("image and mask must be uint8 rasters")
        if self.input_kind not in INPUT_KINDS:
            raise TransitionError(
                f"{self.input_kind.code} is not a valid input mask kind"
            )
        if not self.mask.any():
            raise ValueError("mask has no non-background pixels")
        self.image.setflags(write=False)
        self.mask.setflags(write=False)

    @property
    def height(self) -> int:
        return self.image.shape[0]

    @property
    def width(self) -> int:
        return self.image.shape[1]

    @property
    def foreground(self) -> np.ndarray:
        """Boolean (H, W) map of non-background mask pixels."""
        return self.mask.any(axis=2)

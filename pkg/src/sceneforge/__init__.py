"""Scene-composition augmentation: multiply a few image/mask pairs into
unlimited composite scenes with synchronized masks, boxes and counts."""

from .composer import (
    ObjectRecord,
    PlacedObject,
    SceneBundle,
    compose,
    derive_mask,
    fit_background,
    generate_colors,
)
from .core import (
    BoundingBox,
    Color,
    ConfigError,
    MaskKind,
    ObjectSample,
    TransitionError,
    allowed_outputs,
)
from .datagen import (
    BenchRow,
    Catalog,
    CatalogEntry,
    CatalogError,
    GeneratorConfig,
    MemoryModelParams,
    SceneStream,
    benchmark,
    estimate_memory,
    generate_offline,
    load_catalog,
    load_sample,
    select_samples,
    stream,
)
from .packing import (
    OrientationParams,
    PackedLayout,
    PlacedRect,
    Placement,
    RectSize,
    ShrinkParams,
    height_limit,
    pack,
    realize,
    shrink,
)
from .transform import TransformConfig, crop_margins, geometric, photometric

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "BoundingBox",
    "Catalog",
    "CatalogEntry",
    "CatalogError",
    "Color",
    "ConfigError",
    "GeneratorConfig",
    "MaskKind",
    "MemoryModelParams",
    "ObjectRecord",
    "ObjectSample",
    "OrientationParams",
    "PackedLayout",
    "PlacedObject",
    "PlacedRect",
    "Placement",
    "RectSize",
    "SceneBundle",
    "SceneStream",
    "ShrinkParams",
    "TransformConfig",
    "TransitionError",
    "allowed_outputs",
    "benchmark",
    "compose",
    "crop_margins",
    "derive_mask",
    "estimate_memory",
    "fit_background",
    "generate_colors",
    "generate_offline",
    "geometric",
    "height_limit",
    "load_catalog",
    "load_sample",
    "pack",
    "photometric",
    "realize",
    "select_samples",
    "shrink",
    "stream",
]

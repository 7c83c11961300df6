"""Scene assembly: transform, pack, paste and derive every requested mask.

A composed scene carries one image plus any subset of the five mask kinds, all
guaranteed pixel-consistent: every mask marks exactly the same foreground
pixels, and a pixel is attributed to the object that was pasted last at that
location (paste order = selection order).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import cv2
import numpy as np

from .core import (
    BoundingBox,
    Color,
    MaskKind,
    ObjectSample,
    TransitionError,
    allowed_outputs,
)
from .packing import (
    OrientationParams,
    PlacedRect,
    RectSize,
    ShrinkParams,
    height_limit,
    pack,
    realize,
    shrink,
)
from .transform import TransformConfig, crop_margins, geometric, photometric


def generate_colors(n: int) -> list[Color]:
    """Deterministic palette of ``n`` distinct colors, never white or black.

    Channel levels are the L evenly spaced values 1, 1-1/L, ..., 1/L where L is
    the smallest integer with L**3 >= n + 2; candidates are the Cartesian cube
    of those levels in descending (r, g, b) order with white skipped. The cube
    always holds at least n + 1 usable colors, so the palette never starves.
    """
    if n < 1:
        raise ValueError(f"need at least one color, got n={n}")
    levels_count = 1
    while levels_count**3 < n + 2:
        levels_count += 1
    levels = [1 - Fraction(l, levels_count) for l in range(levels_count)]
    colors: list[Color] = []
    for r, g, b in itertools.product(levels, repeat=3):
        if r == g == b == 1:
            continue
        colors.append(Color(float(r), float(g), float(b)))
        if len(colors) == n:
            break
    return colors


@dataclass
class PlacedObject:
    """One transformed sample at its realized slot in scene coordinates."""

    sample: ObjectSample
    rect: PlacedRect


@dataclass
class ObjectRecord:
    """Registry entry for one placed object."""

    index: int
    class_label: str
    mo_color: Color
    part_colors: list[Color] = field(default_factory=list)
    semantic_colors: list[tuple[int, int, int]] = field(default_factory=list)
    occluded: bool = False
    bbox: BoundingBox | None = None


@dataclass
class SceneBundle:
    """A composed scene with synchronized annotations."""

    image: np.ndarray  # (H, W, 3) uint8 RGB
    masks: dict[MaskKind, np.ndarray]  # each (H, W, 3) uint8
    boxes: list[BoundingBox] | None  # one per object, placement order
    counts: dict[str, int]  # class label -> object count
    registry: list[ObjectRecord]

    @property
    def scene_h(self) -> int:
        return self.image.shape[0]

    @property
    def scene_w(self) -> int:
        return self.image.shape[1]


def fit_background(
    bg: np.ndarray, scene_w: int, scene_h: int, rng: np.random.Generator
) -> np.ndarray:
    """Resize the background up to the scene size, or crop a random window.

    Any background smaller than the scene in either dimension is bilinearly
    resized to the exact scene size; otherwise a uniformly random
    scene-sized crop is taken.
    """
    if bg.size == 0:
        raise ValueError("background raster is empty")
    bh, bw = bg.shape[:2]
    if bw < scene_w or bh < scene_h:
        return cv2.resize(bg, (scene_w, scene_h), interpolation=cv2.INTER_LINEAR)
    x = int(rng.integers(0, bw - scene_w + 1))
    y = int(rng.integers(0, bh - scene_h + 1))
    return np.ascontiguousarray(bg[y : y + scene_h, x : x + scene_w])


def _distinct_colors(mask: np.ndarray) -> np.ndarray:
    """Distinct non-black colors of a mask in row-major first-occurrence order."""
    flat = mask.reshape(-1, 3).astype(np.int32)
    packed = (flat[:, 0] << 16) | (flat[:, 1] << 8) | flat[:, 2]
    packed = packed[flat.any(axis=1)]
    uniq, first = np.unique(packed, return_index=True)
    uniq = uniq[np.argsort(first)]
    return np.stack(
        [(uniq >> 16) & 255, (uniq >> 8) & 255, uniq & 255], axis=1
    ).astype(np.uint8)


class _Layers:
    """Per-pixel ownership built by pasting objects in placement order."""

    def __init__(self, scene_h: int, scene_w: int):
        self.owner = np.full((scene_h, scene_w), -1, np.int32)
        self.part = np.full((scene_h, scene_w), -1, np.int32)
        self.sema = np.zeros((scene_h, scene_w, 3), np.uint8)
        self.part_palettes: list[np.ndarray] = []  # per object, (k, 3) uint8

    def paste(self, index: int, placed: PlacedObject, image: np.ndarray) -> None:
        r = placed.rect
        mask = placed.sample.mask
        fg = placed.sample.foreground
        region = (slice(r.y, r.bottom), slice(r.x, r.right))
        image[region][fg] = placed.sample.image[fg]
        self.owner[region][fg] = index
        self.sema[region][fg] = mask[fg]

        palette = _distinct_colors(mask)
        offset = sum(len(p) for p in self.part_palettes)
        self.part_palettes.append(palette)
        local = np.full(mask.shape[:2], -1, np.int32)
        for ordinal, color in enumerate(palette):
            local[(mask == color).all(axis=2)] = offset + ordinal
        self.part[region][fg] = local[fg]


def _derive(kind: MaskKind, layers: _Layers, registry: list[ObjectRecord]) -> np.ndarray:
    visible = layers.owner >= 0
    out = np.zeros((*layers.owner.shape, 3), np.uint8)
    if kind is MaskKind.SINGLE:
        out[visible] = 255
    elif kind is MaskKind.MULTI_OBJECT:
        lut = np.array([rec.mo_color.rgb8 for rec in registry], np.uint8)
        out[visible] = lut[layers.owner[visible]]
    elif kind is MaskKind.MULTI_PART:
        lut = np.array(
            [c.rgb8 for rec in registry for c in rec.part_colors], np.uint8
        )
        out[visible] = lut[layers.part[visible]]
    elif kind is MaskKind.SEMANTIC:
        out[visible] = layers.sema[visible]
    elif kind is MaskKind.CLASS:
        classes = list(dict.fromkeys(rec.class_label for rec in registry))
        class_colors = generate_colors(len(classes))
        lut = np.array(
            [class_colors[classes.index(rec.class_label)].rgb8 for rec in registry],
            np.uint8,
        )
        out[visible] = lut[layers.owner[visible]]
    return out


def derive_mask(
    kind: MaskKind,
    placed: list[PlacedObject],
    registry: list[ObjectRecord],
    scene_h: int,
    scene_w: int,
) -> np.ndarray:
    """Derive one mask kind for already-placed objects.

    The input kind of the placed samples must allow ``kind`` as an output.
    Later-placed objects win overlapping pixels, exactly as in the scene image.
    """
    input_kind = placed[0].sample.input_kind
    if kind not in allowed_outputs(input_kind, has_class_labels=True):
        raise TransitionError(
            f"cannot derive a {kind.code} mask from {input_kind.code} input"
        )
    layers = _Layers(scene_h, scene_w)
    scratch = np.zeros((scene_h, scene_w, 3), np.uint8)
    for i, p in enumerate(placed):
        layers.paste(i, p, scratch)
    return _derive(kind, layers, registry)


def _visible_boxes(owner: np.ndarray, n: int) -> list[BoundingBox | None]:
    """Tight per-object boxes over visible pixels in one pass; None if hidden."""
    ys, xs = np.nonzero(owner >= 0)
    ids = owner[ys, xs]
    min_x = np.full(n, np.iinfo(np.int64).max)
    min_y = np.full(n, np.iinfo(np.int64).max)
    max_x = np.full(n, -1)
    max_y = np.full(n, -1)
    np.minimum.at(min_x, ids, xs)
    np.minimum.at(min_y, ids, ys)
    np.maximum.at(max_x, ids, xs)
    np.maximum.at(max_y, ids, ys)
    boxes: list[BoundingBox | None] = []
    for i in range(n):
        if max_x[i] < 0:
            boxes.append(None)
        else:
            boxes.append(
                BoundingBox(
                    int(min_x[i]),
                    int(min_y[i]),
                    int(max_x[i] - min_x[i] + 1),
                    int(max_y[i] - min_y[i] + 1),
                )
            )
    return boxes


def compose(
    samples: list[ObjectSample],
    cfg: TransformConfig,
    orientation: OrientationParams,
    background: np.ndarray | None,
    outputs: set[MaskKind] | frozenset[MaskKind],
    rng: np.random.Generator,
    with_boxes: bool = True,
) -> SceneBundle:
    """Build one scene from the given samples.

    Pipeline: margin-crop and geometric-transform each object, shrink the
    resulting rectangles, cap the scene height, pack, realize the real-size
    slots, fit the background (black canvas when None), paste objects in
    order, apply photometric noise to the image, then derive the requested
    masks and annotations.

    Draw order on ``rng`` is fixed: three draws per object (flip, angle,
    perspective), background crop offsets, then photometric noise. Identical
    (samples, configuration, seed) therefore reproduce the scene bit-exactly.
    """
    if not samples:
        raise ValueError("compose needs at least one sample")
    input_kind = samples[0].input_kind
    if any(s.input_kind is not input_kind for s in samples):
        raise TransitionError("all samples in a scene must share one input mask kind")
    legal = allowed_outputs(input_kind, has_class_labels=True)
    illegal = set(outputs) - legal
    if illegal:
        raise TransitionError(
            f"cannot derive {sorted(k.code for k in illegal)} from "
            f"{input_kind.code} input (allowed: {sorted(k.code for k in legal)})"
        )

    transformed = [geometric(crop_margins(s), cfg, rng) for s in samples]
    original = [RectSize(t.width, t.height) for t in transformed]
    shrunk = shrink(original, ShrinkParams(cfg.shrinkage))
    h_max = height_limit(shrunk, original, orientation)
    layout = realize(pack(shrunk, h_max), original)

    scene_w, scene_h = layout.scene_w, layout.scene_h
    if background is not None:
        image = fit_background(background, scene_w, scene_h, rng).copy()
    else:
        image = np.zeros((scene_h, scene_w, 3), np.uint8)

    placed = [
        PlacedObject(sample=t, rect=p.real)
        for t, p in zip(transformed, layout.placements)
    ]
    layers = _Layers(scene_h, scene_w)
    for i, p in enumerate(placed):
        layers.paste(i, p, image)

    image = photometric(image, cfg, rng)

    n = len(placed)
    mo_colors = generate_colors(n)
    total_parts = sum(len(p) for p in layers.part_palettes)
    part_colors = (
        generate_colors(total_parts) if input_kind is MaskKind.MULTI_PART else []
    )

    registry: list[ObjectRecord] = []
    offset = 0
    visible_counts = np.bincount(layers.owner[layers.owner >= 0], minlength=n)
    for i, p in enumerate(placed):
        k = len(layers.part_palettes[i])
        record = ObjectRecord(
            index=i,
            class_label=p.sample.class_label,
            mo_color=mo_colors[i],
            occluded=visible_counts[i] == 0,
        )
        if input_kind is MaskKind.MULTI_PART:
            record.part_colors = part_colors[offset : offset + k]
        elif input_kind is MaskKind.SEMANTIC:
            record.semantic_colors = [tuple(c) for c in layers.part_palettes[i]]
        offset += k
        registry.append(record)

    boxes: list[BoundingBox] | None = None
    if with_boxes:
        visible = _visible_boxes(layers.owner, n)
        boxes = []
        for i, p in enumerate(placed):
            if visible[i] is None:
                # fully hidden: fall back to the pre-occlusion slot extent
                r = p.rect
                boxes.append(BoundingBox(r.x, r.y, r.w, r.h))
            else:
                boxes.append(visible[i])
            registry[i].bbox = boxes[i]

    counts: dict[str, int] = {}
    for p in placed:
        counts[p.sample.class_label] = counts.get(p.sample.class_label, 0) + 1

    masks = {
        kind: _derive(kind, layers, registry)
        for kind in sorted(outputs, key=lambda k: k.code)
    }

    return SceneBundle(
        image=image, masks=masks, boxes=boxes, counts=counts, registry=registry
    )

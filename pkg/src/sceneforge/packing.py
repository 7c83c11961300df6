"""Rectangle packing for scene layout.

Objects are shrunk before packing so that their real-size counterparts overlap
controllably, then packed with a maximal-rectangles Best Long Side Fit
heuristic into a strip of fixed height and on-demand growing width. The real
sizes are finally re-centered on the packed slots.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


@dataclass(frozen=True)
class RectSize:
    w: int
    h: int

    def __post_init__(self) -> None:
        if self.w < 1 or self.h < 1:
            raise ValueError(f"rectangle sides must be >= 1, got {self.w}x{self.h}")


@dataclass(frozen=True)
class ShrinkParams:
    """Shrinkage ratio applied to both sides of every rectangle."""

    s: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.s < 1.0:
            raise ValueError(f"shrinkage ratio must be in [0, 1), got {self.s}")


@dataclass(frozen=True)
class OrientationParams:
    """Target width-to-height ratio steering the scene height limit."""

    theta: float = 1.2

    def __post_init__(self) -> None:
        if self.theta <= 0:
            raise ValueError(f"orientation coefficient must be > 0, got {self.theta}")


@dataclass(frozen=True)
class PlacedRect:
    x: int
    y: int
    w: int
    h: int

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def overlap_area(self, other: "PlacedRect") -> int:
        ox = min(self.right, other.right) - max(self.x, other.x)
        oy = min(self.bottom, other.bottom) - max(self.y, other.y)
        return max(0, ox) * max(0, oy)


@dataclass(frozen=True)
class Placement:
    """Slot of one object: the packed (shrunk) rect and its realized real rect."""

    index: int
    shrinked: PlacedRect
    real: PlacedRect | None = None


@dataclass(frozen=True)
class PackedLayout:
    scene_w: int
    scene_h: int
    placements: tuple[Placement, ...]


def shrink(sizes: list[RectSize], params: ShrinkParams) -> list[RectSize]:
    """Scale every side by (1 - s), rounding half up, never below 1 px.

    Computed in exact rational arithmetic so results do not depend on float
    rounding of s.
    """
    factor = 1 - Fraction(params.s).limit_denominator(10**6)
    half = Fraction(1, 2)

    def side(v: int) -> int:
        return max(1, math.floor(factor * v + half))

    return [RectSize(side(r.w), side(r.h)) for r in sizes]


def height_limit(
    shrinked: list[RectSize],
    original: list[RectSize],
    params: OrientationParams,
) -> int:
    """Hard scene-height cap.

    The cap is the larger of the tallest original object and
    theta * (sum of shrunk heights) / ceil(sqrt(n)), rounded up. The fraction
    estimates the height of a square arrangement; theta trades it toward
    landscape (>1) or portrait (<1) scenes.
    """
    if not shrinked or not original:
        raise ValueError("height_limit needs at least one rectangle")
    if len(shrinked) != len(original):
        raise ValueError("shrinked and original lists must have the same length")
    n = len(shrinked)
    cols = math.isqrt(n - 1) + 1  # ceil(sqrt(n)) exactly
    theta = Fraction(params.theta).limit_denominator(10**6)
    target = math.ceil(theta * sum(r.h for r in shrinked) / cols)
    return max(max(r.h for r in original), target)


class _FreeRect:
    """Mutable free-space rectangle used only inside the packer."""

    __slots__ = ("x", "y", "w", "h")

    def __init__(self, x: int, y: int, w: int, h: int):
        self.x = x
        self.y = y
        self.w = w
        self.h = h

    @property
    def right(self) -> int:
        return self.x + self.w

    @property
    def bottom(self) -> int:
        return self.y + self.h

    def contains(self, other: "_FreeRect") -> bool:
        return (
            other.x >= self.x
            and other.y >= self.y
            and other.right <= self.right
            and other.bottom <= self.bottom
        )


def _split_free(free: _FreeRect, used: PlacedRect) -> list[_FreeRect] | None:
    """Split one free rect around a placed rect.

    Returns None when the two do not overlap (the free rect survives intact),
    otherwise the up-to-four maximal leftovers.
    """
    if (
        used.x >= free.right
        or used.right <= free.x
        or used.y >= free.bottom
        or used.bottom <= free.y
    ):
        return None
    parts: list[_FreeRect] = []
    if used.y > free.y:
        parts.append(_FreeRect(free.x, free.y, free.w, used.y - free.y))
    if used.bottom < free.bottom:
        parts.append(_FreeRect(free.x, used.bottom, free.w, free.bottom - used.bottom))
    if used.x > free.x:
        parts.append(_FreeRect(free.x, free.y, used.x - free.x, free.h))
    if used.right < free.right:
        parts.append(_FreeRect(used.right, free.y, free.right - used.right, free.h))
    return parts


def _prune(rects: list[_FreeRect]) -> list[_FreeRect]:
    """Drop free rects contained in another one, keeping list order stable."""
    kept: list[_FreeRect] = []
    for i, r in enumerate(rects):
        contained = False
        for j, other in enumerate(rects):
            if i == j:
                continue
            if other.contains(r) and not (j > i and r.contains(other)):
                contained = True
                break
        if not contained:
            kept.append(r)
    return kept


def _find_blsf(free: list[_FreeRect], size: RectSize) -> _FreeRect | None:
    """Best Long Side Fit: minimize the larger leftover side, then the smaller.

    Ties beyond that keep the earliest free rect in the list, which makes the
    packer fully deterministic.
    """
    best: _FreeRect | None = None
    best_score = (math.inf, math.inf)
    for fr in free:
        if fr.w < size.w or fr.h < size.h:
            continue
        leftover_w = fr.w - size.w
        leftover_h = fr.h - size.h
        score = (max(leftover_w, leftover_h), min(leftover_w, leftover_h))
        if score < best_score:
            best_score = score
            best = fr
    return best


def _initial_width(shrinked: list[RectSize]) -> int:
    """Width estimate of a square-ish arrangement, mirroring the height cap."""
    n = len(shrinked)
    cols = math.isqrt(n - 1) + 1
    return max(
        max(r.w for r in shrinked),
        math.ceil(Fraction(sum(r.w for r in shrinked), cols)),
    )


def pack(shrinked: list[RectSize], h_max: int) -> PackedLayout:
    """Pack rectangles, in input order, into a strip of height ``h_max``.

    The strip starts at the square-arrangement width estimate and grows to the
    right whenever a rectangle cannot be placed; grown space is merged exactly
    into the maximal free-rectangle list. Scene extents are taken from the
    placed rectangles, not the strip, so unused strip space never pads the
    scene. No rectangle is rotated.
    """
    if not shrinked:
        raise ValueError("cannot pack an empty rectangle list")
    too_tall = [i for i, r in enumerate(shrinked) if r.h > h_max]
    if too_tall:
        raise ValueError(
            f"rectangle {too_tall[0]} is taller ({shrinked[too_tall[0]].h}) "
            f"than the height limit {h_max}"
        )

    width = _initial_width(shrinked)
    free: list[_FreeRect] = [_FreeRect(0, 0, width, h_max)]
    placements: list[Placement] = []

    for index, size in enumerate(shrinked):
        slot = _find_blsf(free, size)
        while slot is None:
            grow = max(size.w, -(-width // 10))
            for fr in free:
                if fr.right == width:
                    fr.w += grow
            free.append(_FreeRect(width, 0, grow, h_max))
            free = _prune(free)
            width += grow
            slot = _find_blsf(free, size)

        used = PlacedRect(slot.x, slot.y, size.w, size.h)
        survivors: list[_FreeRect] = []
        spawned: list[_FreeRect] = []
        for fr in free:
            parts = _split_free(fr, used)
            if parts is None:
                survivors.append(fr)
            else:
                spawned.extend(parts)
        free = _prune(survivors + spawned)
        placements.append(Placement(index=index, shrinked=used))

    scene_w = max(p.shrinked.right for p in placements)
    scene_h = max(p.shrinked.bottom for p in placements)
    return PackedLayout(scene_w, scene_h, tuple(placements))


def realize(layout: PackedLayout, original: list[RectSize]) -> PackedLayout:
    """Center each real-size rectangle on its packed slot.

    Relative geometry between objects is preserved exactly (this is what makes
    the overlap controlled by the shrinkage ratio); the scene rectangle is
    enlarged to the bounding box of all slots and real rects, and everything is
    shifted so the scene origin stays at (0, 0). With s=0 the layout is
    returned unchanged. The realized scene may therefore exceed the packing
    height cap when s > 0.
    """
    if len(original) != len(layout.placements):
        raise ValueError("need exactly one original size per placement")

    reals: list[PlacedRect] = []
    for placement, size in zip(layout.placements, original):
        s = placement.shrinked
        reals.append(
            PlacedRect(
                s.x + (s.w - size.w) // 2,
                s.y + (s.h - size.h) // 2,
                size.w,
                size.h,
            )
        )

    min_x = min(0, min(r.x for r in reals))
    min_y = min(0, min(r.y for r in reals))
    scene_w = max(layout.scene_w, max(r.right for r in reals)) - min_x
    scene_h = max(layout.scene_h, max(r.bottom for r in reals)) - min_y

    placements = tuple(
        Placement(
            index=p.index,
            shrinked=PlacedRect(p.shrinked.x - min_x, p.shrinked.y - min_y, p.shrinked.w, p.shrinked.h),
            real=PlacedRect(r.x - min_x, r.y - min_y, r.w, r.h),
        )
        for p, r in zip(layout.placements, reals)
    )
    return PackedLayout(scene_w, scene_h, placements)

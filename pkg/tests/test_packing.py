import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sceneforge.packing import (
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


def assert_disjoint_and_in_bounds(layout: PackedLayout, h_max: int | None = None):
    """Brute-force pairwise overlap and bounds check for shrunk placements."""
    rects = [p.shrinked for p in layout.placements]
    for r in rects:
        assert r.x >= 0 and r.y >= 0
        assert r.right <= layout.scene_w
        assert r.bottom <= layout.scene_h
    if h_max is not None:
        assert layout.scene_h <= h_max
    for i in range(len(rects)):
        for j in range(i + 1, len(rects)):
            assert rects[i].overlap_area(rects[j]) == 0, (i, j)


# shrink: direct evaluation oracles

def test_shrink_examples():
    assert shrink([RectSize(100, 100)], ShrinkParams(0.1)) == [RectSize(90, 90)]
    assert shrink([RectSize(200, 140)], ShrinkParams(0.0)) == [RectSize(200, 140)]
    assert shrink([RectSize(200, 200)], ShrinkParams(0.3)) == [RectSize(140, 140)]


def test_shrink_rounds_half_up_and_clamps():
    # 0.85 * 10 = 8.5 -> 9; 0.9 * 1 = 0.9 -> 1 (clamp)
    assert shrink([RectSize(10, 1)], ShrinkParams(0.15)) == [RectSize(9, 1)]
    assert shrink([RectSize(1, 1)], ShrinkParams(0.9)) == [RectSize(1, 1)]


def test_shrink_rejects_bad_ratio():
    with pytest.raises(ValueError):
        ShrinkParams(1.0)
    with pytest.raises(ValueError):
        ShrinkParams(-0.1)


@given(
    st.lists(
        st.tuples(st.integers(1, 2048), st.integers(1, 2048)), min_size=1, max_size=20
    ),
    st.floats(0, 0.99),
)
def test_shrink_never_grows_never_zero(dims, s):
    sizes = [RectSize(w, h) for w, h in dims]
    out = shrink(sizes, ShrinkParams(s))
    for before, after in zip(sizes, out):
        assert 1 <= after.w <= before.w
        assert 1 <= after.h <= before.h


# height_limit: direct evaluation oracles

def test_height_limit_examples():
    sizes = [RectSize(10, h) for h in (100, 50, 80, 70)]
    assert height_limit(sizes, sizes, OrientationParams(1.0)) == 150

    single = [RectSize(10, 200)]
    assert height_limit(single, single, OrientationParams(1.0)) == 200

    four = [RectSize(10, 100)] * 4
    assert height_limit(four, four, OrientationParams(1.2)) == 240


def test_height_limit_uses_original_for_max_term():
    original = [RectSize(10, 300), RectSize(10, 10)]
    shrunk = shrink(original, ShrinkParams(0.5))
    assert height_limit(shrunk, original, OrientationParams(1.0)) == 300


def test_height_limit_rejects_empty_and_mismatch():
    with pytest.raises(ValueError):
        height_limit([], [], OrientationParams(1.0))
    with pytest.raises(ValueError):
        height_limit([RectSize(1, 1)], [RectSize(1, 1)] * 2, OrientationParams(1.0))


# pack

def test_pack_four_squares_zero_waste():
    layout = pack([RectSize(50, 50)] * 4, h_max=100)
    assert (layout.scene_w, layout.scene_h) == (100, 100)
    assert_disjoint_and_in_bounds(layout, h_max=100)
    waste = layout.scene_w * layout.scene_h - 4 * 50 * 50
    assert waste == 0


def test_pack_single_rect():
    layout = pack([RectSize(30, 80)], h_max=80)
    assert (layout.scene_w, layout.scene_h) == (30, 80)
    assert layout.placements[0].shrinked == PlacedRect(0, 0, 30, 80)


def test_pack_preserves_input_order():
    layout = pack([RectSize(10, 10), RectSize(20, 20), RectSize(5, 5)], h_max=40)
    assert [p.index for p in layout.placements] == [0, 1, 2]
    assert [p.shrinked.w for p in layout.placements] == [10, 20, 5]


def test_pack_rejects_too_tall():
    with pytest.raises(ValueError, match="taller"):
        pack([RectSize(10, 90)], h_max=80)
    with pytest.raises(ValueError):
        pack([], h_max=80)


def test_pack_deterministic():
    rng = np.random.default_rng(5)
    sizes = [RectSize(int(w), int(h)) for w, h in rng.integers(16, 512, (12, 2))]
    h_max = height_limit(sizes, sizes, OrientationParams(1.0))
    a = pack(sizes, h_max)
    b = pack(sizes, h_max)
    assert a == b


def test_pack_grows_width_when_strip_is_tight():
    # Tall thin rects cannot stack: the strip must grow sideways.
    sizes = [RectSize(10, 100)] * 5
    layout = pack(sizes, h_max=100)
    assert layout.scene_w == 50 and layout.scene_h == 100
    assert_disjoint_and_in_bounds(layout, h_max=100)


@settings(max_examples=150, deadline=None)
@given(
    st.lists(
        st.tuples(st.integers(16, 512), st.integers(16, 512)), min_size=1, max_size=12
    )
)
def test_pack_property_disjoint_in_bounds(dims):
    sizes = [RectSize(w, h) for w, h in dims]
    h_max = height_limit(sizes, sizes, OrientationParams(1.0))
    layout = pack(sizes, h_max)
    assert_disjoint_and_in_bounds(layout, h_max=h_max)


# realize

def test_realize_identity_at_s0():
    sizes = [RectSize(40, 30), RectSize(25, 60), RectSize(70, 10)]
    h_max = height_limit(sizes, sizes, OrientationParams(1.0))
    layout = pack(sizes, h_max)
    realized = realize(layout, sizes)
    assert (realized.scene_w, realized.scene_h) == (layout.scene_w, layout.scene_h)
    for p in realized.placements:
        assert p.real == p.shrinked


def test_realize_two_squares_overlap_strip():
    # Two 100x100 squares at s=0.2 pack side by side as 80x80 slots; the
    # centered real squares overlap in a 20 px wide strip.
    original = [RectSize(100, 100)] * 2
    shrunk = shrink(original, ShrinkParams(0.2))
    layout = pack(shrunk, h_max=80)
    assert [p.shrinked.x for p in layout.placements] == [0, 80]
    realized = realize(layout, original)
    a, b = (p.real for p in realized.placements)
    overlap_w = min(a.right, b.right) - max(a.x, b.x)
    assert overlap_w == 20
    assert a.overlap_area(b) == 20 * 100


def test_realize_keeps_everything_in_bounds():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n = int(rng.integers(1, 10))
        original = [
            RectSize(int(w), int(h)) for w, h in rng.integers(16, 256, (n, 2))
        ]
        s = float(rng.uniform(0, 0.5))
        shrunk = shrink(original, ShrinkParams(s))
        h_max = height_limit(shrunk, original, OrientationParams(1.2))
        realized = realize(pack(shrunk, h_max), original)
        for p in realized.placements:
            assert p.real.x >= 0 and p.real.y >= 0
            assert p.real.right <= realized.scene_w
            assert p.real.bottom <= realized.scene_h
            assert p.shrinked.x >= 0 and p.shrinked.y >= 0
            assert p.shrinked.right <= realized.scene_w
            assert p.shrinked.bottom <= realized.scene_h


def test_realize_zero_overlap_at_s0_fuzz():
    rng = np.random.default_rng(12)
    for _ in range(50):
        n = int(rng.integers(2, 12))
        sizes = [RectSize(int(w), int(h)) for w, h in rng.integers(16, 256, (n, 2))]
        h_max = height_limit(sizes, sizes, OrientationParams(1.0))
        realized = realize(pack(sizes, h_max), sizes)
        reals = [p.real for p in realized.placements]
        for i in range(len(reals)):
            for j in range(i + 1, len(reals)):
                assert reals[i].overlap_area(reals[j]) == 0


def test_realize_overlap_monotone_in_s_for_equal_squares():
    # The maximum-overlap setting: a grid of equal squares. Total pairwise
    # real overlap must not decrease as the shrinkage ratio grows.
    original = [RectSize(100, 100)] * 9
    totals = []
    for s in (0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3):
        shrunk = shrink(original, ShrinkParams(s))
        h_max = height_limit(shrunk, original, OrientationParams(1.0))
        realized = realize(pack(shrunk, h_max), original)
        reals = [p.real for p in realized.placements]
        total = sum(
            reals[i].overlap_area(reals[j])
            for i in range(len(reals))
            for j in range(i + 1, len(reals))
        )
        totals.append(total)
    assert totals[0] == 0
    assert all(a <= b for a, b in zip(totals, totals[1:]))


def test_realize_requires_matching_lengths():
    layout = pack([RectSize(10, 10)], h_max=20)
    with pytest.raises(ValueError):
        realize(layout, [RectSize(10, 10), RectSize(5, 5)])

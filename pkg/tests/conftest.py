"""Shared corpus builders: tiny on-disk datasets for generation tests."""
from pathlib import Path

import cv2
import numpy as np
import pytest

from sceneforge.core import MaskKind

PART_PALETTE = [
    (200, 40, 40),
    (40, 200, 40),
    (40, 40, 200),
    (200, 200, 40),
    (40, 200, 200),
]


def _write_rgb(path: Path, image: np.ndarray) -> None:
    cv2.imwrite(str(path), image[:, :, ::-1])


def make_object(rng: np.random.Generator, size_lo: int, size_hi: int, kind: MaskKind, parts: int):
    """One blob object: an ellipse with optional part/semantic bands."""
    h = int(rng.integers(size_lo, size_hi + 1))
    w = int(rng.integers(size_lo, size_hi + 1))
    image = np.zeros((h, w, 3), np.uint8)
    mask = np.zeros((h, w, 3), np.uint8)
    yy, xx = np.mgrid[0:h, 0:w]
    inside = ((yy - h / 2) / (h / 2)) ** 2 + ((xx - w / 2) / (w / 2)) ** 2 <= 1.0
    color = tuple(int(c) for c in rng.integers(40, 255, 3))
    image[inside] = color
    if kind is MaskKind.SINGLE:
        mask[inside] = 255
    else:
        bands = np.array_split(np.arange(w), parts)
        for band, part_color in zip(bands, PART_PALETTE):
            sel = inside & np.isin(xx, band)
            mask[sel] = part_color
    if not mask.any():  # degenerate tiny ellipse; paint one pixel
        mask[h // 2, w // 2] = 255
        image[h // 2, w // 2] = color
    return image, mask


def build_corpus(
    root: Path,
    kind: MaskKind = MaskKind.SINGLE,
    classes: tuple[str, ...] = ("arab", "tabacum"),
    samples_per_class: int = 3,
    size_lo: int = 24,
    size_hi: int = 64,
    parts: int = 3,
    seed: int = 1234,
) -> Path:
    rng = np.random.default_rng(seed)
    for label in classes:
        (root / label / "images").mkdir(parents=True, exist_ok=True)
        (root / label / "masks").mkdir(parents=True, exist_ok=True)
        for i in range(samples_per_class):
            image, mask = make_object(rng, size_lo, size_hi, kind, parts)
            _write_rgb(root / label / "images" / f"{label}_{i:02d}.png", image)
            _write_rgb(root / label / "masks" / f"{label}_{i:02d}.png", mask)
    return root


def build_backgrounds(root: Path, count: int = 2, size: int = 900, seed: int = 77) -> Path:
    rng = np.random.default_rng(seed)
    root.mkdir(parents=True, exist_ok=True)
    for i in range(count):
        bg = rng.integers(0, 256, (size, size, 3), dtype=np.uint8)
        _write_rgb(root / f"bg_{i}.png", bg)
    return root


@pytest.fixture
def single_corpus(tmp_path):
    return build_corpus(tmp_path / "inputs", kind=MaskKind.SINGLE)


@pytest.fixture
def multipart_corpus(tmp_path):
    return build_corpus(tmp_path / "inputs_mp", kind=MaskKind.MULTI_PART)


@pytest.fixture
def semantic_corpus(tmp_path):
    return build_corpus(tmp_path / "inputs_sema", kind=MaskKind.SEMANTIC)


@pytest.fixture
def backgrounds(tmp_path):
    return build_backgrounds(tmp_path / "backgrounds")

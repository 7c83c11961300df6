"""Per-object geometric transforms and scene-level photometric noise.

Geometric transforms (flip, rotation, perspective) are applied identically to
the image and its mask; the image is resampled bilinearly and the mask
nearest-neighbor so mask colors are never invented. Photometric operations
(salt, pepper, Gaussian noise, smoothing) touch the composed scene image only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields

import cv2
import numpy as np

from .core import ConfigError, ObjectSample


@dataclass(frozen=True)
class TransformConfig:
    """Per-object and per-scene transform parameters.

    Defaults leave every operation disabled except horizontal flipping (p=0.5)
    and full-range rotation.
    """

    shrinkage: float = 0.0  # [0, 1): rectangle shrink ratio before packing
    rotation_max: float = 180.0  # [0, 180] degrees, angle drawn in [-max, +max]
    flip_prob: float = 0.5  # [0, 1] probability of a horizontal flip
    salt: float = 0.0  # [0, 1] per-pixel probability of turning white
    pepper: float = 0.0  # [0, 1] per-pixel probability of turning black
    smooth: int = 1  # odd Gaussian kernel size; 1 = no smoothing
    perspective: float = 0.0  # [0, 3] share of width added before the warp
    noise_var: float = 0.0  # >= 0, variance of additive Gaussian noise

    def __post_init__(self) -> None:
        if not 0.0 <= self.shrinkage < 1.0:
            raise ConfigError(f"shrinkage must be in [0, 1), got {self.shrinkage}")
        if not 0.0 <= self.rotation_max <= 180.0:
            raise ConfigError(f"rotation must be in [0, 180], got {self.rotation_max}")
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ConfigError(f"flip-prob must be in [0, 1], got {self.flip_prob}")
        if not 0.0 <= self.salt <= 1.0:
            raise ConfigError(f"salt must be in [0, 1], got {self.salt}")
        if not 0.0 <= self.pepper <= 1.0:
            raise ConfigError(f"pepper must be in [0, 1], got {self.pepper}")
        if self.salt + self.pepper > 1.0:
            raise ConfigError(
                f"salt + pepper must not exceed 1, got {self.salt + self.pepper}"
            )
        if self.smooth < 1 or self.smooth % 2 == 0:
            raise ConfigError(f"smooth must be an odd kernel size (1, 3, ...), got {self.smooth}")
        if not 0.0 <= self.perspective <= 3.0:
            raise ConfigError(f"perspective must be in [0, 3], got {self.perspective}")
        if self.noise_var < 0.0:
            raise ConfigError(f"noise must be >= 0, got {self.noise_var}")

    def replace(self, **changes) -> "TransformConfig":
        current = {f.name: getattr(self, f.name) for f in fields(self)}
        current.update(changes)
        return TransformConfig(**current)


def crop_margins(sample: ObjectSample) -> ObjectSample:
    """Crop image and mask to the tight bounding box of the mask foreground."""
    fg = sample.foreground
    rows = np.flatnonzero(fg.any(axis=1))
    cols = np.flatnonzero(fg.any(axis=0))
    y0, y1 = int(rows[0]), int(rows[-1]) + 1
    x0, x1 = int(cols[0]), int(cols[-1]) + 1
    if (y0, y1, x0, x1) == (0, sample.height, 0, sample.width):
        return sample
    return ObjectSample(
        image=np.ascontiguousarray(sample.image[y0:y1, x0:x1]),
        mask=np.ascontiguousarray(sample.mask[y0:y1, x0:x1]),
        class_label=sample.class_label,
        input_kind=sample.input_kind,
    )


def _rotate_pair(image: np.ndarray, mask: np.ndarray, angle: float):
    """Rotate both rasters by ``angle`` degrees CCW, expanding the canvas.

    Right-angle multiples take an exact array-rotation path so no resampling
    artifacts appear at 90/180/270 degrees.
    """
    if angle % 90.0 == 0.0:
        k = int(angle / 90.0) % 4
        if k == 0:
            return image, mask
        return np.ascontiguousarray(np.rot90(image, k)), np.ascontiguousarray(
            np.rot90(mask, k)
        )

    h, w = image.shape[:2]
    matrix = cv2.getRotationMatrix2D((w / 2.0, h / 2.0), angle, 1.0)
    cos = abs(matrix[0, 0])
    sin = abs(matrix[0, 1])
    new_w = int(round(w * cos + h * sin))
    new_h = int(round(w * sin + h * cos))
    matrix[0, 2] += (new_w - w) / 2.0
    matrix[1, 2] += (new_h - h) / 2.0
    image_out = cv2.warpAffine(
        image, matrix, (new_w, new_h), flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0),
    )
    mask_out = cv2.warpAffine(
        mask, matrix, (new_w, new_h), flags=cv2.INTER_NEAREST,
        borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0),
    )
    return image_out, mask_out


def _perspective_pair(image: np.ndarray, mask: np.ndarray, share: float, frac: float):
    """Keystone warp: widen the canvas by ``share`` of the object width, then
    pull the top corners inward by ``frac`` of each side's padding."""
    h, w = image.shape[:2]
    added = int(round(share * w))
    if added <= 0:
        return image, mask
    pad_left = added // 2
    pad_right = added - pad_left
    image = cv2.copyMakeBorder(
        image, 0, 0, pad_left, pad_right, cv2.BORDER_CONSTANT, value=(0, 0, 0)
    )
    mask = cv2.copyMakeBorder(
        mask, 0, 0, pad_left, pad_right, cv2.BORDER_CONSTANT, value=(0, 0, 0)
    )
    wp = w + added
    shift_l = frac * pad_left
    shift_r = frac * pad_right
    src = np.float32([[0, 0], [wp, 0], [wp, h], [0, h]])
    dst = np.float32([[shift_l, 0], [wp - shift_r, 0], [wp, h], [0, h]])
    matrix = cv2.getPerspectiveTransform(src, dst)
    image_out = cv2.warpPerspective(
        image, matrix, (wp, h), flags=cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0),
    )
    mask_out = cv2.warpPerspective(
        mask, matrix, (wp, h), flags=cv2.INTER_NEAREST,
        borderMode=cv2.BORDER_CONSTANT, borderValue=(0, 0, 0),
    )
    return image_out, mask_out


def geometric(
    sample: ObjectSample, cfg: TransformConfig, rng: np.random.Generator
) -> ObjectSample:
    """Apply the paired random transforms: flip, rotation, perspective.

    Exactly three draws are consumed from ``rng`` (flip, angle, perspective
    fraction) regardless of configuration, so downstream draws stay aligned.
    The result is margin-cropped again; if a degenerate transform erased every
    mask pixel the sample is returned cropped but untransformed.
    """
    flip = rng.random() < cfg.flip_prob
    angle = float(rng.uniform(-cfg.rotation_max, cfg.rotation_max))
    persp_frac = float(rng.random())

    image, mask = sample.image, sample.mask
    if flip:
        image = image[:, ::-1]
        mask = mask[:, ::-1]
    if angle != 0.0:
        image, mask = _rotate_pair(np.ascontiguousarray(image), np.ascontiguousarray(mask), angle)
    if cfg.perspective > 0.0:
        image, mask = _perspective_pair(
            np.ascontiguousarray(image), np.ascontiguousarray(mask), cfg.perspective, persp_frac
        )

    if not mask.any():  # pathological 1-px objects can vanish under warps
        return crop_margins(sample)
    out = ObjectSample(
        image=np.ascontiguousarray(image),
        mask=np.ascontiguousarray(mask),
        class_label=sample.class_label,
        input_kind=sample.input_kind,
    )
    return crop_margins(out)


def photometric(
    scene_image: np.ndarray, cfg: TransformConfig, rng: np.random.Generator
) -> np.ndarray:
    """Salt/pepper, additive Gaussian noise, then Gaussian smoothing.

    Salt and pepper share a single uniform draw per pixel partitioned as
    [0, salt) -> white and [salt, salt+pepper) -> black, which is well defined
    whenever salt + pepper <= 1. Noise variance is in 8-bit intensity units.
    With default parameters the input is returned unchanged.
    """
    if cfg.salt + cfg.pepper > 1.0:
        raise ConfigError(
            f"salt + pepper must not exceed 1, got {cfg.salt + cfg.pepper}"
        )
    out = scene_image
    if cfg.salt > 0.0 or cfg.pepper > 0.0:
        u = rng.random(out.shape[:2])
        out = out.copy()
        out[u < cfg.salt] = 255
        out[(u >= cfg.salt) & (u < cfg.salt + cfg.pepper)] = 0
    if cfg.noise_var > 0.0:
        noise = rng.normal(0.0, math.sqrt(cfg.noise_var), out.shape)
        out = np.clip(out.astype(np.float64) + noise, 0, 255).round().astype(np.uint8)
    if cfg.smooth > 1:
        out = cv2.GaussianBlur(out, (cfg.smooth, cfg.smooth), 0)
    return out

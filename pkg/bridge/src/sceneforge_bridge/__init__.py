"""Feed sceneforge scenes straight into a training loop.

``open_stream`` validates a plain config mapping (same keys, ranges and error
messages as the command-line interface), and the resulting handle yields
scene bundles as plain numpy arrays: no files are written, nothing is loaded
until the first pull, and transform parameters can be changed between pulls.

    handle = open_stream({"input_dir": "data/", "seed": 7})
    for bundle in handle:
        train_step(bundle["image"], bundle["masks"]["S"])
"""
from __future__ import annotations

import inspect
from typing import Any, Iterator, Mapping

from sceneforge import ConfigError, SceneBundle
from sceneforge.cli import build_config
from sceneforge.datagen import SceneStream, stream

__all__ = [
    "StreamClosed",
    "StreamExhausted",
    "StreamHandle",
    "close",
    "next_bundle",
    "open_stream",
    "update_params",
]

__version__ = "0.1.0"


class StreamExhausted(Exception):
    """A bounded stream has yielded all of its scenes."""


class StreamClosed(Exception):
    """The handle was closed; no further pulls are possible."""


_CONFIG_KEYS = frozenset(
    name
    for name in inspect.signature(build_config).parameters
    if name not in ("output_dir", "jobs")
)

# bridge/CLI parameter name -> transform-config field name
_UPDATE_ALIASES = {"rotation": "rotation_max", "noise": "noise_var"}


def _bundle_mapping(bundle: SceneBundle) -> dict[str, Any]:
    return {
        "image": bundle.image,
        "masks": {kind.code: mask for kind, mask in bundle.masks.items()},
        "boxes": None if bundle.boxes is None else [b.as_list() for b in bundle.boxes],
        "counts": dict(bundle.counts),
    }


class StreamHandle:
    """Single-consumer handle over a lazy scene stream."""

    def __init__(self, scene_stream: SceneStream):
        self._stream: SceneStream | None = scene_stream

    @property
    def closed(self) -> bool:
        return self._stream is None

    @property
    def config_digest(self) -> str:
        return self._require_open().config.digest()

    @property
    def next_scene_index(self) -> int:
        return self._require_open().next_index

    def _require_open(self) -> SceneStream:
        if self._stream is None:
            raise StreamClosed("stream handle is closed")
        return self._stream

    def __iter__(self) -> Iterator[dict[str, Any]]:
        return self

    def __next__(self) -> dict[str, Any]:
        try:
            return next_bundle(self)
        except StreamExhausted:
            raise StopIteration from None

    def __enter__(self) -> "StreamHandle":
        return self

    def __exit__(self, *exc) -> None:
        close(self)


def open_stream(config: Mapping[str, Any]) -> StreamHandle:
    """Validate a config mapping and return a lazy stream handle.

    Keys mirror the CLI parameters (``input_dir``, ``seed``, ``shrinkage``,
    ``rotation``, ``noise``, ...); ranges and error messages are identical.
    ``num_scenes`` defaults to None, i.e. an unbounded stream. No input file
    is touched until the first bundle is pulled.
    """
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(
            f"unknown config keys {sorted(unknown)}; "
            f"expected a subset of {sorted(_CONFIG_KEYS)}"
        )
    if "input_dir" not in config:
        raise ConfigError("config requires input_dir")
    merged: dict[str, Any] = {"num_scenes": None}
    merged.update(config)
    cfg = build_config(**merged)
    return StreamHandle(stream(cfg))


def next_bundle(handle: StreamHandle) -> dict[str, Any]:
    """Pull the next scene as a mapping of row-major uint8 arrays.

    The arrays are the stream's own buffers (no copy); treat them as
    read-only or copy before mutating.
    """
    scene_stream = handle._require_open()
    try:
        bundle = next(scene_stream)
    except StopIteration:
        raise StreamExhausted(
            f"stream ended after {scene_stream.next_index} scenes"
        ) from None
    return _bundle_mapping(bundle)


def update_params(handle: StreamHandle, changes: Mapping[str, Any]) -> dict[str, Any]:
    """Adjust transform parameters; takes effect at the next scene boundary.

    Only transform-level keys (and ``theta``) are updatable; attempts to
    change the seed, paths or sampling rules raise without disturbing the
    stream. Returns the applied changes and the first scene index they
    affect.
    """
    scene_stream = handle._require_open()
    translated = {_UPDATE_ALIASES.get(key, key): value for key, value in changes.items()}
    scene_stream.update(**translated)
    return {"applied": dict(changes), "effective_from_scene": scene_stream.next_index}


def close(handle: StreamHandle) -> None:
    """Release the handle; further pulls raise StreamClosed. Idempotent."""
    handle._stream = None

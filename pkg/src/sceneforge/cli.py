"""Command-line front end: offline generation, preview, bench, memory estimate.

Exit codes: 0 on success, 1 on configuration errors (out-of-range parameter),
2 on I/O errors (unreadable inputs, unwritable outputs). Set SCENEFORGE_LOG to
DEBUG/INFO/WARNING to control log verbosity.
"""
from __future__ import annotations

import logging
import os
import sys
import tempfile
from pathlib import Path

import click
import cv2
import numpy as np

from .core import ConfigError, MaskKind
from .datagen import (
    CatalogError,
    GeneratorConfig,
    MemoryModelParams,
    benchmark,
    estimate_memory,
    generate_offline,
    stream,
)
from .transform import TransformConfig

logger = logging.getLogger(__name__)


def _parse_outputs(text: str) -> frozenset[MaskKind]:
    return frozenset(MaskKind.parse(part) for part in text.split(",") if part.strip())


def transform_options(command):
    decorators = [
        click.option("--shrinkage", type=float, default=0.0, show_default=True,
                     help="Object shrink ratio before packing, range [0, 1)."),
        click.option("--rotation", type=float, default=180.0, show_default=True,
                     help="Max rotation angle in degrees, range [0, 180]."),
        click.option("--flip-prob", type=float, default=0.5, show_default=True,
                     help="Horizontal flip probability, range [0, 1]."),
        click.option("--salt", type=float, default=0.0, show_default=True,
                     help="Per-pixel white-noise probability, range [0, 1]."),
        click.option("--pepper", type=float, default=0.0, show_default=True,
                     help="Per-pixel black-noise probability, range [0, 1]."),
        click.option("--smooth", type=int, default=1, show_default=True,
                     help="Gaussian smoothing kernel size, odd (1, 3, 5, ...)."),
        click.option("--perspective", type=float, default=0.0, show_default=True,
                     help="Share of width added before the keystone warp, range [0, 3]."),
        click.option("--noise", type=float, default=0.0, show_default=True,
                     help="Variance of additive Gaussian noise, >= 0."),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


def generator_options(command):
    decorators = [
        click.option("--input", "input_dir", required=True, type=click.Path(path_type=Path),
                     help="Input directory: <class>/images + <class>/masks pairs."),
        click.option("--backgrounds", "background_dir", type=click.Path(path_type=Path),
                     default=None, help="Directory of background images (optional)."),
        click.option("--input-kind", default="S", show_default=True,
                     help="Input mask kind: S, MP or Sema."),
        click.option("--n-per-scene", type=int, default=9, show_default=True,
                     help="Objects per scene, >= 1."),
        click.option("--outputs", default="S", show_default=True,
                     help="Comma-separated mask kinds to derive (S,MO,MP,Sema,C)."),
        click.option("--boxes/--no-boxes", default=True, show_default=True,
                     help="Compute bounding boxes."),
        click.option("--theta", type=float, default=1.2, show_default=True,
                     help="Target scene width-to-height ratio, > 0."),
        click.option("--same-class", is_flag=True, default=False,
                     help="Pick all objects of a scene from one class."),
        click.option("--balance", is_flag=True, default=False,
                     help="Sample classes uniformly instead of samples."),
        click.option("--seed", type=int, default=0, show_default=True,
                     help="Seed fixing the whole generated stream."),
    ]
    for decorator in reversed(decorators):
        command = decorator(command)
    return command


def build_config(
    input_dir: Path,
    background_dir: Path | None = None,
    input_kind: str = "S",
    n_per_scene: int = 9,
    outputs: str = "S",
    boxes: bool = True,
    theta: float = 1.2,
    same_class: bool = False,
    balance: bool = False,
    seed: int = 0,
    shrinkage: float = 0.0,
    rotation: float = 180.0,
    flip_prob: float = 0.5,
    salt: float = 0.0,
    pepper: float = 0.0,
    smooth: int = 1,
    perspective: float = 0.0,
    noise: float = 0.0,
    output_dir: Path | None = None,
    num_scenes: int | None = None,
    jobs: int = 1,
) -> GeneratorConfig:
    """Build a GeneratorConfig from flag-style values; defaults match the CLI."""
    transform = TransformConfig(
        shrinkage=shrinkage,
        rotation_max=rotation,
        flip_prob=flip_prob,
        salt=salt,
        pepper=pepper,
        smooth=smooth,
        perspective=perspective,
        noise_var=noise,
    )
    return GeneratorConfig(
        input_dir=input_dir,
        output_dir=output_dir,
        background_dir=background_dir,
        input_kind=MaskKind.parse(input_kind),
        n_per_scene=n_per_scene,
        num_scenes=num_scenes,
        same_class_scene=same_class,
        balance_classes=balance,
        outputs=_parse_outputs(outputs),
        emit_boxes=boxes,
        transform=transform,
        theta=theta,
        seed=seed,
        jobs=jobs,
    )


@click.group()
def cli() -> None:
    """Compose synthetic training scenes from image/mask pairs."""


@cli.command()
@generator_options
@transform_options
@click.option("--out", "output_dir", required=True, type=click.Path(path_type=Path),
              help="Output dataset directory.")
@click.option("--num-scenes", type=int, default=250, show_default=True,
              help="Number of scenes to write, >= 1.")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes for scene generation.")
def generate(output_dir: Path, num_scenes: int, jobs: int, **kwargs) -> None:
    """Write scenes with masks and annotations to a dataset directory."""
    cfg = build_config(
        output_dir=output_dir, num_scenes=num_scenes, jobs=jobs, **kwargs
    )
    manifest = generate_offline(cfg)
    click.echo(f"wrote {manifest['num_scenes']} scenes to {output_dir}")


def _contact_sheet(panels: list[np.ndarray], height: int = 256) -> np.ndarray:
    resized = []
    for panel in panels:
        h, w = panel.shape[:2]
        resized.append(
            cv2.resize(panel, (max(1, round(w * height / h)), height),
                       interpolation=cv2.INTER_NEAREST)
        )
    gutter = np.full((height, 4, 3), 255, np.uint8)
    parts: list[np.ndarray] = []
    for i, panel in enumerate(resized):
        if i:
            parts.append(gutter)
        parts.append(panel)
    return np.hstack(parts)


@cli.command()
@generator_options
@transform_options
@click.option("--out", "output_dir", type=click.Path(path_type=Path), default=None,
              help="Where to put the preview (default: a fresh temp directory).")
def preview(output_dir: Path | None, **kwargs) -> None:
    """Compose one scene and write it with a side-by-side contact sheet."""
    cfg = build_config(num_scenes=1, **kwargs)
    bundle = next(iter(stream(cfg)))
    out = Path(output_dir) if output_dir else Path(tempfile.mkdtemp(prefix="sceneforge_"))
    out.mkdir(parents=True, exist_ok=True)
    cv2.imwrite(str(out / "image.png"), bundle.image[:, :, ::-1])
    panels = [bundle.image]
    for kind in sorted(bundle.masks, key=lambda k: k.code):
        cv2.imwrite(str(out / f"mask_{kind.code}.png"), bundle.masks[kind][:, :, ::-1])
        panels.append(bundle.masks[kind])
    sheet = _contact_sheet(panels)
    cv2.imwrite(str(out / "contact_sheet.png"), sheet[:, :, ::-1])
    click.echo(f"preview written to {out}")


@cli.command()
@click.option("--input", "input_dir", required=True, type=click.Path(path_type=Path))
@click.option("--backgrounds", "background_dir", type=click.Path(path_type=Path), default=None)
@click.option("--input-kind", default="MP", show_default=True,
              help="Augmentor variant to measure (S, MP or Sema).")
@click.option("--n-values", default="1,2,4,8,16", show_default=True,
              help="Comma-separated object counts per scene.")
@click.option("--scenes-per-cell", type=int, default=5, show_default=True,
              help="Scenes averaged per (n, feature-set) cell.")
@click.option("--seed", type=int, default=0, show_default=True)
def bench(input_dir: Path, background_dir: Path | None, input_kind: str,
          n_values: str, scenes_per_cell: int, seed: int) -> None:
    """Print a CSV of load/transform/save times per object count."""
    counts = tuple(int(v) for v in n_values.split(",") if v.strip())
    if not counts or any(v < 1 for v in counts):
        raise ConfigError(f"--n-values must be positive integers, got {n_values!r}")
    if scenes_per_cell < 1:
        raise ConfigError(f"--scenes-per-cell must be >= 1, got {scenes_per_cell}")
    cfg = GeneratorConfig(
        input_dir=input_dir,
        background_dir=background_dir,
        input_kind=MaskKind.parse(input_kind),
        seed=seed,
    )
    rows = benchmark(cfg, object_counts=counts, scenes_per_cell=scenes_per_cell)
    click.echo("n,variant,features,load_ms,transform_ms,save_ms")
    for row in rows:
        click.echo(
            f"{row.n},{row.variant},{row.features},"
            f"{row.load_ms:.3f},{row.transform_ms:.3f},{row.save_ms:.3f}"
        )


@cli.command("estimate-mem")
@click.option("--n", type=int, default=9, show_default=True, help="Objects per scene.")
@click.option("--masks", "m", type=int, default=1, show_default=True,
              help="Number of output mask kinds, <= 5.")
@click.option("--mean-h", type=float, default=385.0, show_default=True,
              help="Average object height in pixels.")
@click.option("--mean-w", type=float, default=390.0, show_default=True,
              help="Average object width in pixels.")
@click.option("--pack-overhead", type=float, default=1.1, show_default=True,
              help="Packaging overhead per object.")
@click.option("--aux-overhead", type=float, default=0.1, show_default=True,
              help="Auxiliary storage overhead per object.")
@click.option("--overhead-const", type=float, default=0.0, show_default=True,
              help="Constant system overhead in bytes.")
def estimate_mem(n: int, m: int, mean_h: float, mean_w: float,
                 pack_overhead: float, aux_overhead: float, overhead_const: float) -> None:
    """Print the estimated RAM per scene in bytes."""
    params = MemoryModelParams(
        n=n, mean_h=mean_h, mean_w=mean_w, m=m,
        pack_overhead=pack_overhead, aux_overhead=aux_overhead,
        const_overhead=overhead_const,
    )
    value = estimate_memory(params)
    click.echo(f"{value:g}")


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=os.environ.get("SCENEFORGE_LOG", "WARNING").upper())
    try:
        cli.main(args=argv, standalone_mode=False)
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1
    except (CatalogError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code
    except click.exceptions.Abort:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

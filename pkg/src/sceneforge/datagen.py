"""Dataset ingestion, sample selection and scene generation (offline/stream).

Input layout convention: ``input_dir/<class_label>/images/*.png`` paired with
``input_dir/<class_label>/masks/*.png`` by file stem; the class label is the
directory name. A ``catalog.json`` file at the input root overrides the
convention with explicit entries.

Scene k is generated from a child RNG seeded by (seed, k), so offline and
streaming generation produce identical scenes, scenes can be generated in any
order (worker pools), and a rerun is byte-identical.
"""
from __future__ import annotations

import hashlib
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import cv2
import numpy as np

from .composer import SceneBundle, compose
from .core import ConfigError, MaskKind, ObjectSample, allowed_outputs
from .packing import OrientationParams
from .transform import TransformConfig

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg", ".bmp")


class CatalogError(RuntimeError):
    """The input directory does not form a valid sample catalog."""


@dataclass(frozen=True)
class CatalogEntry:
    image_path: Path
    mask_path: Path
    class_label: str


@dataclass(frozen=True)
class Catalog:
    entries: tuple[CatalogEntry, ...]
    classes: tuple[str, ...]
    input_kind: MaskKind

    def by_class(self, label: str) -> list[int]:
        return [i for i, e in enumerate(self.entries) if e.class_label == label]


@dataclass(frozen=True)
class GeneratorConfig:
    """Everything that determines a generated dataset."""

    input_dir: Path
    output_dir: Path | None = None
    background_dir: Path | None = None
    input_kind: MaskKind = MaskKind.SINGLE
    n_per_scene: int = 9
    num_scenes: int | None = 250  # None = unbounded stream
    same_class_scene: bool = False
    balance_classes: bool = False
    outputs: frozenset[MaskKind] = frozenset({MaskKind.SINGLE})
    emit_boxes: bool = True
    transform: TransformConfig = field(default_factory=TransformConfig)
    theta: float = 1.2
    seed: int = 0
    jobs: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_dir", Path(self.input_dir))
        if self.output_dir is not None:
            object.__setattr__(self, "output_dir", Path(self.output_dir))
        if self.background_dir is not None:
            object.__setattr__(self, "background_dir", Path(self.background_dir))
        object.__setattr__(self, "outputs", frozenset(self.outputs))
        if self.n_per_scene < 1:
            raise ConfigError(f"n-per-scene must be >= 1, got {self.n_per_scene}")
        if self.num_scenes is not None and self.num_scenes < 1:
            raise ConfigError(f"num-scenes must be >= 1, got {self.num_scenes}")
        if self.theta <= 0:
            raise ConfigError(f"theta must be > 0, got {self.theta}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be >= 1, got {self.jobs}")
        if not -(2**63) <= self.seed < 2**64:
            raise ConfigError(f"seed must fit in 64 bits, got {self.seed}")
        try:
            legal = allowed_outputs(self.input_kind, has_class_labels=True)
        except TransitionError as exc:
            raise ConfigError(str(exc)) from exc
        illegal = self.outputs - legal
        if illegal:
            raise ConfigError(
                f"outputs {sorted(k.code for k in illegal)} cannot be derived from "
                f"{self.input_kind.code} input (allowed: {sorted(k.code for k in legal)})"
            )

    def to_jsonable(self) -> dict:
        data = asdict(self)
        data["input_dir"] = str(self.input_dir)
        data["output_dir"] = str(self.output_dir) if self.output_dir else None
        data["background_dir"] = (
            str(self.background_dir) if self.background_dir else None
        )
        data["input_kind"] = self.input_kind.code
        data["outputs"] = sorted(k.code for k in self.outputs)
        return data

    def digest(self) -> str:
        """Hash of every field that influences scene pixels and annotations.

        Paths, worker count and scene count are excluded, so generating the
        same corpus into a different location keeps the same digest.
        """
        data = self.to_jsonable()
        scene_fields = (
            "input_kind",
            "n_per_scene",
            "same_class_scene",
            "balance_classes",
            "outputs",
            "emit_boxes",
            "transform",
            "theta",
            "seed",
        )
        blob = json.dumps({k: data[k] for k in scene_fields}, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


@dataclass(frozen=True)
class MemoryModelParams:
    """Inputs of the per-scene RAM estimate."""

    n: int  # objects per scene
    mean_h: float  # average object height, pixels
    mean_w: float  # average object width, pixels
    m: int = 1  # number of output mask kinds
    pack_overhead: float = 1.1  # packaging overhead per object
    aux_overhead: float = 0.1  # auxiliary-storage overhead per object
    const_overhead: float = 0.0  # constant system overhead, bytes

    def __post_init__(self) -> None:
        if self.n < 0 or self.mean_h < 0 or self.mean_w < 0:
            raise ConfigError("memory model sizes must be non-negative")
        if not 0 <= self.m <= 5:
            raise ConfigError(f"mask count must be in [0, 5], got {self.m}")
        if self.pack_overhead < 0 or self.aux_overhead < 0 or self.const_overhead < 0:
            raise ConfigError("overhead terms must be non-negative")


def estimate_memory(params: MemoryModelParams) -> float:
    """Average RAM per scene in bytes.

    Three bytes per pixel for the scene and each derived mask (scaled by the
    packaging overhead), plus auxiliary per-object storage and two working
    copies, plus a constant term.
    """
    per_object = 3 * params.n * params.mean_h * params.mean_w
    return (
        per_object * ((1 + params.m) * params.pack_overhead + params.aux_overhead + 2)
        + params.const_overhead
    )


# -- catalog ------------------------------------------------------------------

def _imread_rgb(path: Path) -> np.ndarray:
    raw = cv2.imread(str(path), cv2.IMREAD_COLOR)
    if raw is None:
        raise CatalogError(f"cannot read image file: {path}")
    return np.ascontiguousarray(raw[:, :, ::-1])


def load_catalog(input_dir: Path, input_kind: MaskKind) -> Catalog:
    """Scan the input directory into a catalog, without decoding any image.

    Entries are sorted canonically (class label, then file stem) so that the
    directory listing order never influences generation.
    """
    input_dir = Path(input_dir)
    if not input_dir.is_dir():
        raise CatalogError(f"input directory does not exist: {input_dir}")

    manifest = input_dir / "catalog.json"
    entries: list[CatalogEntry] = []
    if manifest.is_file():
        spec = json.loads(manifest.read_text())
        for item in spec["samples"]:
            entries.append(
                CatalogEntry(
                    image_path=input_dir / item["image"],
                    mask_path=input_dir / item["mask"],
                    class_label=item["class"],
                )
            )
    else:
        for class_dir in sorted(p for p in input_dir.iterdir() if p.is_dir()):
            images_dir = class_dir / "images"
            masks_dir = class_dir / "masks"
            if not images_dir.is_dir() or not masks_dir.is_dir():
                continue
            for image_path in sorted(images_dir.iterdir()):
                if image_path.suffix.lower() not in IMAGE_EXTENSIONS:
                    continue
                mask_path = masks_dir / f"{image_path.stem}.png"
                if not mask_path.is_file():
                    raise CatalogError(
                        f"no mask found for {image_path} (expected {mask_path})"
                    )
                entries.append(
                    CatalogEntry(
                        image_path=image_path,
                        mask_path=mask_path,
                        class_label=class_dir.name,
                    )
                )

    if not entries:
        raise CatalogError(f"no image/mask pairs found under {input_dir}")
    entries.sort(key=lambda e: (e.class_label, e.image_path.stem, str(e.image_path)))
    classes = tuple(dict.fromkeys(e.class_label for e in entries))
    return Catalog(entries=tuple(entries), classes=classes, input_kind=input_kind)


def load_sample(entry: CatalogEntry, input_kind: MaskKind) -> ObjectSample:
    """Read one image/mask pair from disk and validate it."""
    image = _imread_rgb(entry.image_path)
    mask = _imread_rgb(entry.mask_path)
    if input_kind is MaskKind.SINGLE:
        fg = mask.any(axis=2)
        mask = np.zeros_like(mask)
        mask[fg] = 255
    try:
        return ObjectSample(
            image=image, mask=mask, class_label=entry.class_label, input_kind=input_kind
        )
    except ValueError as exc:
        raise CatalogError(
            f"invalid sample {entry.image_path} / {entry.mask_path}: {exc}"
        ) from exc


def list_backgrounds(background_dir: Path | None) -> list[Path]:
    if background_dir is None:
        return []
    background_dir = Path(background_dir)
    if not background_dir.is_dir():
        raise CatalogError(f"background directory does not exist: {background_dir}")
    paths = sorted(
        p
        for p in background_dir.iterdir()
        if p.suffix.lower() in IMAGE_EXTENSIONS
    )
    if not paths:
        raise CatalogError(f"no background images under {background_dir}")
    return paths


# -- selection ----------------------------------------------------------------

def select_samples(
    catalog: Catalog, cfg: GeneratorConfig, rng: np.random.Generator
) -> list[CatalogEntry]:
    """Draw ``n_per_scene`` entries with replacement.

    same_class_scene picks one class uniformly and draws inside it;
    balance_classes draws the class uniformly per draw, making class
    frequencies uniform regardless of catalog imbalance.
    """
    if not catalog.entries:
        raise CatalogError("catalog is empty")
    n = cfg.n_per_scene
    if cfg.same_class_scene:
        label = catalog.classes[int(rng.integers(0, len(catalog.classes)))]
        pool = catalog.by_class(label)
        picks = rng.integers(0, len(pool), n)
        return [catalog.entries[pool[int(i)]] for i in picks]
    if cfg.balance_classes:
        chosen: list[CatalogEntry] = []
        for _ in range(n):
            label = catalog.classes[int(rng.integers(0, len(catalog.classes)))]
            pool = catalog.by_class(label)
            chosen.append(catalog.entries[pool[int(rng.integers(0, len(pool)))]])
        return chosen
    picks = rng.integers(0, len(catalog.entries), n)
    return [catalog.entries[int(i)] for i in picks]


# -- scene generation ---------------------------------------------------------

def _scene_rng(seed: int, scene_index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed & (2**64 - 1), scene_index]))


def _build_scene(
    catalog: Catalog,
    backgrounds: list[Path],
    cfg: GeneratorConfig,
    scene_index: int,
) -> SceneBundle:
    rng = _scene_rng(cfg.seed, scene_index)
    entries = select_samples(catalog, cfg, rng)
    background = None
    if backgrounds:
        background = _imread_rgb(backgrounds[int(rng.integers(0, len(backgrounds)))])
    samples = [load_sample(e, cfg.input_kind) for e in entries]
    return compose(
        samples,
        cfg.transform,
        OrientationParams(cfg.theta),
        background,
        cfg.outputs,
        rng,
        with_boxes=cfg.emit_boxes,
    )


def _imwrite_rgb(path: Path, image: np.ndarray) -> None:
    if not cv2.imwrite(str(path), np.ascontiguousarray(image[:, :, ::-1])):
        raise OSError(f"failed to write {path}")


def scene_annotations(bundle: SceneBundle, digest: str) -> dict:
    objects = []
    for rec in bundle.registry:
        entry = {
            "id": rec.index,
            "class": rec.class_label,
            "mo_color": list(rec.mo_color.rgb8),
            "occluded": bool(rec.occluded),
        }
        if rec.bbox is not None:
            entry["bbox"] = rec.bbox.as_list()
        objects.append(entry)
    return {
        "scene": {"width": bundle.scene_w, "height": bundle.scene_h},
        "objects": objects,
        "counts": dict(bundle.counts),
        "config_digest": digest,
    }


def write_scene(bundle: SceneBundle, scene_dir: Path, digest: str) -> None:
    scene_dir.mkdir(parents=True, exist_ok=True)
    _imwrite_rgb(scene_dir / "image.png", bundle.image)
    for kind, mask in bundle.masks.items():
        _imwrite_rgb(scene_dir / f"mask_{kind.code}.png", mask)
    annotations = scene_annotations(bundle, digest)
    (scene_dir / "annotations.json").write_text(
        json.dumps(annotations, indent=2) + "\n"
    )


_WORKER: dict = {}


def _worker_init(cfg: GeneratorConfig) -> None:
    _WORKER["catalog"] = load_catalog(cfg.input_dir, cfg.input_kind)
    _WORKER["backgrounds"] = list_backgrounds(cfg.background_dir)
    _WORKER["cfg"] = cfg
    _WORKER["digest"] = cfg.digest()


def _worker_scene(scene_index: int) -> str:
    cfg = _WORKER["cfg"]
    bundle = _build_scene(
        _WORKER["catalog"], _WORKER["backgrounds"], cfg, scene_index
    )
    scene_name = f"scene_{scene_index:06d}"
    write_scene(bundle, cfg.output_dir / scene_name, _WORKER["digest"])
    return scene_name


def generate_offline(cfg: GeneratorConfig) -> dict:
    """Write ``num_scenes`` scene directories plus a manifest; return the manifest.

    With jobs > 1 scenes are distributed over a process pool; per-scene seeds
    make the output independent of scheduling.
    """
    if cfg.output_dir is None:
        raise ConfigError("offline generation requires an output directory")
    if cfg.num_scenes is None:
        raise ConfigError("offline generation requires a finite num-scenes")
    cfg.output_dir.mkdir(parents=True, exist_ok=True)
    digest = cfg.digest()

    indices = range(cfg.num_scenes)
    if cfg.jobs > 1:
        with ProcessPoolExecutor(
            max_workers=cfg.jobs, initializer=_worker_init, initargs=(cfg,)
        ) as pool:
            names = list(pool.map(_worker_scene, indices))
    else:
        _worker_init(cfg)
        names = []
        for k in indices:
            try:
                names.append(_worker_scene(k))
            except CatalogError:
                raise
            except OSError as exc:
                raise OSError(f"scene {k}: {exc}") from exc
        _WORKER.clear()

    manifest = {
        "seed": cfg.seed,
        "num_scenes": cfg.num_scenes,
        "config": cfg.to_jsonable(),
        "config_digest": digest,
        "scenes": names,
    }
    (cfg.output_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    logger.info("wrote %d scenes to %s", cfg.num_scenes, cfg.output_dir)
    return manifest


UPDATABLE_FIELDS = frozenset(
    {
        "shrinkage",
        "rotation_max",
        "flip_prob",
        "salt",
        "pepper",
        "smooth",
        "perspective",
        "noise_var",
        "theta",
    }
)


class SceneStream:
    """Lazy scene iterator; scene k always equals offline scene k.

    Nothing is read from disk until the first pull. Transform parameters and
    theta may be updated between pulls and take effect at the next scene
    boundary; seed, catalog and output selection are fixed for the stream's
    lifetime.
    """

    def __init__(self, cfg: GeneratorConfig):
        self._cfg = cfg
        self._next_index = 0
        self._catalog: Catalog | None = None
        self._backgrounds: list[Path] | None = None

    @property
    def config(self) -> GeneratorConfig:
        return self._cfg

    @property
    def next_index(self) -> int:
        return self._next_index

    def update(self, **changes) -> None:
        """Adjust transform-level parameters for all subsequent scenes."""
        rejected = set(changes) - UPDATABLE_FIELDS
        if rejected:
            raise ConfigError(
                f"fields {sorted(rejected)} cannot change mid-stream; "
                f"updatable fields: {sorted(UPDATABLE_FIELDS)}"
            )
        theta = changes.pop("theta", None)
        cfg = self._cfg
        if changes:
            cfg = replace(cfg, transform=cfg.transform.replace(**changes))
        if theta is not None:
            cfg = replace(cfg, theta=theta)
        self._cfg = cfg

    def _ensure_inputs(self) -> None:
        if self._catalog is None:
            self._catalog = load_catalog(self._cfg.input_dir, self._cfg.input_kind)
            self._backgrounds = list_backgrounds(self._cfg.background_dir)

    def __iter__(self) -> "SceneStream":
        return self

    def __next__(self) -> SceneBundle:
        cfg = self._cfg
        if cfg.num_scenes is not None and self._next_index >= cfg.num_scenes:
            raise StopIteration
        self._ensure_inputs()
        bundle = _build_scene(self._catalog, self._backgrounds, cfg, self._next_index)
        self._next_index += 1
        return bundle


def stream(cfg: GeneratorConfig) -> SceneStream:
    """Create a lazy scene stream for the given configuration."""
    return SceneStream(cfg)


# -- benchmark ----------------------------------------------------------------

FEATURE_SETS = ("SA", "NA", "NMA")


@dataclass(frozen=True)
class BenchRow:
    n: int
    variant: str  # input-kind code
    features: str  # SA | NA | NMA
    load_ms: float
    transform_ms: float
    save_ms: float

    @property
    def total_ms(self) -> float:
        return self.load_ms + self.transform_ms + self.save_ms


def _feature_config(cfg: GeneratorConfig, features: str, n: int) -> GeneratorConfig:
    base = replace(
        cfg,
        n_per_scene=n,
        transform=cfg.transform.replace(salt=0.0, pepper=0.0, smooth=1, noise_var=0.0),
        outputs=frozenset({MaskKind.SINGLE}),
        emit_boxes=False,
    )
    if features == "SA":
        return base
    noisy = base.transform.replace(noise_var=25.0, smooth=5)
    if features == "NA":
        return replace(base, transform=noisy)
    if features == "NMA":
        return replace(
            base,
            transform=noisy,
            outputs=allowed_outputs(cfg.input_kind, has_class_labels=True),
            emit_boxes=True,
        )
    raise ConfigError(f"unknown feature set {features!r}; expected SA, NA or NMA")


def benchmark(
    cfg: GeneratorConfig,
    object_counts: tuple[int, ...] = (1, 2, 4, 8, 16),
    features: tuple[str, ...] = FEATURE_SETS,
    scenes_per_cell: int = 5,
    output_dir: Path | None = None,
) -> list[BenchRow]:
    """Measure mean per-scene wall time split into load/transform/save phases.

    Load covers reading the selected samples (and background) from disk,
    transform covers scene composition, save covers writing all outputs. The
    sum of load and transform is the streaming cost; all three together is the
    offline cost.
    """
    import tempfile

    catalog = load_catalog(cfg.input_dir, cfg.input_kind)
    backgrounds = list_backgrounds(cfg.background_dir)
    rows: list[BenchRow] = []
    own_tmp = output_dir is None
    out_root = Path(tempfile.mkdtemp(prefix="bench_")) if own_tmp else Path(output_dir)

    try:
        for n in object_counts:
            for feature in features:
                run_cfg = _feature_config(cfg, feature, n)
                digest = run_cfg.digest()
                load_s = transform_s = save_s = 0.0
                for k in range(scenes_per_cell):
                    rng = _scene_rng(run_cfg.seed, k)
                    entries = select_samples(catalog, run_cfg, rng)

                    t0 = time.perf_counter()
                    background = None
                    if backgrounds:
                        background = _imread_rgb(
                            backgrounds[int(rng.integers(0, len(backgrounds)))]
                        )
                    samples = [load_sample(e, run_cfg.input_kind) for e in entries]
                    t1 = time.perf_counter()
                    bundle = compose(
                        samples,
                        run_cfg.transform,
                        OrientationParams(run_cfg.theta),
                        background,
                        run_cfg.outputs,
                        rng,
                        with_boxes=run_cfg.emit_boxes,
                    )
                    t2 = time.perf_counter()
                    write_scene(
                        bundle, out_root / f"{feature}_{n}_{k:04d}", digest
                    )
                    t3 = time.perf_counter()

                    load_s += t1 - t0
                    transform_s += t2 - t1
                    save_s += t3 - t2
                rows.append(
                    BenchRow(
                        n=n,
                        variant=cfg.input_kind.code,
                        features=feature,
                        load_ms=1000 * load_s / scenes_per_cell,
                        transform_ms=1000 * transform_s / scenes_per_cell,
                        save_ms=1000 * save_s / scenes_per_cell,
                    )
                )
    finally:
        if own_tmp:
            import shutil

            shutil.rmtree(out_root, ignore_errors=True)
    return rows

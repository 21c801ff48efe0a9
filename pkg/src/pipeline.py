"""Dataset manifests, stratified splits and the extract -> train -> evaluate workflow"""

import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np
from numpy.typing import NDArray
from tqdm import tqdm

from .config import get_descriptor_config, get_pipeline_config, get_svm_config
from .errors import ExtractionError, ManifestError, TextureError, TooFewSamplesError
from .imgio import load_image, resize
from .model_io import save_model
from .regions import DescriptorConfig, expected_dimension, extract, format_descriptor, parse_descriptor
from .storage_factory import StorageFactory
from .storage_interface import FeatureRow
from .svm import GridSpec, SvmModel, grid_search, predict_batch, train_multiclass
from .types import ClassMetrics, ConfigEcho, EvalReport

SPLIT_TAGS = ("train", "test")


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    label: str
    split: str | None = None


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...] = field(default=())

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            if entry.path in seen:
                raise ManifestError(f"duplicate manifest path: {entry.path}")
            seen.add(entry.path)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def paths(self) -> list[str]:
        return [e.path for e in self.entries]

    @property
    def labels(self) -> list[str]:
        return [e.label for e in self.entries]

    @property
    def classes(self) -> list[str]:
        return sorted(set(self.labels))


def parse_manifest(text: str, base_dir: str | Path | None = None) -> DatasetManifest:
    """Parse 'path,label[,train|test]' lines; '#' starts a comment"""
    base = Path(base_dir) if base_dir is not None else None
    entries: list[ManifestEntry] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) not in (2, 3) or not cells[0] or not cells[1]:
            raise ManifestError(f"line {number}: expected 'path,label[,train|test]', got '{raw.strip()}'")
        split = cells[2].lower() if len(cells) == 3 else None
        if split is not None and split not in SPLIT_TAGS:
            raise ManifestError(f"line {number}: split tag must be train or test, got '{cells[2]}'")
        path = Path(cells[0])
        if base is not None and not path.is_absolute():
            path = base / path
        entries.append(ManifestEntry(path=str(path), label=cells[1], split=split))
    return DatasetManifest(tuple(entries))


def load_manifest(path: str | Path) -> DatasetManifest:
    """Read a manifest file; relative image paths resolve against its directory"""
    manifest_path = Path(path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"Manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as f:
        return parse_manifest(f.read(), manifest_path.parent)


def write_manifest(manifest: DatasetManifest, path: str | Path, relative_to: str | Path | None = None) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    root = Path(relative_to) if relative_to is not None else None
    with open(target, "w", encoding="utf-8", newline="\n") as f:
        f.write("# path,label[,train|test]\n")
        for entry in manifest.entries:
            entry_path = Path(entry.path)
            if root is not None and entry_path.is_relative_to(root):
                entry_path = entry_path.relative_to(root)
            tag = f",{entry.split}" if entry.split else ""
            f.write(f"{entry_path.as_posix()},{entry.label}{tag}\n")


def stratified_split(
    m: DatasetManifest, ratio: float, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Per-class random split; tagged entries keep their tag

    Each class sends floor(n * ratio + 0.5) of its untagged entries to the
    training side. Both halves keep manifest order.
    """
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"train ratio must lie strictly between 0 and 1, got {ratio}")

    counts: dict[str, int] = {}
    for entry in m.entries:
        counts[entry.label] = counts.get(entry.label, 0) + 1
    thin = sorted(label for label, n in counts.items() if n < 2)
    if thin:
        raise TooFewSamplesError(f"classes with fewer than 2 samples: {', '.join(thin)}")

    rng = np.random.default_rng(seed)
    to_train = [entry.split == "train" for entry in m.entries]
    for label in sorted(counts):
        untagged = np.array(
            [k for k, e in enumerate(m.entries) if e.label == label and e.split is None], dtype=np.int64
        )
        n_train = int(np.floor(len(untagged) * ratio + 0.5))
        for k in rng.permutation(untagged)[:n_train]:
            to_train[int(k)] = True

    train = tuple(e for e, flag in zip(m.entries, to_train) if flag)
    test = tuple(e for e, flag in zip(m.entries, to_train) if not flag)
    return DatasetManifest(train), DatasetManifest(test)


def _extract_one(path: str, cfg: DescriptorConfig, working_size: int, cog_mode: str) -> NDArray[np.float64]:
    try:
        img = resize(load_image(path), working_size, working_size)
        return extract(img, cfg, cog_mode).values
    except (TextureError, OSError) as e:
        raise ExtractionError(path, str(e)) from e


def extract_manifest(
    m: DatasetManifest,
    cfg: DescriptorConfig,
    config: dict[str, Any] | None = None,
    quiet: bool = False,
) -> list[FeatureRow]:
    """Feature rows for every entry, in manifest order

    Images are extracted in parallel; the first failure aborts the batch with
    an ExtractionError naming the offending path.
    """
    pipeline_config = get_pipeline_config(config)
    cog_mode = get_descriptor_config(config)["cog_mode"]
    working_size = pipeline_config["working_size"]
    values: list[NDArray[np.float64] | None] = [None] * len(m)

    with ThreadPoolExecutor(max_workers=pipeline_config["max_workers"]) as executor:
        future_to_index = {
            executor.submit(_extract_one, entry.path, cfg, working_size, cog_mode): k
            for k, entry in enumerate(m.entries)
        }
        progress = tqdm(
            as_completed(future_to_index),
            total=len(future_to_index),
            desc=f"📦 {format_descriptor(cfg)}",
            unit="img",
            disable=quiet or not sys.stderr.isatty(),
        )
        try:
            for future in progress:
                values[future_to_index[future]] = future.result()
        except ExtractionError:
            for pending in future_to_index:
                pending.cancel()
            raise

    rows: list[FeatureRow] = []
    for entry, vector in zip(m.entries, values):
        assert vector is not None
        rows.append(FeatureRow(path=entry.path, label=entry.label, values=vector))
    return rows


def export_features(
    m: DatasetManifest,
    cfg: DescriptorConfig,
    out: str | Path,
    config: dict[str, Any] | None = None,
    quiet: bool = False,
) -> int:
    """Extract the manifest and write one row per image; returns the row count"""
    rows = extract_manifest(m, cfg, config, quiet)
    storage = StorageFactory.create_storage(out, fallback=get_pipeline_config(config)["feature_store"])
    return storage.save_features(format_descriptor(cfg), rows)


def build_report(
    classes: Sequence[str],
    truth: Sequence[str],
    predicted: Sequence[str],
    echo: ConfigEcho,
    train_count: int,
) -> EvalReport:
    """Confusion matrix (rows true, columns predicted) with per-class metrics"""
    labels = sorted(set(classes) | set(truth) | set(predicted))
    lookup = {name: k for k, name in enumerate(labels)}
    confusion = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for t, p in zip(truth, predicted):
        confusion[lookup[t], lookup[p]] += 1

    per_class: dict[str, ClassMetrics] = {}
    for k, name in enumerate(labels):
        hits = int(confusion[k, k])
        row_total = int(confusion[k].sum())
        col_total = int(confusion[:, k].sum())
        per_class[name] = ClassMetrics(
            precision=hits / col_total if col_total else 0.0,
            recall=hits / row_total if row_total else 0.0,
            support=row_total,
        )

    total = int(confusion.sum())
    return EvalReport(
        accuracy=int(np.trace(confusion)) / total if total else 0.0,
        classes=labels,
        confusion=confusion.tolist(),
        per_class=per_class,
        config=echo,
        train_count=train_count,
        test_count=total,
    )


def _matrix(rows: Sequence[FeatureRow]) -> NDArray[np.float64]:
    return np.vstack([row.values for row in rows])


def train_from_rows(
    rows: Sequence[FeatureRow],
    descriptor: str,
    grid: GridSpec,
    seed: int,
    config: dict[str, Any] | None = None,
) -> tuple[SvmModel, float]:
    """Grid-search (C, gamma) on the rows, then fit the final model on all of them"""
    svm_config = get_svm_config(config)
    workers = get_pipeline_config(config)["max_workers"]
    X = _matrix(rows)
    labels = [row.label for row in rows]
    options: dict[str, Any] = {
        "tol": svm_config["tolerance"],
        "max_iter": svm_config["max_iter"],
        "cache_mb": svm_config["kernel_cache_mb"],
        "scale_features": svm_config["scale_features"],
        "max_workers": workers,
    }
    best = grid_search(X, labels, grid, seed, **options)
    model = train_multiclass(X, labels, best.C, best.gamma, descriptor=descriptor, **options)
    return model, best.cv_accuracy


def run_protocol(
    m: DatasetManifest,
    cfg: DescriptorConfig,
    grid: GridSpec,
    seed: int,
    config: dict[str, Any] | None = None,
    quiet: bool = False,
    model_out: str | Path | None = None,
) -> EvalReport:
    """Split, extract, grid-search, train on the training split and score the test split"""
    ratio = get_pipeline_config(config)["train_ratio"]
    train, test = stratified_split(m, ratio, seed)
    descriptor = format_descriptor(cfg)

    rows = extract_manifest(m, cfg, config, quiet)
    by_path = {row.path: row for row in rows}
    train_rows = [by_path[e.path] for e in train.entries]
    test_rows = [by_path[e.path] for e in test.entries]

    model, cv_accuracy = train_from_rows(train_rows, descriptor, grid, seed, config)
    predicted = predict_batch(model, _matrix(test_rows)) if test_rows else []

    echo = ConfigEcho(descriptor=descriptor, C=model.C, gamma=model.gamma, seed=seed, cv_accuracy=cv_accuracy)
    if model_out is not None:
        save_model(model, model_out)
    return build_report(model.classes, test.labels, predicted, echo, len(train_rows))


def model_descriptor(model: SvmModel, config: dict[str, Any] | None = None) -> DescriptorConfig:
    if not model.descriptor:
        raise TextureError("model file does not record the descriptor it was trained on")
    settings = get_descriptor_config(config)
    cfg = parse_descriptor(
        model.descriptor,
        glcm_levels=settings["glcm_levels"],
        glcm_distance=settings["glcm_distance"],
        coefficients=settings["spectral_coefficients"],
    )
    if expected_dimension(cfg) != model.trained_dim:
        raise TextureError(
            f"model descriptor {model.descriptor} yields {expected_dimension(cfg)} features, "
            f"but the model was trained on {model.trained_dim}"
        )
    return cfg


def predict_manifest(
    model: SvmModel, m: DatasetManifest, config: dict[str, Any] | None = None, quiet: bool = False
) -> list[str]:
    rows = extract_manifest(m, model_descriptor(model, config), config, quiet)
    return predict_batch(model, _matrix(rows)) if rows else []


def evaluate_model(
    model: SvmModel,
    m: DatasetManifest,
    config: dict[str, Any] | None = None,
    seed: int = 0,
    quiet: bool = False,
) -> EvalReport:
    """Score a saved model on every entry of a labelled manifest"""
    predicted = predict_manifest(model, m, config, quiet)
    echo = ConfigEcho(descriptor=model.descriptor, C=model.C, gamma=model.gamma, seed=seed, cv_accuracy=None)
    return build_report(model.classes, m.labels, predicted, echo, 0)

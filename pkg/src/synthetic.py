"""Seeded four-class synthetic texture corpus for benchmarks and tests"""

from pathlib import Path
from typing import Callable

import numpy as np
from numpy.typing import NDArray
from scipy import ndimage

from .imgio import round_half_up, save_pgm
from .pipeline import DatasetManifest, ManifestEntry, write_manifest
from .types import GrayImage

FAMILIES = ("blobs", "checkerboard", "grating", "noise")

MANIFEST_NAME = "manifest.csv"


def _rotated_axes(size: int, rng: np.random.Generator) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    theta = rng.uniform(0.0, np.pi)
    y, x = np.mgrid[0:size, 0:size].astype(np.float64)
    u = x * np.cos(theta) + y * np.sin(theta)
    v = -x * np.sin(theta) + y * np.cos(theta)
    return u, v


def _brightness(rng: np.random.Generator) -> float:
    return rng.uniform(90.0, 165.0)


def grating(size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Sinusoidal stripes at a random orientation, period and phase"""
    u, _ = _rotated_axes(size, rng)
    period = rng.uniform(6.0, 20.0)
    contrast = rng.uniform(40.0, 85.0)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    return _brightness(rng) + contrast * np.sin(2.0 * np.pi * u / period + phase)


def checkerboard(size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Rotated square checks"""
    u, v = _rotated_axes(size, rng)
    period = rng.uniform(8.0, 24.0)
    contrast = rng.uniform(40.0, 85.0)
    offset = rng.uniform(0.0, period, size=2)
    cells = np.floor((u + offset[0]) / (period / 2)) + np.floor((v + offset[1]) / (period / 2))
    return _brightness(rng) + contrast * np.where(cells % 2 == 0, 1.0, -1.0)


def noise(size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """White Gaussian noise with standard deviation between 20 and 60"""
    sigma = rng.uniform(20.0, 60.0)
    return _brightness(rng) + rng.normal(0.0, sigma, size=(size, size))


def blobs(size: int, rng: np.random.Generator) -> NDArray[np.float64]:
    """Smooth bright and dark spots scattered over a flat background"""
    count = int(rng.integers(15, 40))
    radius = rng.uniform(3.0, 7.0)
    impulses = np.zeros((size, size))
    ys = rng.integers(0, size, count)
    xs = rng.integers(0, size, count)
    impulses[ys, xs] = rng.choice((-1.0, 1.0), size=count)
    field = ndimage.gaussian_filter(impulses, radius, mode="wrap")
    peak = float(np.abs(field).max()) or 1.0
    contrast = rng.uniform(50.0, 90.0)
    return _brightness(rng) + contrast * field / peak


GENERATORS: dict[str, Callable[[int, np.random.Generator], NDArray[np.float64]]] = {
    "blobs": blobs,
    "checkerboard": checkerboard,
    "grating": grating,
    "noise": noise,
}


def render(family: str, size: int, rng: np.random.Generator) -> GrayImage:
    if family not in GENERATORS:
        raise ValueError(f"unknown texture family '{family}'; choose from {', '.join(FAMILIES)}")
    values = GENERATORS[family](size, rng)
    return GrayImage(np.clip(round_half_up(values), 0, 255).astype(np.uint8))


def sample(family: str, index: int, size: int = 144, seed: int = 7) -> GrayImage:
    """Image number index of one family; independent of every other image"""
    if family not in FAMILIES:
        raise ValueError(f"unknown texture family '{family}'; choose from {', '.join(FAMILIES)}")
    rng = np.random.default_rng([seed, FAMILIES.index(family), index])
    return render(family, size, rng)


def generate_corpus(
    out_dir: str | Path,
    per_class: int,
    size: int = 144,
    seed: int = 7,
    families: tuple[str, ...] = FAMILIES,
) -> DatasetManifest:
    """Write per_class PGM images of every family plus a manifest; returns the manifest"""
    if per_class < 1:
        raise ValueError(f"per_class must be at least 1, got {per_class}")
    root = Path(out_dir)
    entries: list[ManifestEntry] = []
    for family in families:
        (root / family).mkdir(parents=True, exist_ok=True)
        for index in range(per_class):
            path = root / family / f"{family}_{index:04d}.pgm"
            save_pgm(sample(family, index, size, seed), path)
            entries.append(ManifestEntry(path=str(path), label=family))

    manifest = DatasetManifest(tuple(entries))
    write_manifest(manifest, root / MANIFEST_NAME, relative_to=root)
    return manifest

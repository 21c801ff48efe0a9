"""Gray-level co-occurrence matrices and Haralick statistics"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from .errors import BadLevelsError, DegenerateMatrixError, ImageTooSmallError
from .types import FeatureVector, GrayImage

DIRECTIONS = (0, 45, 90, 135)

HARALICK_NAMES = (
    "energy",
    "entropy",
    "inertia",
    "inverse_difference_moment",
    "sum_average",
    "sum_of_squares_variance",
    "sum_entropy",
    "difference_average",
    "difference_variance",
    "difference_entropy",
    "contrast",
    "correlation",
    "information_correlation_1",
    "information_correlation_2",
    "cluster_prominence",
    "cluster_shade",
)


@dataclass(frozen=True, eq=False)
class CooccurrenceMatrix:
    levels: int
    probs: NDArray[np.float64]
    distance: int
    direction: int


def direction_offset(direction: int, d: int) -> tuple[int, int]:
    """(dx, dy) of the pixel pair, rows growing downwards"""
    offsets = {0: (d, 0), 45: (d, -d), 90: (0, -d), 135: (-d, -d)}
    if direction not in offsets:
        raise ValueError(f"direction must be one of {DIRECTIONS}, got {direction}")
    return offsets[direction]


def requantize(img: GrayImage, levels: int) -> NDArray[np.int64]:
    if not 2 <= levels <= 256:
        raise BadLevelsError(f"levels must lie in [2, 256], got {levels}")
    return (img.pixels.astype(np.int64) * levels) // 256


def glcm_matrix(img: GrayImage, d: int, direction: int, levels: int) -> CooccurrenceMatrix:
    """Symmetric normalized co-occurrence matrix for one distance and direction"""
    if d < 1:
        raise ValueError(f"distance must be at least 1, got {d}")
    q = requantize(img, levels)
    dx, dy = direction_offset(direction, d)
    h, w = q.shape
    if w <= abs(dx) or h <= abs(dy):
        raise ImageTooSmallError(
            f"{w}x{h} image has no pixel pairs at distance {d}, direction {direction}"
        )

    y0, y1 = max(0, -dy), h - max(0, dy)
    x0, x1 = max(0, -dx), w - max(0, dx)
    first = q[y0:y1, x0:x1]
    second = q[y0 + dy : y1 + dy, x0 + dx : x1 + dx]

    counts = np.bincount((first * levels + second).ravel(), minlength=levels * levels)
    counts = counts.reshape(levels, levels)
    counts = counts + counts.T
    return CooccurrenceMatrix(
        levels=levels,
        probs=counts / float(counts.sum()),
        distance=d,
        direction=direction,
    )


def _entropy(p: NDArray[np.float64]) -> float:
    nz = p[p > 0]
    return float(-(nz * np.log2(nz)).sum())


def haralick_features(m: CooccurrenceMatrix) -> FeatureVector:
    """The sixteen statistics listed in HARALICK_NAMES, in that order"""
    p = m.probs
    levels = m.levels
    i, j = np.indices((levels, levels), dtype=np.float64)
    g = np.arange(levels, dtype=np.float64)

    px = p.sum(axis=1)
    py = p.sum(axis=0)
    mu_x = float((g * px).sum())
    mu_y = float((g * py).sum())
    sigma_x = float(np.sqrt(((g - mu_x) ** 2 * px).sum()))
    sigma_y = float(np.sqrt(((g - mu_y) ** 2 * py).sum()))

    k_sum = np.arange(2 * levels - 1, dtype=np.float64)
    p_sum = np.bincount((i + j).astype(np.int64).ravel(), weights=p.ravel(), minlength=2 * levels - 1)
    k_diff = np.arange(levels, dtype=np.float64)
    p_diff = np.bincount(np.abs(i - j).astype(np.int64).ravel(), weights=p.ravel(), minlength=levels)

    energy = float((p**2).sum())
    hxy = _entropy(p)
    inertia = float(((i - j) ** 2 * p).sum())
    idm = float((p / (1.0 + (i - j) ** 2)).sum())
    sum_average = float((k_sum * p_sum).sum())
    sum_of_squares = float(((i - mu_x) ** 2 * p).sum())
    sum_entropy = _entropy(p_sum)
    diff_average = float((k_diff * p_diff).sum())
    diff_variance = float(((k_diff - diff_average) ** 2 * p_diff).sum())
    diff_entropy = _entropy(p_diff)
    contrast = inertia

    if sigma_x * sigma_y > 0:
        correlation = float(((i * j * p).sum() - mu_x * mu_y) / (sigma_x * sigma_y))
    else:
        correlation = 0.0

    hx = _entropy(px)
    hy = _entropy(py)
    outer = np.outer(px, py)
    mask = (p > 0) & (outer > 0)
    hxy1 = float(-(p[mask] * np.log2(outer[mask])).sum())
    nz = outer[outer > 0]
    hxy2 = float(-(nz * np.log2(nz)).sum())
    imc1 = (hxy - hxy1) / max(hx, hy) if max(hx, hy) > 0 else 0.0
    imc2 = float(np.sqrt(max(0.0, 1.0 - np.exp(-2.0 * (hxy2 - hxy)))))

    centred = i + j - mu_x - mu_y
    prominence = float((centred**4 * p).sum())
    shade = float((centred**3 * p).sum())

    values = np.array(
        [
            energy,
            hxy,
            inertia,
            idm,
            sum_average,
            sum_of_squares,
            sum_entropy,
            diff_average,
            diff_variance,
            diff_entropy,
            contrast,
            correlation,
            imc1,
            imc2,
            prominence,
            shade,
        ]
    )
    if not np.all(np.isfinite(values)):
        bad = [name for name, v in zip(HARALICK_NAMES, values) if not np.isfinite(v)]
        raise DegenerateMatrixError(f"non-finite Haralick statistics: {', '.join(bad)}")
    return FeatureVector(values, descriptor=f"GLCM@{m.direction}")


def glcm_feature_vector(img: GrayImage, d: int = 1, levels: int = 16) -> FeatureVector:
    """64 statistics: the 16 Haralick values for 0, 45, 90 and 135 degrees in turn"""
    blocks = [haralick_features(glcm_matrix(img, d, direction, levels)) for direction in DIRECTIONS]
    return FeatureVector.concat(blocks, descriptor=f"GLCM:{levels},{d}")

"""Whole-image DCT and DFT with fixed-length coefficient selection

Grids are indexed F[a, b] where a is the frequency along x (image width M)
and b the frequency along y (image height N).
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.typing import NDArray
from scipy import fft

from .errors import BadKError
from .types import FeatureVector, GrayImage


@dataclass(frozen=True, eq=False)
class CoefficientGrid:
    width: int
    height: int
    values: NDArray[np.float64] | NDArray[np.complex128]


def _columns_first(img: GrayImage) -> NDArray[np.float64]:
    # f[x, y]
    return img.as_float().T


def _alpha(n: int) -> NDArray[np.float64]:
    alpha = np.ones(n)
    alpha[0] = 1.0 / math.sqrt(2.0)
    return alpha


def dct2(img: GrayImage) -> CoefficientGrid:
    """Type-II DCT scaled by alpha(a) * alpha(b) / sqrt(MN)"""
    f = _columns_first(img)
    M, N = f.shape
    # scipy's unnormalized DCT-II carries a factor 2 per axis
    raw = fft.dct(fft.dct(f, type=2, axis=0), type=2, axis=1) / 4.0
    scale = np.outer(_alpha(M), _alpha(N)) / math.sqrt(M * N)
    return CoefficientGrid(width=M, height=N, values=raw * scale)


def dft2(img: GrayImage) -> CoefficientGrid:
    """Unnormalized forward 2-D DFT"""
    f = _columns_first(img)
    M, N = f.shape
    return CoefficientGrid(width=M, height=N, values=fft.fft2(f).astype(np.complex128))


@lru_cache(maxsize=32)
def zigzag_order(M: int, N: int) -> tuple[tuple[int, int], ...]:
    """(a, b) pairs along anti-diagonals, alternating direction, from (0, 0)"""
    order: list[tuple[int, int]] = []
    for s in range(M + N - 1):
        a_values = list(range(max(0, s - N + 1), min(s, M - 1) + 1))
        if s % 2 == 0:
            a_values.reverse()
        order.extend((a, s - a) for a in a_values)
    return tuple(order)


def _fold(index: int, size: int) -> int:
    return index if index < size / 2 else index - size


@lru_cache(maxsize=32)
def low_frequency_order(M: int, N: int) -> tuple[tuple[int, int], ...]:
    """(a, b) pairs by folded squared frequency, ties by folded a then b"""
    pairs = [(a, b) for a in range(M) for b in range(N)]

    def key(pair: tuple[int, int]) -> tuple[int, int, int]:
        fa, fb = _fold(pair[0], M), _fold(pair[1], N)
        return (fa * fa + fb * fb, fa, fb)

    return tuple(sorted(pairs, key=key))


def _check_k(k: int, capacity: int) -> None:
    if k < 0 or k > capacity:
        raise BadKError(f"k must lie in [0, {capacity}], got {k}")


def dct_features(img: GrayImage, k: int) -> FeatureVector:
    grid = dct2(img)
    _check_k(k, grid.width * grid.height)
    order = zigzag_order(grid.width, grid.height)[:k]
    values = np.array([grid.values[a, b] for a, b in order], dtype=np.float64)
    return FeatureVector(values, descriptor=f"DCT:{k}")


def dft_features(img: GrayImage, k: int) -> FeatureVector:
    """Magnitudes of the k lowest-frequency DFT coefficients"""
    grid = dft2(img)
    _check_k(k, grid.width * grid.height)
    order = low_frequency_order(grid.width, grid.height)[:k]
    magnitudes = np.abs(grid.values)
    values = np.array([magnitudes[a, b] for a, b in order], dtype=np.float64)
    return FeatureVector(values, descriptor=f"DFT:{k}")

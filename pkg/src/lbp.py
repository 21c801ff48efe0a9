"""Local binary patterns in uniform (u2) and rotation invariant uniform (riu2) form"""

import math
from enum import Enum
from functools import lru_cache
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import BorderViolationError, ImageTooSmallError
from .types import FeatureVector, GrayImage, NeighborhoodSpec

# Offsets are snapped to multiples of 2^-20 so bilinear sampling of 8-bit data
# stays exact in float64 and rotated images reproduce the same samples bit for bit
OFFSET_GRID = float(2**20)


class LbpVariant(Enum):
    U2 = "u2"
    RIU2 = "riu2"


@lru_cache(maxsize=64)
def neighbor_offsets(spec: NeighborhoodSpec) -> tuple[tuple[float, float], ...]:
    """(dx, dy) of every perimeter sample, p = 0 on the +x axis, counter-clockwise"""
    angles = 2.0 * np.pi * np.arange(spec.P) / spec.P
    dx = np.round(spec.R * np.cos(angles) * OFFSET_GRID) / OFFSET_GRID
    dy = np.round(spec.R * np.sin(angles) * OFFSET_GRID) / OFFSET_GRID
    return tuple((float(x) + 0.0, float(y) + 0.0) for x, y in zip(dx, dy))


def _split(offset: float) -> tuple[int, int, float]:
    base = math.floor(offset)
    frac = offset - base
    return base, base + 1 if frac > 0 else base, frac


def _bilinear(
    a: NDArray[np.float64],
    b: NDArray[np.float64],
    c: NDArray[np.float64],
    d: NDArray[np.float64],
    fx: float | NDArray[np.float64],
    fy: float | NDArray[np.float64],
) -> NDArray[np.float64]:
    top = a + fx * (b - a)
    bottom = c + fx * (d - c)
    return top + fy * (bottom - top)


def check_disk(img: GrayImage, xc: int, yc: int, spec: NeighborhoodSpec) -> None:
    if xc - spec.R < 0 or xc + spec.R > img.width - 1 or yc - spec.R < 0 or yc + spec.R > img.height - 1:
        raise BorderViolationError(
            f"disk of radius {spec.R} around ({xc}, {yc}) leaves the {img.width}x{img.height} image"
        )


def check_fits(img: GrayImage, spec: NeighborhoodSpec) -> None:
    if img.width < spec.min_side or img.height < spec.min_side:
        raise ImageTooSmallError(
            f"{img.width}x{img.height} image is too small for (P,R)=({spec}); "
            f"need at least {spec.min_side}x{spec.min_side}"
        )


def sample_neighbors(img: GrayImage, xc: int, yc: int, spec: NeighborhoodSpec) -> list[float]:
    """Bilinearly interpolated intensities of the P samples around (xc, yc)"""
    check_disk(img, xc, yc, spec)
    src = img.as_float()
    xs = [_split(dx) for dx, _ in neighbor_offsets(spec)]
    ys = [_split(dy) for _, dy in neighbor_offsets(spec)]
    x0 = np.array([xc + s[0] for s in xs])
    x1 = np.array([xc + s[1] for s in xs])
    y0 = np.array([yc + s[0] for s in ys])
    y1 = np.array([yc + s[1] for s in ys])
    fx = np.array([s[2] for s in xs])
    fy = np.array([s[2] for s in ys])
    values = _bilinear(src[y0, x0], src[y0, x1], src[y1, x0], src[y1, x1], fx, fy)
    return [float(v) for v in values]


def neighbor_planes(
    img: GrayImage, spec: NeighborhoodSpec
) -> tuple[NDArray[np.float64], list[NDArray[np.float64]]]:
    """Centre intensities and one sample plane per neighbour over the interior

    The interior excludes a margin of ceil(R) pixels on every side; plane p
    holds neighbour p of every interior centre, in the same row-major layout.
    """
    check_fits(img, spec)
    src = img.as_float()
    m = spec.margin
    rows = img.height - 2 * m
    cols = img.width - 2 * m

    def window(oy: int, ox: int) -> NDArray[np.float64]:
        return src[m + oy : m + oy + rows, m + ox : m + ox + cols]

    planes: list[NDArray[np.float64]] = []
    for dx, dy in neighbor_offsets(spec):
        x0, x1, fx = _split(dx)
        y0, y1, fy = _split(dy)
        planes.append(
            _bilinear(window(y0, x0), window(y0, x1), window(y1, x0), window(y1, x1), fx, fy)
        )
    return window(0, 0), planes


def lbp_code(neighbors: Sequence[float], center: float) -> int:
    code = 0
    for p, value in enumerate(neighbors):
        if value >= center:
            code |= 1 << p
    return code


def min_rotation(code: int, P: int) -> int:
    """Smallest value among the P circular rotations of code"""
    mask = (1 << P) - 1
    best = code
    rotated = code
    for _ in range(P - 1):
        rotated = ((rotated >> 1) | ((rotated & 1) << (P - 1))) & mask
        best = min(best, rotated)
    return best


def uniformity(code: int, P: int) -> int:
    """Number of circular 0/1 transitions in the P-bit pattern"""
    rotated = (code >> 1) | ((code & 1) << (P - 1))
    return (code ^ rotated).bit_count()


def riu2_bin(code: int, P: int) -> int:
    if uniformity(code, P) <= 2:
        return code.bit_count()
    return P + 1


@lru_cache(maxsize=16)
def uniform_codes(P: int) -> tuple[int, ...]:
    """All P(P-1)+2 uniform patterns in ascending order"""
    mask = (1 << P) - 1
    codes = {0, mask}
    for run in range(1, P):
        block = (1 << run) - 1
        for shift in range(P):
            codes.add(((block << shift) | (block >> (P - shift))) & mask)
    return tuple(sorted(codes))


def u2_bin(code: int, P: int) -> int:
    """Position among the uniform codes, or the shared last bin when non-uniform"""
    table = uniform_codes(P)
    if uniformity(code, P) > 2:
        return len(table)
    return table.index(code)


def histogram_dimension(spec: NeighborhoodSpec, variant: LbpVariant) -> int:
    if variant is LbpVariant.U2:
        return spec.P * (spec.P - 1) + 3
    return spec.P + 2


def normalize_histogram(counts: NDArray[np.int64]) -> NDArray[np.float64]:
    total = counts.sum()
    if total == 0:
        return counts.astype(np.float64)
    return counts / float(total)


def lbp_bins(img: GrayImage, spec: NeighborhoodSpec, variant: LbpVariant) -> NDArray[np.int64]:
    """Histogram bin of every interior pixel"""
    center, planes = neighbor_planes(img, spec)
    bits = np.stack([plane >= center for plane in planes])
    transitions = np.count_nonzero(bits != np.roll(bits, -1, axis=0), axis=0)
    uniform = transitions <= 2

    if variant is LbpVariant.RIU2:
        ones = bits.sum(axis=0, dtype=np.int64)
        return np.where(uniform, ones, spec.P + 1)

    codes = np.zeros(center.shape, dtype=np.int64)
    for p in range(spec.P):
        codes |= bits[p].astype(np.int64) << p
    table = np.asarray(uniform_codes(spec.P), dtype=np.int64)
    index = np.searchsorted(table, codes)
    return np.where(uniform, index, len(table)).astype(np.int64)


def lbp_histogram(img: GrayImage, spec: NeighborhoodSpec, variant: LbpVariant) -> FeatureVector:
    """L1-normalized LBP histogram over all interior centres"""
    bins = lbp_bins(img, spec, variant)
    counts = np.bincount(bins.ravel(), minlength=histogram_dimension(spec, variant))
    name = "LBP" if variant is LbpVariant.U2 else "riLBP"
    return FeatureVector(normalize_histogram(counts), descriptor=f"{name}@{spec}", histogram=True)

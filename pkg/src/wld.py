"""Weber local descriptor: differential excitation, orientation and the 2-D histogram"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import TextureError
from .lbp import check_disk, neighbor_planes, normalize_histogram, sample_neighbors
from .types import FeatureVector, GrayImage, NeighborhoodSpec

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class WldQuantization:
    excitation_bins: int = 6
    orientation_bins: int = 8

    def __post_init__(self) -> None:
        if self.excitation_bins < 1 or self.orientation_bins < 1:
            raise ValueError(
                f"WLD bin counts must be positive, got {self.excitation_bins}x{self.orientation_bins}"
            )

    @property
    def dimension(self) -> int:
        return self.excitation_bins * self.orientation_bins

    def __str__(self) -> str:
        return f"{self.excitation_bins}x{self.orientation_bins}"


DEFAULT_QUANTIZATION = WldQuantization()


@dataclass(frozen=True)
class WldSample:
    xi: float
    theta_q: int


def _compass(spec: NeighborhoodSpec) -> NeighborhoodSpec:
    # p = 0 right, 1 below, 2 left, 3 above
    return NeighborhoodSpec(4, spec.R)


def _excitation(center: NDArray[np.float64], neighbors: Sequence[NDArray[np.float64]]) -> NDArray[np.float64]:
    # ascending order makes the sum depend only on the multiset of neighbours
    terms = np.sort(np.stack([(n - center) / np.maximum(n, 1.0) for n in neighbors]), axis=0)
    total = np.zeros_like(center)
    for term in terms:
        total = total + term
    return np.arctan(total)


def _raw_angle(dh: NDArray[np.float64], dv: NDArray[np.float64]) -> NDArray[np.float64]:
    theta = np.arctan2(dh, dv) + np.pi
    theta = np.where(theta >= TWO_PI, theta - TWO_PI, theta)
    return np.where((dh == 0) & (dv == 0), 0.0, theta)


def _ri_angle(neighbors: Sequence[NDArray[np.float64]]) -> NDArray[np.float64]:
    candidates = _ri_candidates(neighbors)
    best = candidates[0]
    for theta in candidates[1:]:
        best = np.minimum(best, theta)
    return best


def _ri_candidates(neighbors: Sequence[NDArray[np.float64]]) -> list[NDArray[np.float64]]:
    P = len(neighbors)
    if P % 4:
        raise TextureError(f"rotation invariant orientation needs P divisible by 4, got {P}")
    half, quarter = P // 2, P // 4
    return [
        _raw_angle(
            neighbors[(i + half) % P] - neighbors[i],
            neighbors[(i + quarter) % P] - neighbors[(i + 3 * quarter) % P],
        )
        for i in range(P)
    ]


def _point(value: float) -> NDArray[np.float64]:
    return np.array([value], dtype=np.float64)


def differential_excitation(img: GrayImage, xc: int, yc: int, spec: NeighborhoodSpec) -> float:
    """arctan of the summed relative differences, each divided by max(I_i, 1)"""
    neighbors = sample_neighbors(img, xc, yc, spec)
    center = float(img.pixels[yc, xc])
    return float(_excitation(_point(center), [_point(n) for n in neighbors])[0])


def orientation(img: GrayImage, xc: int, yc: int, spec: NeighborhoodSpec) -> float:
    """Raw gradient angle in [0, 2*pi) from the four compass samples at radius R"""
    check_disk(img, xc, yc, spec)
    right, below, left, above = sample_neighbors(img, xc, yc, _compass(spec))
    return float(_raw_angle(_point(left - right), _point(below - above))[0])


def raw_orientation(dh: float, dv: float) -> float:
    """arctan2(dh, dv) + pi wrapped to [0, 2*pi), with 0 for a flat gradient"""
    return float(_raw_angle(_point(dh), _point(dv))[0])


def orientation_ri_candidates(neighbors: Sequence[float]) -> list[float]:
    """Raw angle of every cyclic shift of the neighbour ring"""
    return [float(theta[0]) for theta in _ri_candidates([_point(n) for n in neighbors])]


def orientation_ri(img: GrayImage, xc: int, yc: int, spec: NeighborhoodSpec) -> float:
    neighbors = sample_neighbors(img, xc, yc, spec)
    return min(orientation_ri_candidates(neighbors))


def quantize_orientation(theta_prime: float, bins: int) -> int:
    if bins < 1:
        raise ValueError(f"orientation bins must be positive, got {bins}")
    return int(math.floor(theta_prime / (TWO_PI / bins) + 0.5)) % bins


def _quantize_orientations(theta: NDArray[np.float64], bins: int) -> NDArray[np.int64]:
    return np.mod(np.floor(theta / (TWO_PI / bins) + 0.5).astype(np.int64), bins)


def _quantize_excitations(xi: NDArray[np.float64], bins: int) -> NDArray[np.int64]:
    # equal-width bins over (-pi/2, pi/2)
    index = np.floor((xi / np.pi + 0.5) * bins).astype(np.int64)
    return np.clip(index, 0, bins - 1)


def excitation_bin(xi: float, bins: int) -> int:
    return int(_quantize_excitations(_point(xi), bins)[0])


def wld_sample(
    img: GrayImage,
    xc: int,
    yc: int,
    spec: NeighborhoodSpec,
    q: WldQuantization = DEFAULT_QUANTIZATION,
    rotation_invariant: bool = False,
) -> WldSample:
    xi = differential_excitation(img, xc, yc, spec)
    theta = orientation_ri(img, xc, yc, spec) if rotation_invariant else orientation(img, xc, yc, spec)
    return WldSample(xi=xi, theta_q=quantize_orientation(theta, q.orientation_bins))


def wld_bins(
    img: GrayImage,
    spec: NeighborhoodSpec,
    q: WldQuantization = DEFAULT_QUANTIZATION,
    rotation_invariant: bool = False,
) -> NDArray[np.int64]:
    """Flattened (excitation, orientation) cell of every interior pixel"""
    center, planes = neighbor_planes(img, spec)
    xi = _excitation(center, planes)

    if rotation_invariant:
        theta = _ri_angle(planes)
    else:
        _, (right, below, left, above) = neighbor_planes(img, _compass(spec))
        theta = _raw_angle(left - right, below - above)

    e = _quantize_excitations(xi, q.excitation_bins)
    t = _quantize_orientations(theta, q.orientation_bins)
    return e * q.orientation_bins + t


def wld_histogram(
    img: GrayImage,
    spec: NeighborhoodSpec,
    q: WldQuantization = DEFAULT_QUANTIZATION,
    rotation_invariant: bool = False,
) -> FeatureVector:
    """L1-normalized excitation-major WLD histogram"""
    bins = wld_bins(img, spec, q, rotation_invariant)
    counts = np.bincount(bins.ravel(), minlength=q.dimension)
    name = "WLDRI" if rotation_invariant else "WLD"
    suffix = "" if q == DEFAULT_QUANTIZATION else f":{q}"
    return FeatureVector(normalize_histogram(counts), descriptor=f"{name}@{spec}{suffix}", histogram=True)

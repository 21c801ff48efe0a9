"""Shared type definitions for images, feature vectors and reports"""

import math
from dataclasses import dataclass, field
from typing import Sequence, TypedDict

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True, eq=False)
class GrayImage:
    """Immutable 8-bit grayscale image stored row-major as (height, width)"""

    pixels: NDArray[np.uint8]

    def __post_init__(self) -> None:
        if self.pixels.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got {self.pixels.ndim}-D")
        if self.pixels.dtype != np.uint8:
            raise ValueError(f"GrayImage needs uint8 pixels, got {self.pixels.dtype}")
        if self.pixels.size == 0:
            raise ValueError("GrayImage cannot be empty")
        self.pixels.setflags(write=False)

    @classmethod
    def from_array(cls, values: NDArray[np.generic] | Sequence[Sequence[int]]) -> "GrayImage":
        """Build an image from any 2-D array of intensities in [0, 255]"""
        arr = np.asarray(values)
        if arr.ndim != 2:
            raise ValueError(f"GrayImage needs a 2-D array, got {arr.ndim}-D")
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError("intensities must lie in [0, 255]")
        return cls(np.array(arr, dtype=np.uint8, copy=True))

    @property
    def width(self) -> int:
        return int(self.pixels.shape[1])

    @property
    def height(self) -> int:
        return int(self.pixels.shape[0])

    def as_float(self) -> NDArray[np.float64]:
        return self.pixels.astype(np.float64)


@dataclass(frozen=True)
class Rect:
    x: int
    y: int
    w: int
    h: int


@dataclass(frozen=True)
class NeighborhoodSpec:
    """P perimeter samples on a circle of radius R"""

    P: int
    R: float

    def __post_init__(self) -> None:
        if self.P < 4:
            raise ValueError(f"P must be at least 4, got {self.P}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")

    @property
    def margin(self) -> int:
        """Interior margin in pixels: centres closer to the border are skipped"""
        return math.ceil(self.R)

    @property
    def min_side(self) -> int:
        return 2 * self.margin + 2

    def __str__(self) -> str:
        radius = int(self.R) if float(self.R).is_integer() else self.R
        return f"{self.P},{radius}"


STANDARD_SCALES: tuple[NeighborhoodSpec, ...] = (
    NeighborhoodSpec(8, 1),
    NeighborhoodSpec(16, 2),
    NeighborhoodSpec(24, 3),
)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    """Ordered feature values tagged with the descriptor that produced them"""

    values: NDArray[np.float64]
    descriptor: str = ""
    histogram: bool = field(default=False)

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.float64).reshape(-1)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dim(self) -> int:
        return int(self.values.shape[0])

    def __len__(self) -> int:
        return self.dim

    @staticmethod
    def concat(parts: Sequence["FeatureVector"], descriptor: str) -> "FeatureVector":
        if not parts:
            return FeatureVector(np.zeros(0), descriptor)
        return FeatureVector(np.concatenate([p.values for p in parts]), descriptor)


@dataclass(frozen=True)
class CogPoint:
    cx: float
    cy: float


class ClassMetrics(TypedDict):
    """Per-class precision and recall"""

    precision: float
    recall: float
    support: int


class ConfigEcho(TypedDict):
    descriptor: str
    C: float
    gamma: float
    seed: int
    cv_accuracy: float | None


class EvalReport(TypedDict):
    """Outcome of evaluating a trained model on a test split"""

    accuracy: float
    classes: list[str]
    confusion: list[list[int]]
    per_class: dict[str, ClassMetrics]
    config: ConfigEcho
    train_count: int
    test_count: int


class LedgerEntry(TypedDict):
    """One row of the feature-dimension ledger"""

    group: int
    row: str
    scale: str
    descriptor: str
    published: int
    computed: int
    discrepancy: bool


class GridCell(TypedDict):
    C: float
    gamma: float
    cv_accuracy: float

"""Storage interface and abstract base class for feature table backends"""

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import NDArray


@dataclass(frozen=True, eq=False)
class FeatureRow:
    """Feature vector of one image with its manifest path and label"""

    path: str
    label: str
    values: NDArray[np.float64]


class FeatureStorage(ABC):
    """Abstract interface for feature table backends"""

    @abstractmethod
    def save_features(self, descriptor: str, rows: Sequence[FeatureRow]) -> int:
        """Store the rows extracted with descriptor, replacing earlier ones; returns the row count"""
        pass

    @abstractmethod
    def load_features(self, descriptor: str | None = None) -> tuple[str, list[FeatureRow]]:
        """Load the rows for descriptor, or for the only stored descriptor"""
        pass

    @abstractmethod
    def list_descriptors(self) -> list[str]:
        """Canonical descriptor strings held by this store"""
        pass

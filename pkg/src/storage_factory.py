"""Storage factory for creating feature store backends"""

import os
from pathlib import Path

from .feature_storage import TsvFeatureStorage
from .sqlite_storage import SQLiteFeatureStorage
from .storage_interface import FeatureStorage

SQLITE_SUFFIXES = {".db", ".sqlite", ".sqlite3"}
TSV_SUFFIXES = {".tsv", ".txt"}


class StorageFactory:
    """Factory class for creating feature store backends"""

    @staticmethod
    def create_storage(
        path: str | Path, backend: str | None = None, fallback: str | None = None
    ) -> FeatureStorage:
        """
        Create a feature store for path

        Args:
            path: Feature file or database location
            backend: 'tsv' or 'sqlite'; inferred from the file suffix, then
                fallback, when omitted
            fallback: backend for unknown suffixes; FEATURE_STORE when None

        Returns:
            Storage backend instance
        """
        if backend is None:
            suffix = Path(path).suffix.lower()
            if suffix in SQLITE_SUFFIXES:
                backend = "sqlite"
            elif suffix in TSV_SUFFIXES:
                backend = "tsv"
            else:
                backend = fallback or StorageFactory.get_default_backend()

        if backend == "sqlite":
            return SQLiteFeatureStorage(path)
        elif backend == "tsv":
            return TsvFeatureStorage(path)
        else:
            raise ValueError(
                f"Unknown storage backend: {backend}. Supported: 'tsv', 'sqlite'"
            )

    @staticmethod
    def get_available_backends() -> list[str]:
        """Get list of available storage backends"""
        return ["tsv", "sqlite"]

    @staticmethod
    def get_default_backend() -> str:
        """Get the default storage backend"""
        return os.getenv("FEATURE_STORE", "tsv").lower()

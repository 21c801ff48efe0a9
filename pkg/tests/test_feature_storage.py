#!/usr/bin/env python3
"""
Test suite for the TSV and SQLite feature stores and the storage factory
"""

import os
import sqlite3
import sys
import tempfile
from datetime import datetime
from unittest.mock import patch

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.errors import FeatureFileError
from src.feature_storage import TsvFeatureStorage, format_header, parse_header
from src.sqlite_storage import SQLiteFeatureStorage
from src.storage_factory import StorageFactory
from src.storage_interface import FeatureRow


@pytest.fixture
def sample_rows():
    """Three feature rows of dimension 4"""
    rng = np.random.default_rng(11)
    return [
        FeatureRow(path=f"images/{label}/{i}.png", label=label, values=rng.random(4))
        for i, label in enumerate(["benign", "malignant", "benign"])
    ]


class TestTsvFeatureStorage:
    """Tab-separated feature table"""

    def test_save_and_load(self, tmp_path, sample_rows):
        storage = TsvFeatureStorage(tmp_path / "features.tsv")

        assert storage.save_features("riLBP@8,1", sample_rows) == 3
        descriptor, rows = storage.load_features()

        assert descriptor == "riLBP@8,1"
        assert [r.path for r in rows] == [r.path for r in sample_rows]
        assert [r.label for r in rows] == ["benign", "malignant", "benign"]
        for loaded, original in zip(rows, sample_rows):
            assert np.array_equal(loaded.values, original.values)

    def test_file_layout(self, tmp_path, sample_rows):
        path = tmp_path / "features.tsv"
        TsvFeatureStorage(path).save_features("WLD@8,1", sample_rows)

        lines = path.read_text(encoding="utf-8").splitlines()

        assert lines[0] == "# descriptor=WLD@8,1\tdim=4"
        assert len(lines) == 4
        assert all(len(line.split("\t")) == 6 for line in lines[1:])
        assert lines[1].startswith("images/benign/0.png\tbenign\t")

    def test_resave_is_byte_identical(self, tmp_path, sample_rows):
        first = tmp_path / "a.tsv"
        second = tmp_path / "b.tsv"
        TsvFeatureStorage(first).save_features("LBP@8,1", sample_rows)
        _, rows = TsvFeatureStorage(first).load_features()

        TsvFeatureStorage(second).save_features("LBP@8,1", rows)

        assert first.read_bytes() == second.read_bytes()

    def test_descriptor_mismatch(self, tmp_path, sample_rows):
        storage = TsvFeatureStorage(tmp_path / "features.tsv")
        storage.save_features("LBP@8,1", sample_rows)

        with pytest.raises(FeatureFileError):
            storage.load_features("riLBP@8,1")

    def test_wrong_column_count(self, tmp_path):
        path = tmp_path / "features.tsv"
        path.write_text("# descriptor=DCT:2\tdim=2\na.png\tx\t1.0\n", encoding="utf-8")

        with pytest.raises(FeatureFileError):
            TsvFeatureStorage(path).load_features()

    def test_bad_number(self, tmp_path):
        path = tmp_path / "features.tsv"
        path.write_text("# descriptor=DCT:1\tdim=1\na.png\tx\tabc\n", encoding="utf-8")

        with pytest.raises(FeatureFileError):
            TsvFeatureStorage(path).load_features()

    def test_mixed_dimensions_rejected(self, tmp_path):
        rows = [
            FeatureRow("a.png", "x", np.zeros(2)),
            FeatureRow("b.png", "y", np.zeros(3)),
        ]

        with pytest.raises(FeatureFileError):
            TsvFeatureStorage(tmp_path / "f.tsv").save_features("DCT:2", rows)

    def test_tab_in_label_rejected(self, tmp_path):
        with pytest.raises(FeatureFileError):
            TsvFeatureStorage(tmp_path / "f.tsv").save_features(
                "DCT:1", [FeatureRow("a.png", "x\ty", np.zeros(1))]
            )

    def test_missing_file(self, tmp_path):
        storage = TsvFeatureStorage(tmp_path / "absent.tsv")

        assert storage.list_descriptors() == []
        with pytest.raises(FileNotFoundError):
            storage.load_features()

    def test_header_helpers(self):
        assert parse_header(format_header("cogGLCM:16,1", 256)) == ("cogGLCM:16,1", 256)
        with pytest.raises(FeatureFileError):
            parse_header("descriptor=LBP@8,1\tdim=59")
        with pytest.raises(FeatureFileError):
            parse_header("# descriptor=LBP@8,1\tdim=many")


class TestSQLiteFeatureStorage:
    """SQLite feature store"""

    @pytest.fixture
    def temp_db(self):
        """Create temporary SQLite database for testing"""
        with tempfile.NamedTemporaryFile(suffix=".db", delete=False) as f:
            db_path = f.name

        yield db_path

        # Cleanup
        if os.path.exists(db_path):
            os.unlink(db_path)

    def test_initialization(self, temp_db):
        SQLiteFeatureStorage(temp_db)

        with sqlite3.connect(temp_db) as conn:
            tables = {r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")}
            version = conn.execute("SELECT value FROM metadata WHERE key = 'schema_version'").fetchone()

        for table in ["descriptors", "feature_rows", "metadata"]:
            assert table in tables
        assert version == ("1",)

    def test_save_and_load(self, temp_db, sample_rows):
        storage = SQLiteFeatureStorage(temp_db)

        storage.save_features("cogWLDRI@16,2", sample_rows)
        descriptor, rows = storage.load_features()

        assert descriptor == "cogWLDRI@16,2"
        assert [r.path for r in rows] == [r.path for r in sample_rows]
        for loaded, original in zip(rows, sample_rows):
            assert np.array_equal(loaded.values, original.values)

    def test_several_descriptors(self, temp_db, sample_rows):
        storage = SQLiteFeatureStorage(temp_db)
        storage.save_features("LBP@8,1", sample_rows)
        storage.save_features("DCT:4", sample_rows[:1])

        assert storage.list_descriptors() == ["DCT:4", "LBP@8,1"]
        assert len(storage.load_features("DCT:4")[1]) == 1
        with pytest.raises(FeatureFileError):
            storage.load_features()
        with pytest.raises(FeatureFileError):
            storage.load_features("WLD@8,1")

    def test_resave_replaces_rows(self, temp_db, sample_rows):
        storage = SQLiteFeatureStorage(temp_db)
        storage.save_features("LBP@8,1", sample_rows)

        storage.save_features("LBP@8,1", sample_rows[1:])

        _, rows = storage.load_features("LBP@8,1")
        assert [r.path for r in rows] == [r.path for r in sample_rows[1:]]
        assert storage.get_database_stats() == {"descriptors": 1, "feature_rows": 2}

    def test_saved_at_timestamp(self, temp_db, sample_rows):
        storage = SQLiteFeatureStorage(temp_db)

        with patch("src.sqlite_storage.datetime") as mock_datetime:
            mock_datetime.now.return_value = datetime(2024, 3, 1, 12, 0, 0)
            storage.save_features("LBP@8,1", sample_rows)

        with sqlite3.connect(temp_db) as conn:
            saved_at = conn.execute("SELECT saved_at FROM descriptors").fetchone()[0]
        assert saved_at == "2024-03-01T12:00:00"


class TestStorageFactory:
    """Backend selection"""

    def test_suffix_selects_backend(self, tmp_path):
        assert isinstance(StorageFactory.create_storage(tmp_path / "f.tsv"), TsvFeatureStorage)
        assert isinstance(StorageFactory.create_storage(tmp_path / "f.TXT"), TsvFeatureStorage)
        assert isinstance(StorageFactory.create_storage(tmp_path / "f.db"), SQLiteFeatureStorage)
        assert isinstance(StorageFactory.create_storage(tmp_path / "f.sqlite3"), SQLiteFeatureStorage)

    def test_explicit_backend_wins(self, tmp_path):
        assert isinstance(StorageFactory.create_storage(tmp_path / "f.tsv", backend="sqlite"), SQLiteFeatureStorage)

    def test_fallback_for_unknown_suffix(self, tmp_path):
        storage = StorageFactory.create_storage(tmp_path / "features.bin", fallback="sqlite")

        assert isinstance(storage, SQLiteFeatureStorage)

    def test_default_backend_from_environment(self, tmp_path):
        with patch.dict(os.environ, {"FEATURE_STORE": "sqlite"}):
            assert StorageFactory.get_default_backend() == "sqlite"
            storage = StorageFactory.create_storage(tmp_path / "features")
        assert isinstance(storage, SQLiteFeatureStorage)

    def test_invalid_backend(self, tmp_path):
        with pytest.raises(ValueError, match="Unknown storage backend"):
            StorageFactory.create_storage(tmp_path / "f.tsv", backend="parquet")

    def test_available_backends(self):
        assert StorageFactory.get_available_backends() == ["tsv", "sqlite"]

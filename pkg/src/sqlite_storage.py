"""SQLite storage backend holding feature tables for several descriptors"""

import sqlite3
from datetime import datetime
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FeatureFileError
from .storage_interface import FeatureRow, FeatureStorage


class SQLiteFeatureStorage(FeatureStorage):
    """SQLite-based feature store; one table row per (descriptor, image)

    Re-exports reload identical rows, but the file bytes differ with saved_at.
    """

    def __init__(self, db_path: str | Path = "features/features.db") -> None:
        self.db_path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._init_database()

    def _init_database(self) -> None:
        """Initialize database schema"""
        with sqlite3.connect(self.db_path) as conn:
            conn.executescript("""
                CREATE TABLE IF NOT EXISTS descriptors (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    name TEXT NOT NULL UNIQUE,
                    dim INTEGER NOT NULL,
                    saved_at TEXT NOT NULL
                );

                CREATE TABLE IF NOT EXISTS feature_rows (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    descriptor_id INTEGER NOT NULL,
                    position INTEGER NOT NULL,
                    path TEXT NOT NULL,
                    label TEXT NOT NULL,
                    vector BLOB NOT NULL,
                    FOREIGN KEY (descriptor_id) REFERENCES descriptors(id)
                );

                CREATE TABLE IF NOT EXISTS metadata (
                    key TEXT PRIMARY KEY,
                    value TEXT NOT NULL
                );

                CREATE INDEX IF NOT EXISTS idx_feature_rows_descriptor
                    ON feature_rows(descriptor_id, position);
            """)

            cursor = conn.execute(
                "SELECT value FROM metadata WHERE key = 'schema_version'"
            )
            if not cursor.fetchone():
                conn.execute(
                    "INSERT INTO metadata (key, value) VALUES ('schema_version', '1')"
                )
            conn.commit()

    def save_features(self, descriptor: str, rows: Sequence[FeatureRow]) -> int:
        """Replace the stored rows of descriptor"""
        dims = {len(row.values) for row in rows}
        if len(dims) > 1:
            raise FeatureFileError(f"rows have differing dimensions: {sorted(dims)}")
        dim = dims.pop() if dims else 0

        with sqlite3.connect(self.db_path) as conn:
            existing = conn.execute(
                "SELECT id FROM descriptors WHERE name = ?", (descriptor,)
            ).fetchone()
            if existing:
                conn.execute("DELETE FROM feature_rows WHERE descriptor_id = ?", (existing[0],))
                conn.execute("DELETE FROM descriptors WHERE id = ?", (existing[0],))

            cursor = conn.execute(
                "INSERT INTO descriptors (name, dim, saved_at) VALUES (?, ?, ?)",
                (descriptor, dim, datetime.now().isoformat()),
            )
            descriptor_id = cursor.lastrowid

            conn.executemany(
                """
                INSERT INTO feature_rows (descriptor_id, position, path, label, vector)
                VALUES (?, ?, ?, ?, ?)
            """,
                [
                    (
                        descriptor_id,
                        position,
                        row.path,
                        row.label,
                        np.asarray(row.values, dtype="<f8").tobytes(),
                    )
                    for position, row in enumerate(rows)
                ],
            )
            conn.commit()

        return len(rows)

    def load_features(self, descriptor: str | None = None) -> tuple[str, list[FeatureRow]]:
        """Load rows of descriptor, or of the only descriptor stored"""
        with sqlite3.connect(self.db_path) as conn:
            if descriptor is None:
                names = [r[0] for r in conn.execute("SELECT name FROM descriptors ORDER BY name")]
                if len(names) != 1:
                    raise FeatureFileError(
                        f"{self.db_path} holds {len(names)} descriptors; choose one of: {', '.join(names)}"
                    )
                descriptor = names[0]

            found = conn.execute(
                "SELECT id, dim FROM descriptors WHERE name = ?", (descriptor,)
            ).fetchone()
            if not found:
                raise FeatureFileError(f"{self.db_path} holds no features for {descriptor}")
            descriptor_id, dim = found

            rows: list[FeatureRow] = []
            for path, label, blob in conn.execute(
                """
                SELECT path, label, vector FROM feature_rows
                WHERE descriptor_id = ?
                ORDER BY position ASC
            """,
                (descriptor_id,),
            ):
                values = np.frombuffer(blob, dtype="<f8").astype(np.float64)
                if len(values) != dim:
                    raise FeatureFileError(f"stored vector for {path} has {len(values)} values, expected {dim}")
                rows.append(FeatureRow(path=path, label=label, values=values))

        return descriptor, rows

    def list_descriptors(self) -> list[str]:
        with sqlite3.connect(self.db_path) as conn:
            return [r[0] for r in conn.execute("SELECT name FROM descriptors ORDER BY name")]

    def get_database_stats(self) -> dict[str, int]:
        """Row counts for diagnostics"""
        with sqlite3.connect(self.db_path) as conn:
            descriptors = conn.execute("SELECT COUNT(*) FROM descriptors").fetchone()[0]
            rows = conn.execute("SELECT COUNT(*) FROM feature_rows").fetchone()[0]
        return {"descriptors": descriptors, "feature_rows": rows}

"""Tab-separated feature tables, one descriptor per file"""

from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import FeatureFileError
from .storage_interface import FeatureRow, FeatureStorage

HEADER_PREFIX = "# descriptor="


def format_header(descriptor: str, dim: int) -> str:
    return f"{HEADER_PREFIX}{descriptor}\tdim={dim}"


def parse_header(line: str) -> tuple[str, int]:
    if not line.startswith(HEADER_PREFIX):
        raise FeatureFileError(f"feature file header must start with '{HEADER_PREFIX}'")
    fields = line[len("# "):].rstrip("\n").split("\t")
    try:
        values = dict(field.split("=", 1) for field in fields)
        return values["descriptor"], int(values["dim"])
    except (KeyError, ValueError) as e:
        raise FeatureFileError(f"malformed feature file header '{line.strip()}': {e}") from e


class TsvFeatureStorage(FeatureStorage):
    def __init__(self, path: str | Path) -> None:
        self.path = Path(path)

    def save_features(self, descriptor: str, rows: Sequence[FeatureRow]) -> int:
        """Write the table; identical inputs give byte-identical files"""
        dims = {len(row.values) for row in rows}
        if len(dims) > 1:
            raise FeatureFileError(f"rows have differing dimensions: {sorted(dims)}")
        dim = dims.pop() if dims else 0

        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "w", encoding="utf-8", newline="\n") as f:
            f.write(format_header(descriptor, dim) + "\n")
            for row in rows:
                if "\t" in row.path or "\t" in row.label:
                    raise FeatureFileError(f"tab characters are not allowed in paths or labels: {row.path}")
                values = "\t".join(repr(float(v)) for v in row.values)
                f.write(f"{row.path}\t{row.label}\t{values}\n")
        return len(rows)

    def load_features(self, descriptor: str | None = None) -> tuple[str, list[FeatureRow]]:
        if not self.path.is_file():
            raise FileNotFoundError(f"Feature file not found: {self.path}")

        with open(self.path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        if not lines:
            raise FeatureFileError(f"{self.path} is empty")

        stored, dim = parse_header(lines[0])
        if descriptor is not None and descriptor != stored:
            raise FeatureFileError(f"{self.path} holds {stored}, not {descriptor}")

        rows: list[FeatureRow] = []
        for number, line in enumerate(lines[1:], start=2):
            if not line:
                continue
            cells = line.split("\t")
            if len(cells) != dim + 2:
                raise FeatureFileError(
                    f"{self.path}:{number}: expected {dim + 2} columns, got {len(cells)}"
                )
            try:
                values = np.array([float(v) for v in cells[2:]], dtype=np.float64)
            except ValueError as e:
                raise FeatureFileError(f"{self.path}:{number}: {e}") from e
            rows.append(FeatureRow(path=cells[0], label=cells[1], values=values))
        return stored, rows

    def list_descriptors(self) -> list[str]:
        if not self.path.is_file():
            return []
        with open(self.path, encoding="utf-8") as f:
            return [parse_header(f.readline())[0]]

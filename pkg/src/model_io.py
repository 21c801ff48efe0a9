"""Plain-text persistence for trained SVM models"""

import json
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import ModelFormatError
from .svm import BinaryModel, FeatureScaler, SvmModel

FORMAT_VERSION = 1
MAGIC = "# texture-lesion-classifier svm model"


def _floats(values: NDArray[np.float64]) -> str:
    # repr gives the shortest text that parses back to the same double
    return " ".join(repr(float(v)) for v in values)


def dumps_model(model: SvmModel) -> str:
    lines = [
        MAGIC,
        f"format_version {FORMAT_VERSION}",
        f"descriptor {model.descriptor or '-'}",
        f"classes {json.dumps(model.classes, ensure_ascii=False)}",
        f"trained_dim {model.trained_dim}",
        f"C {model.C!r}",
        f"gamma {model.gamma!r}",
    ]
    if model.scaler is None:
        lines.append("scaler none")
    else:
        lines.append("scaler minmax")
        lines.append(f"lower {_floats(model.scaler.lower)}")
        lines.append(f"upper {_floats(model.scaler.upper)}")

    lines.append(f"binaries {len(model.binaries)}")
    for (a, b), binary in zip(model.pairs, model.binaries):
        lines.append(f"binary {a} {b} {len(binary.alphas_signed)} {binary.bias!r}")
        lines.append(f"coef {_floats(binary.alphas_signed)}")
        for row in binary.support_vectors:
            lines.append(f"sv {_floats(row)}")
    return "\n".join(lines) + "\n"


class _Reader:
    def __init__(self, text: str) -> None:
        self.lines = [line for line in text.splitlines() if line.strip()]
        self.position = 0

    def take(self, key: str) -> str:
        if self.position >= len(self.lines):
            raise ModelFormatError(f"unexpected end of model file, expected '{key}'")
        line = self.lines[self.position]
        self.position += 1
        head, _, rest = line.partition(" ")
        if head != key:
            raise ModelFormatError(f"line {self.position}: expected '{key}', got '{head}'")
        return rest.strip()

    def take_floats(self, key: str, count: int) -> NDArray[np.float64]:
        text = self.take(key)
        values = np.array([float(v) for v in text.split()], dtype=np.float64) if text else np.zeros(0)
        if len(values) != count:
            raise ModelFormatError(f"'{key}' line holds {len(values)} values, expected {count}")
        return values


def loads_model(text: str) -> SvmModel:
    reader = _Reader(text)
    try:
        if not reader.lines or reader.lines[0] != MAGIC:
            raise ModelFormatError("missing model file header")
        reader.position = 1
        version = int(reader.take("format_version"))
        if version != FORMAT_VERSION:
            raise ModelFormatError(f"unsupported model format version {version}")

        descriptor = reader.take("descriptor")
        classes = json.loads(reader.take("classes"))
        if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
            raise ModelFormatError("classes must be a JSON list of strings")
        trained_dim = int(reader.take("trained_dim"))
        C = float(reader.take("C"))
        gamma = float(reader.take("gamma"))

        scaler = None
        kind = reader.take("scaler")
        if kind == "minmax":
            lower = reader.take_floats("lower", trained_dim)
            upper = reader.take_floats("upper", trained_dim)
            scaler = FeatureScaler(lower=lower, upper=upper)
        elif kind != "none":
            raise ModelFormatError(f"unknown scaler '{kind}'")

        count = int(reader.take("binaries"))
        pairs: list[tuple[int, int]] = []
        binaries: list[BinaryModel] = []
        for _ in range(count):
            a, b, n_sv, bias = reader.take("binary").split()
            pairs.append((int(a), int(b)))
            coef = reader.take_floats("coef", int(n_sv))
            rows = [reader.take_floats("sv", trained_dim) for _ in range(int(n_sv))]
            support = np.vstack(rows) if rows else np.zeros((0, trained_dim))
            binaries.append(
                BinaryModel(support_vectors=support, alphas_signed=coef, bias=float(bias), gamma=gamma, C=C)
            )
    except ModelFormatError:
        raise
    except (ValueError, json.JSONDecodeError) as e:
        raise ModelFormatError(f"malformed model file: {e}") from e

    if len(binaries) != len(classes) * (len(classes) - 1) // 2:
        raise ModelFormatError(f"{len(binaries)} binary models do not cover {len(classes)} classes")

    return SvmModel(
        classes=list(classes),
        binaries=binaries,
        trained_dim=trained_dim,
        C=C,
        gamma=gamma,
        scaler=scaler,
        descriptor="" if descriptor == "-" else descriptor,
        pairs=pairs,
    )


def save_model(model: SvmModel, path: str | Path) -> None:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        f.write(dumps_model(model))


def load_model(path: str | Path) -> SvmModel:
    source = Path(path)
    if not source.is_file():
        raise FileNotFoundError(f"Model file not found: {source}")
    with open(source, encoding="utf-8") as f:
        return loads_model(f.read())

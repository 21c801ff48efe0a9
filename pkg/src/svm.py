"""RBF-kernel C-SVM: SMO training, one-vs-one voting and cross-validated grid search"""

import math
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, NamedTuple, Sequence

import numpy as np
from numpy.typing import NDArray

from .errors import DimensionMismatchError, InsufficientDataError, SingleClassError
from .types import FeatureVector, GridCell

# Floor for a non-positive second derivative along the working pair
TAU = 1e-12

DEFAULT_TOLERANCE = 1e-3
DEFAULT_MAX_ITER = 100_000
DEFAULT_CACHE_MB = 256

Features = NDArray[np.float64] | FeatureVector | Sequence[float]


def _as_vector(x: Features) -> NDArray[np.float64]:
    if isinstance(x, FeatureVector):
        return x.values
    return np.asarray(x, dtype=np.float64).reshape(-1)


def _as_matrix(X: Sequence[Features] | NDArray[np.float64]) -> NDArray[np.float64]:
    if isinstance(X, np.ndarray):
        matrix = np.asarray(X, dtype=np.float64)
    else:
        rows = [_as_vector(x) for x in X]
        dims = {len(r) for r in rows}
        if len(dims) > 1:
            raise DimensionMismatchError(f"samples have differing dimensions: {sorted(dims)}")
        matrix = np.vstack(rows) if rows else np.zeros((0, 0))
    if matrix.ndim != 2:
        raise DimensionMismatchError(f"sample matrix must be 2-D, got {matrix.ndim}-D")
    return matrix


def rbf(x: Features, y: Features, gamma: float) -> float:
    """exp(-gamma * |x - y|^2)"""
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    a, b = _as_vector(x), _as_vector(y)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"cannot compare vectors of dimension {a.size} and {b.size}")
    diff = a - b
    return float(np.exp(-gamma * float(np.dot(diff, diff))))


def squared_distances(A: NDArray[np.float64], B: NDArray[np.float64]) -> NDArray[np.float64]:
    """|A_i - B_j|^2 by direct differences, row by row"""
    out = np.empty((A.shape[0], B.shape[0]))
    for i, row in enumerate(A):
        diff = B - row
        out[i] = np.einsum("ij,ij->i", diff, diff)
    return out


class KernelCache:
    """LRU cache of kernel rows bounded by a byte budget"""

    def __init__(self, compute_row: Callable[[int], NDArray[np.float64]], n: int, cache_mb: int) -> None:
        self.compute_row = compute_row
        self.capacity = max(2, (cache_mb * 1024 * 1024) // max(1, 8 * n))
        self.rows: OrderedDict[int, NDArray[np.float64]] = OrderedDict()

    def row(self, i: int) -> NDArray[np.float64]:
        cached = self.rows.get(i)
        if cached is not None:
            self.rows.move_to_end(i)
            return cached
        values = self.compute_row(i)
        self.rows[i] = values
        if len(self.rows) > self.capacity:
            self.rows.popitem(last=False)
        return values


@dataclass(frozen=True)
class SmoSolution:
    alpha: NDArray[np.float64]
    rho: float
    iterations: int
    kkt_gap: float


def _rho(alpha: NDArray[np.float64], grad: NDArray[np.float64], y: NDArray[np.float64], C: float) -> float:
    yg = y * grad
    upper = alpha >= C
    lower = alpha <= 0
    free = ~upper & ~lower
    if free.any():
        return float(yg[free].sum() / np.count_nonzero(free))
    ub_set = (upper & (y < 0)) | (lower & (y > 0))
    lb_set = (upper & (y > 0)) | (lower & (y < 0))
    ub = float(yg[ub_set].min()) if ub_set.any() else math.inf
    lb = float(yg[lb_set].max()) if lb_set.any() else -math.inf
    if math.isinf(ub):
        return lb
    if math.isinf(lb):
        return ub
    return (ub + lb) / 2.0


def solve_smo(
    kernel: KernelCache, y: NDArray[np.float64], C: float, tol: float, max_iter: int
) -> SmoSolution:
    """Dual C-SVM by SMO with the maximal violating pair as working set

    Minimizes 0.5 a'Qa - e'a subject to 0 <= a <= C and y'a = 0, where
    Q_ij = y_i y_j K_ij. Stops once the largest KKT violation falls below tol.
    """
    n = len(y)
    alpha = np.zeros(n)
    grad = -np.ones(n)
    iterations = 0
    gap = math.inf

    while True:
        score = -y * grad
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        if not up.any() or not low.any():
            gap = 0.0
            break
        i = int(np.argmax(np.where(up, score, -np.inf)))
        j = int(np.argmin(np.where(low, score, np.inf)))
        gap = float(score[i] - score[j])
        if gap < tol or iterations >= max_iter:
            break
        iterations += 1

        q_i = y[i] * y * kernel.row(i)
        q_j = y[j] * y * kernel.row(j)
        old_i, old_j = float(alpha[i]), float(alpha[j])
        a_i, a_j = old_i, old_j

        # RBF diagonal is 1, so Q_ii = Q_jj = 1
        if y[i] != y[j]:
            quad = 2.0 + 2.0 * float(q_i[j])
            if quad <= 0:
                quad = TAU
            delta = (-float(grad[i]) - float(grad[j])) / quad
            diff = a_i - a_j
            a_i += delta
            a_j += delta
            if diff > 0:
                if a_j < 0:
                    a_j, a_i = 0.0, diff
            elif a_i < 0:
                a_i, a_j = 0.0, -diff
            if diff > 0:
                if a_i > C:
                    a_i, a_j = C, C - diff
            elif a_j > C:
                a_j, a_i = C, C + diff
        else:
            quad = 2.0 - 2.0 * float(q_i[j])
            if quad <= 0:
                quad = TAU
            delta = (float(grad[i]) - float(grad[j])) / quad
            total = a_i + a_j
            a_i -= delta
            a_j += delta
            if total > C:
                if a_i > C:
                    a_i, a_j = C, total - C
            elif a_j < 0:
                a_j, a_i = 0.0, total
            if total > C:
                if a_j > C:
                    a_j, a_i = C, total - C
            elif a_i < 0:
                a_i, a_j = 0.0, total

        alpha[i], alpha[j] = a_i, a_j
        grad += q_i * (a_i - old_i) + q_j * (a_j - old_j)

    return SmoSolution(alpha=alpha, rho=_rho(alpha, grad, y, C), iterations=iterations, kkt_gap=gap)


@dataclass(frozen=True, eq=False)
class BinaryModel:
    """Support vectors with their signed dual coefficients; f(x) = sum coef K(sv, x) + bias"""

    support_vectors: NDArray[np.float64]
    alphas_signed: NDArray[np.float64]
    bias: float
    gamma: float
    C: float
    iterations: int = 0
    kkt_gap: float = 0.0

    def decision_values(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        if len(self.alphas_signed) == 0:
            return np.full(X.shape[0], self.bias)
        K = np.exp(-self.gamma * squared_distances(X, self.support_vectors))
        return K @ self.alphas_signed + self.bias

    def decision(self, x: Features) -> float:
        return float(self.decision_values(_as_vector(x)[None, :])[0])


def _binary_from_solution(
    X: NDArray[np.float64], y: NDArray[np.float64], solution: SmoSolution, C: float, gamma: float
) -> BinaryModel:
    sv = solution.alpha > 0
    return BinaryModel(
        support_vectors=np.array(X[sv]),
        alphas_signed=solution.alpha[sv] * y[sv],
        bias=-solution.rho,
        gamma=gamma,
        C=C,
        iterations=solution.iterations,
        kkt_gap=solution.kkt_gap,
    )


def _check_hyper(C: float, gamma: float) -> None:
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")


def train_binary(
    X: Sequence[Features] | NDArray[np.float64],
    y: Sequence[int] | NDArray[np.int64],
    C: float,
    gamma: float,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: int = DEFAULT_CACHE_MB,
) -> BinaryModel:
    """Soft-margin RBF SVM for labels in {-1, +1}"""
    _check_hyper(C, gamma)
    C, gamma = float(C), float(gamma)
    matrix = _as_matrix(X)
    labels = np.asarray(y, dtype=np.float64)
    if matrix.shape[0] != labels.shape[0]:
        raise DimensionMismatchError(f"{matrix.shape[0]} samples but {labels.shape[0]} labels")
    if not np.all(np.isin(labels, (-1.0, 1.0))):
        raise ValueError("binary labels must be -1 or +1")
    if not ((labels > 0).any() and (labels < 0).any()):
        raise SingleClassError("binary training needs samples of both classes")

    def compute_row(i: int) -> NDArray[np.float64]:
        diff = matrix - matrix[i]
        return np.exp(-gamma * np.einsum("ij,ij->i", diff, diff))

    kernel = KernelCache(compute_row, len(labels), cache_mb)
    solution = solve_smo(kernel, labels, C, tol, max_iter)
    return _binary_from_solution(matrix, labels, solution, C, gamma)


@dataclass(frozen=True, eq=False)
class FeatureScaler:
    """Per-feature min-max map onto [-1, 1]; constant features map to 0"""

    lower: NDArray[np.float64]
    upper: NDArray[np.float64]

    @classmethod
    def fit(cls, X: NDArray[np.float64]) -> "FeatureScaler":
        return cls(lower=X.min(axis=0), upper=X.max(axis=0))

    def transform(self, X: NDArray[np.float64]) -> NDArray[np.float64]:
        span = self.upper - self.lower
        safe = np.where(span > 0, span, 1.0)
        scaled = 2.0 * (X - self.lower) / safe - 1.0
        return np.where(span > 0, scaled, 0.0)


@dataclass(frozen=True, eq=False)
class SvmModel:
    """One binary model per class pair (a, b), a < b in class order, a as +1"""

    classes: list[str]
    binaries: list[BinaryModel]
    trained_dim: int
    C: float
    gamma: float
    scaler: FeatureScaler | None = None
    descriptor: str = ""
    pairs: list[tuple[int, int]] = field(default_factory=list[tuple[int, int]])

    def __post_init__(self) -> None:
        if not self.pairs:
            object.__setattr__(self, "pairs", list(combinations(range(len(self.classes)), 2)))


def _pair_problem(
    labels: NDArray[np.int64], a: int, b: int
) -> tuple[NDArray[np.intp], NDArray[np.float64]]:
    index = np.flatnonzero((labels == a) | (labels == b))
    return index, np.where(labels[index] == a, 1.0, -1.0)


def _encode_labels(labels: Sequence[str]) -> tuple[list[str], NDArray[np.int64]]:
    classes = sorted(set(labels))
    lookup = {name: k for k, name in enumerate(classes)}
    return classes, np.array([lookup[name] for name in labels], dtype=np.int64)


def train_multiclass(
    X: Sequence[Features] | NDArray[np.float64],
    labels: Sequence[str],
    C: float,
    gamma: float,
    *,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: int = DEFAULT_CACHE_MB,
    scale_features: bool = False,
    max_workers: int = 1,
    descriptor: str = "",
) -> SvmModel:
    """One-vs-one ensemble over the sorted class labels"""
    _check_hyper(C, gamma)
    C, gamma = float(C), float(gamma)
    matrix = _as_matrix(X)
    if matrix.shape[0] != len(labels):
        raise DimensionMismatchError(f"{matrix.shape[0]} samples but {len(labels)} labels")
    classes, encoded = _encode_labels(labels)
    if len(classes) < 2:
        raise SingleClassError(f"need at least 2 classes, got {classes}")

    scaler = FeatureScaler.fit(matrix) if scale_features else None
    data = scaler.transform(matrix) if scaler is not None else matrix
    pairs = list(combinations(range(len(classes)), 2))

    def train_pair(pair: tuple[int, int]) -> BinaryModel:
        index, y = _pair_problem(encoded, *pair)
        return train_binary(data[index], y, C, gamma, tol, max_iter, cache_mb)

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        binaries = list(pool.map(train_pair, pairs))

    return SvmModel(
        classes=classes,
        binaries=binaries,
        trained_dim=matrix.shape[1],
        C=C,
        gamma=gamma,
        scaler=scaler,
        descriptor=descriptor,
        pairs=pairs,
    )


def vote(
    decisions: NDArray[np.float64], pairs: Sequence[tuple[int, int]], n_classes: int
) -> NDArray[np.int64]:
    """Class index per row from pairwise decision values (rows x pairs)

    A positive value votes for the first class of the pair. Ties go to the
    larger summed |f| over won votes, then to the lower class index.
    """
    n = decisions.shape[0]
    votes = np.zeros((n, n_classes), dtype=np.int64)
    strength = np.zeros((n, n_classes))
    for col, (a, b) in enumerate(pairs):
        f = decisions[:, col]
        winner = np.where(f > 0, a, b)
        votes[np.arange(n), winner] += 1
        strength[np.arange(n), winner] += np.abs(f)

    result = np.empty(n, dtype=np.int64)
    for r in range(n):
        top = np.flatnonzero(votes[r] == votes[r].max())
        best = top[np.argmax(strength[r, top])]
        result[r] = int(best)
    return result


def decision_matrix(model: SvmModel, X: NDArray[np.float64]) -> NDArray[np.float64]:
    data = model.scaler.transform(X) if model.scaler is not None else X
    return np.column_stack([binary.decision_values(data) for binary in model.binaries])


def predict_batch(model: SvmModel, X: Sequence[Features] | NDArray[np.float64]) -> list[str]:
    matrix = _as_matrix(X)
    if matrix.shape[1] != model.trained_dim:
        raise DimensionMismatchError(
            f"model expects {model.trained_dim} features, got {matrix.shape[1]}"
        )
    if matrix.shape[0] == 0:
        return []
    winners = vote(decision_matrix(model, matrix), model.pairs, len(model.classes))
    return [model.classes[k] for k in winners]


def predict(model: SvmModel, x: Features) -> str:
    return predict_batch(model, [x])[0]


def _exponents(start: int, stop: int) -> tuple[float, ...]:
    return tuple(2.0**e for e in range(start, stop + 1, 2))


@dataclass(frozen=True)
class GridSpec:
    c_values: tuple[float, ...] = _exponents(-5, 15)
    gamma_values: tuple[float, ...] = _exponents(-15, 3)
    folds: int = 5

    def __post_init__(self) -> None:
        if not self.c_values or not self.gamma_values:
            raise ValueError("grid needs at least one C and one gamma value")
        if self.folds < 2:
            raise ValueError(f"grid search needs at least 2 folds, got {self.folds}")


class GridResult(NamedTuple):
    C: float
    gamma: float
    cv_accuracy: float


def stratified_folds(labels: Sequence[str], k: int, seed: int) -> NDArray[np.int64]:
    """Fold index per sample: each class is shuffled and dealt round-robin"""
    classes, encoded = _encode_labels(labels)
    rng = np.random.default_rng(seed)
    folds = np.empty(len(labels), dtype=np.int64)
    for c in range(len(classes)):
        members = rng.permutation(np.flatnonzero(encoded == c))
        folds[members] = np.arange(len(members)) % k
    return folds


def _check_grid_data(labels: Sequence[str], folds: int) -> None:
    classes, encoded = _encode_labels(labels)
    if len(classes) < 2:
        raise InsufficientDataError(f"grid search needs at least 2 classes, got {len(classes)}")
    if len(labels) < folds:
        raise InsufficientDataError(f"{len(labels)} samples cannot fill {folds} folds")
    counts = np.bincount(encoded, minlength=len(classes))
    thin = [classes[c] for c in range(len(classes)) if counts[c] < 2]
    if thin:
        raise InsufficientDataError(f"classes with fewer than 2 samples: {', '.join(thin)}")


@dataclass(frozen=True, eq=False)
class _Fold:
    train: NDArray[np.intp]
    test: NDArray[np.intp]
    train_distances: NDArray[np.float64]
    test_distances: NDArray[np.float64]


def _prepare_fold(
    matrix: NDArray[np.float64], train: NDArray[np.intp], test: NDArray[np.intp], scale: bool
) -> _Fold:
    a, b = matrix[train], matrix[test]
    if scale:
        scaler = FeatureScaler.fit(a)
        a, b = scaler.transform(a), scaler.transform(b)
    return _Fold(train, test, squared_distances(a, a), squared_distances(b, a))


def grid_scores(
    X: Sequence[Features] | NDArray[np.float64],
    labels: Sequence[str],
    grid: GridSpec,
    seed: int,
    *,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: int = DEFAULT_CACHE_MB,
    scale_features: bool = False,
    max_workers: int = 1,
) -> list[GridCell]:
    """Pooled stratified k-fold accuracy of every (C, gamma) cell, C-major"""
    matrix = _as_matrix(X)
    if matrix.shape[0] != len(labels):
        raise DimensionMismatchError(f"{matrix.shape[0]} samples but {len(labels)} labels")
    _check_grid_data(labels, grid.folds)
    classes, encoded = _encode_labels(labels)
    assignment = stratified_folds(labels, grid.folds, seed)
    pairs = list(combinations(range(len(classes)), 2))

    folds = [
        _prepare_fold(matrix, np.flatnonzero(assignment != f), np.flatnonzero(assignment == f), scale_features)
        for f in range(grid.folds)
    ]

    def score_cell(cell: tuple[float, float]) -> GridCell:
        C, gamma = cell
        correct = 0
        for fold in folds:
            y_train = encoded[fold.train]
            decisions = np.empty((len(fold.test), len(pairs)))
            for col, (a, b) in enumerate(pairs):
                index, y = _pair_problem(y_train, a, b)
                distances = fold.train_distances[np.ix_(index, index)]

                def compute_row(i: int, d: NDArray[np.float64] = distances) -> NDArray[np.float64]:
                    return np.exp(-gamma * d[i])

                solution = solve_smo(KernelCache(compute_row, len(index), cache_mb), y, C, tol, max_iter)
                sv = solution.alpha > 0
                K = np.exp(-gamma * fold.test_distances[:, index[sv]])
                decisions[:, col] = K @ (solution.alpha[sv] * y[sv]) - solution.rho
            predicted = vote(decisions, pairs, len(classes))
            correct += int(np.count_nonzero(predicted == encoded[fold.test]))
        return GridCell(C=C, gamma=gamma, cv_accuracy=correct / len(labels))

    cells = [(C, gamma) for C in grid.c_values for gamma in grid.gamma_values]
    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as pool:
        return list(pool.map(score_cell, cells))


def best_cell(cells: Sequence[GridCell]) -> GridResult:
    """Highest accuracy; ties go to smaller C, then smaller gamma"""
    best = min(cells, key=lambda c: (-c["cv_accuracy"], c["C"], c["gamma"]))
    return GridResult(C=best["C"], gamma=best["gamma"], cv_accuracy=best["cv_accuracy"])


def grid_search(
    X: Sequence[Features] | NDArray[np.float64],
    labels: Sequence[str],
    grid: GridSpec,
    seed: int,
    *,
    tol: float = DEFAULT_TOLERANCE,
    max_iter: int = DEFAULT_MAX_ITER,
    cache_mb: int = DEFAULT_CACHE_MB,
    scale_features: bool = False,
    max_workers: int = 1,
) -> GridResult:
    """Best (C, gamma) by stratified k-fold cross-validation"""
    cells = grid_scores(
        X,
        labels,
        grid,
        seed,
        tol=tol,
        max_iter=max_iter,
        cache_mb=cache_mb,
        scale_features=scale_features,
        max_workers=max_workers,
    )
    return best_cell(cells)

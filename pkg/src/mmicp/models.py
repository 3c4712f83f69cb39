"""Reference probabilistic classifiers, datasets and probability-matrix I/O.

The learners are intentionally small: a Laplace-smoothed k-nearest
neighbour vote and a multinomial logistic regression trained by full-batch
gradient descent. Both are deterministic given their spec.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

ROW_SUM_TOL = 1e-6


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        y = np.asarray(self.labels, dtype=np.int64)
        if X.ndim != 2:
            raise ValueError("features must be an (n, d) matrix")
        if y.shape != (X.shape[0],):
            raise ValueError(f"{X.shape[0]} feature rows but {y.size} labels")
        if self.class_count < 2:
            raise ValueError("need at least two classes")
        if y.size and (y.min() < 0 or y.max() >= self.class_count):
            raise ValueError("labels must lie in [0, class_count)")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)

    def __len__(self) -> int:
        return int(self.labels.size)

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.class_count)


def load_dataset_csv(path, class_count: int | None = None) -> Dataset:
    """Read ``f0..f{d-1},label`` with a header row."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: empty file")
        expected = [f"f{i}" for i in range(len(header) - 1)] + ["label"]
        if header != expected:
            raise ValueError(f"{path}: header must be {','.join(expected)}")
        rows = [r for r in reader if r]
    try:
        X = np.array([[float(v) for v in r[:-1]] for r in rows]).reshape(len(rows), len(header) - 1)
        y = np.array([int(r[-1]) for r in rows], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed row ({exc})") from None
    if any(len(r) != len(header) for r in rows):
        raise ValueError(f"{path}: ragged rows")
    K = class_count if class_count is not None else int(y.max()) + 1
    return Dataset(X, y, max(K, 2))


def save_dataset_csv(data: Dataset, path) -> None:
    d = data.features.shape[1]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"f{i}" for i in range(d)] + ["label"])
        for x, y in zip(data.features, data.labels):
            w.writerow([repr(float(v)) for v in x] + [int(y)])


def make_blobs(n: int, K: int = 10, d: int = 2, spread: float = 2.0, seed: int = 0, centers=None) -> Dataset:
    """Isotropic unit-variance Gaussian clusters, balanced over ``K`` classes.

    Cluster centres are ``N(0, spread^2 I)`` draws unless given.
    """
    rng = np.random.default_rng(seed)
    if centers is None:
        centers = rng.normal(scale=spread, size=(K, d))
    centers = np.asarray(centers, dtype=float)
    y = np.arange(n) % K
    rng.shuffle(y)
    X = centers[y] + rng.normal(size=(n, centers.shape[1]))
    return Dataset(X, y, K)


class LearnerKind(str, enum.Enum):
    KNN = "KNN"
    SOFTMAX_LINEAR = "SOFTMAX_LINEAR"


@dataclass(frozen=True)
class LearnerSpec:
    kind: LearnerKind = LearnerKind.SOFTMAX_LINEAR
    k: int = 10
    learning_rate: float = 0.5
    epochs: int = 200
    l2: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", LearnerKind(self.kind))
        if self.k < 1 or self.epochs < 0 or self.learning_rate <= 0 or self.l2 < 0:
            raise ValueError(f"invalid learner hyperparameters: {self}")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


class NotFittedError(RuntimeError):
    pass


class KNNLearner:
    """Neighbour vote with Laplace smoothing: ``(count_c + 1) / (k + K)``."""

    def __init__(self, spec: LearnerSpec):
        self.spec = spec
        self._X = None

    def fit(self, train: Dataset) -> "KNNLearner":
        if len(train) == 0:
            raise ValueError("empty training set")
        self._X = train.features.copy()
        self._y = train.labels.copy()
        self.class_count = train.class_count
        return self

    def predict_proba(self, X) -> np.ndarray:
        if self._X is None:
            raise NotFittedError("fit the learner first")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self._X.shape[1]:
            raise ValueError("dimension mismatch")
        k = min(self.spec.k, len(self._y))
        d2 = (
            np.sum(X**2, axis=1)[:, None]
            - 2.0 * X @ self._X.T
            + np.sum(self._X**2, axis=1)[None, :]
        )
        # stable sort: equidistant neighbours resolved by training index
        nn = np.argsort(d2, axis=1, kind="stable")[:, :k]
        K = self.class_count
        counts = np.zeros((X.shape[0], K))
        np.add.at(counts, (np.repeat(np.arange(X.shape[0]), k), self._y[nn].ravel()), 1.0)
        return (counts + 1.0) / (k + K)


class SoftmaxLearner:
    """Multinomial logistic regression on standardised features.

    Weights start at zero and follow full-batch gradient descent on the
    mean cross-entropy plus ``l2/2 * ||W||^2``; with zero starting weights
    the result does not depend on any random state.
    """

    def __init__(self, spec: LearnerSpec):
        self.spec = spec
        self.W = None

    def fit(self, train: Dataset) -> "SoftmaxLearner":
        if len(train) == 0:
            raise ValueError("empty training set")
        X = train.features
        self.mu = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd = np.where(sd > 0, sd, 1.0)
        Z = self._design(X)
        n, K = len(train), train.class_count
        Y = np.zeros((n, K))
        Y[np.arange(n), train.labels] = 1.0
        W = np.zeros((Z.shape[1], K))
        lr, l2 = self.spec.learning_rate, self.spec.l2
        for _ in range(self.spec.epochs):
            G = Z.T @ (_softmax(Z @ W) - Y) / n
            G[:-1] += l2 * W[:-1]
            W -= lr * G
        self.W = W
        self.class_count = K
        return self

    def _design(self, X) -> np.ndarray:
        Z = (X - self.mu) / self.sd
        return np.hstack([Z, np.ones((Z.shape[0], 1))])

    def predict_proba(self, X) -> np.ndarray:
        if self.W is None:
            raise NotFittedError("fit the learner first")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.mu.size:
            raise ValueError("dimension mismatch")
        return _softmax(self._design(X) @ self.W)


def _softmax(A: np.ndarray) -> np.ndarray:
    A = A - A.max(axis=1, keepdims=True)
    E = np.exp(A)
    return E / E.sum(axis=1, keepdims=True)


def make_learner(spec: LearnerSpec):
    if spec.kind is LearnerKind.KNN:
        return KNNLearner(spec)
    return SoftmaxLearner(spec)


def fit(spec: LearnerSpec, train: Dataset):
    return make_learner(spec).fit(train)


def predict_proba(learner, x) -> np.ndarray:
    return learner.predict_proba(x)


def load_proba_matrix(path, labels_path=None) -> tuple[np.ndarray, np.ndarray | None]:
    """Load an ``n x K`` probability CSV (no header) and optional labels.

    Rows within ``1e-6`` of summing to one are renormalised; anything
    further off is rejected. The labels file holds one integer per line.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows:
        raise ValueError(f"{path}: no rows")
    if len({len(r) for r in rows}) != 1:
        raise ValueError(f"{path}: ragged rows")
    try:
        P = np.array([[float(v) for v in r] for r in rows])
    except ValueError as exc:
        raise ValueError(f"{path}: malformed value ({exc})") from None
    if P.shape[1] < 2:
        raise ValueError(f"{path}: need at least two columns")
    if np.any(P < 0) or not np.all(np.isfinite(P)):
        raise ValueError(f"{path}: probabilities must be finite and non-negative")
    sums = P.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)
    if bad.size:
        raise ValueError(f"{path}: row {bad[0]} sums to {sums[bad[0]]!r}")
    P = P / sums[:, None]
    labels = None
    if labels_path is not None:
        labels = load_labels(labels_path)
        if labels.size != P.shape[0]:
            raise ValueError(f"{labels.size} labels for {P.shape[0]} probability rows")
        if labels.min() < 0 or labels.max() >= P.shape[1]:
            raise ValueError("labels out of range for the probability columns")
    return P, labels


def load_labels(path) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    try:
        return np.array([int(v) for v in lines], dtype=np.int64)
    except ValueError as exc:
        raise ValueError(f"{path}: malformed label ({exc})") from None


def save_proba_matrix(P, path, labels=None, labels_path=None) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(P):
            w.writerow([repr(float(v)) for v in row])
    if labels is not None and labels_path is not None:
        Path(labels_path).write_text("".join(f"{int(v)}\n" for v in labels))

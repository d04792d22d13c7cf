"""Soft-margin linear SVM (Pegasos), k-fold cross-validation and invariant export."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Iterator, NamedTuple, Sequence

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - pure-Python fallback, same arithmetic
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

__all__ = [
    "LearnerError",
    "FeatureVector",
    "Dataset",
    "Scaler",
    "Hyperparams",
    "LinearModel",
    "LinearInvariant",
    "CvReport",
    "feature_names",
    "standardize",
    "train_svm",
    "objective",
    "classify",
    "predict",
    "make_folds",
    "cross_validate",
    "extract_invariant",
]


class LearnerError(ValueError):
    pass


class FeatureVector(NamedTuple):
    values: tuple[float, ...]
    label: int


def feature_names(n_tanks: int = 5) -> tuple[str, ...]:
    return tuple(f"v{i}" for i in range(1, n_tanks + 1)) + tuple(f"v{i}'" for i in range(1, n_tanks + 1))


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...] = field(default_factory=feature_names)

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        if self.X.ndim != 2 or self.X.shape[0] != self.y.shape[0]:
            raise LearnerError("X must be (n, d) with one label per row")
        if self.X.shape[1] != len(self.names):
            raise LearnerError(f"expected {len(self.names)} features, got {self.X.shape[1]}")
        if not np.all(np.isin(self.y, (-1, 1))):
            raise LearnerError("labels must be +1 or -1")

    def __len__(self) -> int:
        return self.X.shape[0]

    def __iter__(self) -> Iterator[FeatureVector]:
        for row, label in zip(self.X, self.y):
            yield FeatureVector(tuple(float(v) for v in row), int(label))

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.names)

    @classmethod
    def concat(cls, parts: Sequence["Dataset"]) -> "Dataset":
        if not parts:
            raise LearnerError("no data")
        return cls(np.vstack([p.X for p in parts]), np.concatenate([p.y for p in parts]), parts[0].names)

    def class_counts(self) -> dict[str, int]:
        return {"positive": int(np.sum(self.y == 1)), "negative": int(np.sum(self.y == -1))}

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.X).tobytes())
        h.update(np.ascontiguousarray(self.y).tobytes())
        return h.hexdigest()[:16]


@dataclass(frozen=True)
class Scaler:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        return (X - np.asarray(self.mean)) / np.asarray(self.std)


def standardize(d: Dataset) -> tuple[Dataset, Scaler]:
    """Z-score every feature with population statistics of ``d``."""
    mean = d.X.mean(axis=0)
    std = d.X.std(axis=0)
    bad = [name for name, s in zip(d.names, std) if not s > 0]
    if bad:
        raise LearnerError(f"zero-variance feature(s): {', '.join(bad)}")
    scaler = Scaler(tuple(float(m) for m in mean), tuple(float(s) for s in std))
    return Dataset(scaler.transform(d.X), d.y.copy(), d.names), scaler


@dataclass(frozen=True)
class Hyperparams:
    lam: float = 1e-4
    epochs: int = 50


@dataclass(frozen=True)
class LinearModel:
    w: tuple[float, ...]
    b: float
    hp: Hyperparams = Hyperparams()
    seed: int = 0

    def decision(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ np.asarray(self.w) + self.b


@njit(cache=True)
def _pegasos_epoch(X, y, order, w, wb, t, lam, radius, acc, accumulate):
    # wb = [b]; acc = [sum_w..., sum_b, count]
    d = X.shape[1]
    b = wb[0]
    for idx in order:
        t += 1
        eta = 1.0 / (lam * t)
        margin = b
        for j in range(d):
            margin += w[j] * X[idx, j]
        margin *= y[idx]
        shrink = 1.0 - eta * lam
        for j in range(d):
            w[j] *= shrink
        if margin < 1.0:
            for j in range(d):
                w[j] += eta * y[idx] * X[idx, j]
            b += eta * y[idx]
        norm = 0.0
        for j in range(d):
            norm += w[j] * w[j]
        norm = math.sqrt(norm)
        if norm > radius:
            for j in range(d):
                w[j] *= radius / norm
        if accumulate:
            for j in range(d):
                acc[j] += w[j]
            acc[d] += b
            acc[d + 1] += 1.0
    wb[0] = b
    return t


def train_svm(d: Dataset, hp: Hyperparams = Hyperparams(), seed: int = 0) -> LinearModel:
    """Minimise ``lam/2 |w|^2 + mean(hinge)`` by stochastic subgradient descent.

    One sample per step with step size ``1/(lam t)`` and projection onto the
    ball of radius ``1/sqrt(lam)``; the bias is an extra coordinate that is
    neither regularised nor projected.  Each epoch visits the data in a fresh
    seeded permutation.  The returned weights are the average of the iterates
    over the second half of the epochs, which tames the late jitter of the
    unregularised bias.
    """
    counts = d.class_counts()
    if counts["positive"] == 0 or counts["negative"] == 0:
        raise LearnerError("training needs both classes (single-class dataset)")
    if hp.lam <= 0 or hp.epochs < 1:
        raise LearnerError("lam must be > 0 and epochs >= 1")
    X = np.ascontiguousarray(d.X, dtype=np.float64)
    y = np.ascontiguousarray(d.y, dtype=np.float64)
    n, dim = X.shape
    rng = np.random.default_rng(seed)
    w = np.zeros(dim)
    wb = np.zeros(1)
    acc = np.zeros(dim + 2)
    radius = 1.0 / math.sqrt(hp.lam)
    first_avg = hp.epochs // 2
    t = 0
    for epoch in range(hp.epochs):
        order = rng.permutation(n)
        t = _pegasos_epoch(X, y, order, w, wb, t, hp.lam, radius, acc, epoch >= first_avg)
    count = acc[dim + 1]
    w_avg = acc[:dim] / count
    b_avg = acc[dim] / count
    if not np.all(np.isfinite(w_avg)) or not math.isfinite(b_avg):
        raise LearnerError("training diverged")
    return LinearModel(tuple(float(v) for v in w_avg), float(b_avg), hp, seed)


def objective(m: LinearModel, d: Dataset) -> float:
    margins = d.y * m.decision(d.X)
    w = np.asarray(m.w)
    return float(0.5 * m.hp.lam * w @ w + np.maximum(0.0, 1.0 - margins).mean())


def classify(m: LinearModel, x) -> int:
    """Label of one standardized vector; points on the hyperplane are +1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (len(m.w),):
        raise LearnerError(f"dimension mismatch: model has {len(m.w)} features, got shape {x.shape}")
    return 1 if float(x @ np.asarray(m.w)) + m.b >= 0 else -1


def predict(m: LinearModel, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(m.w):
        raise LearnerError("dimension mismatch")
    return np.where(m.decision(X) >= 0, 1, -1)


def make_folds(n: int, k: int, seed: int) -> list[np.ndarray]:
    if k < 2:
        raise LearnerError("k must be >= 2")
    if k > n:
        raise LearnerError(f"k exceeds dataset size ({k} > {n})")
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, k)]


@dataclass
class CvReport:
    k: int
    fold_accuracy: list[float]
    fold_sizes: list[int]
    confusion: dict[str, int]
    class_counts: dict[str, int]

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracy))

    @property
    def positive_accuracy(self) -> float:
        c = self.confusion
        total = c["tp"] + c["fn"]
        return c["tp"] / total if total else float("nan")

    def to_dict(self) -> dict:
        doc = asdict(self)
        doc["mean_accuracy"] = self.mean_accuracy
        return doc


def cross_validate(d: Dataset, k: int = 5, hp: Hyperparams = Hyperparams(), seed: int = 0) -> CvReport:
    """Seeded k-fold CV; scaler and model are refit on each training split."""
    folds = make_folds(len(d), k, seed)
    confusion = {"tp": 0, "fn": 0, "fp": 0, "tn": 0}
    accs, sizes = [], []
    for i, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != i])
        train_std, scaler = standardize(d.subset(train_idx))
        model = train_svm(train_std, hp, seed + i)
        test = d.subset(test_idx)
        pred = predict(model, scaler.transform(test.X))
        accs.append(float(np.mean(pred == test.y)))
        sizes.append(int(len(test_idx)))
        confusion["tp"] += int(np.sum((pred == 1) & (test.y == 1)))
        confusion["fn"] += int(np.sum((pred == -1) & (test.y == 1)))
        confusion["fp"] += int(np.sum((pred == 1) & (test.y == -1)))
        confusion["tn"] += int(np.sum((pred == -1) & (test.y == -1)))
    return CvReport(k, accs, sizes, confusion, d.class_counts())


def _term(coef: float, name: str, first: bool) -> str:
    mag = f"{abs(coef):.3f}{name}"
    if first:
        return f"-{mag}" if coef < 0 else mag
    return f" - {mag}" if coef < 0 else f" + {mag}"


@dataclass(frozen=True)
class LinearInvariant:
    """``sum(a_i * x_i) < c`` over raw features; holds on the positive class.

    A point exactly on the boundary counts as satisfied, matching the
    classifier's tie rule.
    """

    coefficients: tuple[float, ...]
    threshold: float
    names: tuple[str, ...]

    def lhs(self, X) -> np.ndarray:
        return np.asarray(X, dtype=np.float64) @ np.asarray(self.coefficients)

    def satisfied(self, x) -> bool:
        return bool(float(np.dot(np.asarray(x, dtype=np.float64), self.coefficients)) <= self.threshold)

    def satisfied_many(self, X) -> np.ndarray:
        return self.lhs(X) <= self.threshold

    def negated(self) -> "LinearInvariant":
        """The complementary half-space (up to the boundary itself)."""
        return LinearInvariant(tuple(-a for a in self.coefficients), -self.threshold, self.names)

    def render(self) -> str:
        terms = "".join(_term(a, n, i == 0) for i, (a, n) in enumerate(zip(self.coefficients, self.names)))
        return f"{terms} < {self.threshold:.3f}"

    def digest(self) -> str:
        doc = json.dumps({"a": self.coefficients, "c": self.threshold, "names": self.names})
        return hashlib.sha256(doc.encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return {"coefficients": list(self.coefficients), "threshold": self.threshold, "names": list(self.names)}

    @classmethod
    def from_dict(cls, doc) -> "LinearInvariant":
        return cls(tuple(float(a) for a in doc["coefficients"]), float(doc["threshold"]), tuple(doc["names"]))


def extract_invariant(m: LinearModel, s: Scaler, names: Sequence[str] | None = None) -> LinearInvariant:
    """Fold the scaler into the hyperplane and orient it as ``a . x <= c``.

    The model predicts +1 iff ``sum(w_i (x_i - mu_i) / sd_i) + b >= 0``, i.e.
    iff ``sum(-w_i / sd_i * x_i) <= b - sum(w_i mu_i / sd_i)``.
    """
    if not (len(m.w) == len(s.mean) == len(s.std)):
        raise LearnerError("model and scaler dimensions differ")
    names = tuple(names) if names is not None else feature_names(len(m.w) // 2)
    w, mu, sd = (np.asarray(v, dtype=np.float64) for v in (m.w, s.mean, s.std))
    a = -w / sd
    c = m.b - float(np.sum(w * mu / sd))
    return LinearInvariant(tuple(float(v) for v in a), float(c), names)


def model_document(m: LinearModel, s: Scaler, inv: LinearInvariant, dataset_hash: str, **extra) -> dict:
    doc = {
        "invariant": inv.to_dict(),
        "rendered": inv.render(),
        "standardized": {"w": list(m.w), "b": m.b},
        "scaler": {"mean": list(s.mean), "std": list(s.std)},
        "hyperparameters": {"lam": m.hp.lam, "epochs": m.hp.epochs, "seed": m.seed},
        "dataset_hash": dataset_hash,
    }
    doc.update(extra)
    return doc


def load_model_document(doc) -> tuple[LinearModel, Scaler, LinearInvariant]:
    hp = Hyperparams(float(doc["hyperparameters"]["lam"]), int(doc["hyperparameters"]["epochs"]))
    m = LinearModel(tuple(doc["standardized"]["w"]), float(doc["standardized"]["b"]), hp,
                    int(doc["hyperparameters"]["seed"]))
    s = Scaler(tuple(doc["scaler"]["mean"]), tuple(doc["scaler"]["std"]))
    return m, s, LinearInvariant.from_dict(doc["invariant"])

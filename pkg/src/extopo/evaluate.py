"""Cross-validated evaluation of feature tables.

A deterministic stand-in for heavier model selection: stratified folds,
per-fold standardization fitted on the training split only, and a
multinomial logistic regression trained by plain gradient descent.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["ClassifyReport", "stratified_folds", "softmax_regression", "classify_features"]


@dataclass(frozen=True)
class ClassifyReport:
    fold_accuracies: tuple[float, ...]
    mean: float
    std: float


def stratified_folds(labels: np.ndarray, n_folds: int, seed: int = 0) -> list[np.ndarray]:
    """Deal each class round-robin into ``n_folds`` test folds.

    If some training split would see a single class, reshuffle with a
    warning (new sub-seed) until every split is trainable.
    """
    labels = np.asarray(labels, dtype=np.int64)
    if n_folds < 2:
        raise ValueError("n_folds must be at least 2")
    if n_folds > labels.size:
        raise ValueError("more folds than samples")
    if np.unique(labels).size < 2:
        raise ValueError("need at least two classes")
    for attempt in range(64):
        rng = np.random.default_rng((seed, attempt))
        folds: list[list[int]] = [[] for _ in range(n_folds)]
        slot = 0
        for cls in np.unique(labels):
            members = np.flatnonzero(labels == cls)
            rng.shuffle(members)
            for idx in members:
                folds[slot % n_folds].append(int(idx))
                slot += 1
        arrays = [np.sort(np.array(f, dtype=np.int64)) for f in folds]
        if all(f.size for f in arrays) and all(
            np.unique(np.delete(labels, f)).size >= 2 for f in arrays
        ):
            return arrays
        warnings.warn("single-class training split, reshuffling folds", stacklevel=2)
    raise ValueError("could not build trainable stratified folds")


def softmax_regression(
    X: np.ndarray,
    y: np.ndarray,
    n_classes: int,
    *,
    step: float = 0.5,
    iters: int = 500,
    l2: float = 1e-4,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient-descent fit of W (d, C) and intercept b (C,).

    The objective is convex, so the zero start makes the whole fit
    deterministic without a seed.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    n, d = X.shape
    W = np.zeros((d, n_classes))
    b = np.zeros(n_classes)
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), y] = 1.0
    for _ in range(iters):
        logits = X @ W + b
        logits -= logits.max(axis=1, keepdims=True)
        p = np.exp(logits)
        p /= p.sum(axis=1, keepdims=True)
        g = (p - onehot) / n
        W -= step * (X.T @ g + l2 * W)
        b -= step * g.sum(axis=0)
    return W, b


def _standardize(train: np.ndarray, test: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = train.mean(axis=0)
    scale = train.std(axis=0)
    scale[scale == 0.0] = 1.0
    return (train - mean) / scale, (test - mean) / scale


def classify_features(
    X: np.ndarray,
    y: np.ndarray,
    n_folds: int = 10,
    seed: int = 0,
    *,
    step: float = 0.5,
    iters: int = 500,
    l2: float = 1e-4,
) -> ClassifyReport:
    """Stratified k-fold accuracy of the gradient-descent classifier."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    classes = np.unique(y)
    remap = {int(c): i for i, c in enumerate(classes)}
    y_mapped = np.array([remap[int(v)] for v in y], dtype=np.int64)
    accs = []
    for test_idx in stratified_folds(y_mapped, n_folds, seed):
        train_mask = np.ones(y_mapped.size, dtype=bool)
        train_mask[test_idx] = False
        X_tr, X_te = _standardize(X[train_mask], X[test_idx])
        W, b = softmax_regression(
            X_tr, y_mapped[train_mask], classes.size, step=step, iters=iters, l2=l2
        )
        pred = np.argmax(X_te @ W + b, axis=1)
        accs.append(float(np.mean(pred == y_mapped[test_idx])))
    arr = np.array(accs)
    return ClassifyReport(tuple(accs), float(arr.mean()), float(arr.std()))

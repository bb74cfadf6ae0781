"""L2-regularised logistic regression fitted by full-batch gradient descent."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import expit


@dataclass(frozen=True)
class Hyperparams:
    l2: float = 1e-3
    learning_rate: Optional[float] = None  # None: 1/L for the standardised data
    epochs: int = 20000
    tol: float = 1e-7
    standardize: bool = True


@dataclass
class LogisticModel:
    weights: np.ndarray
    bias: float
    mean: np.ndarray
    scale: np.ndarray
    epochs_run: int = 0

    def decision(self, X) -> np.ndarray:
        Z = (np.asarray(X, dtype=float) - self.mean) / self.scale
        return Z @ self.weights + self.bias

    def predict_proba(self, X) -> np.ndarray:
        return expit(self.decision(X))


def loss_and_grad(w, b, Z, y, l2):
    """Mean log-loss plus ``l2/2 * |w|^2`` (bias unpenalised) and its gradient."""
    z = Z @ w + b
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * (w @ w)
    r = expit(z) - y
    gw = Z.T @ r / len(y) + l2 * w
    gb = r.mean()
    return float(loss), gw, float(gb)


def train_logistic(X, y, hp: Hyperparams = Hyperparams()) -> LogisticModel:
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ValueError("X must be 2-D with one row per label")
    if np.unique(y).size < 2:
        raise ValueError("training data must contain both classes")
    if hp.standardize:
        mean = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
    else:
        mean = np.zeros(X.shape[1])
        scale = np.ones(X.shape[1])
    Z = (X - mean) / scale
    lr = hp.learning_rate
    if lr is None:
        # gradient Lipschitz bound of the mean log-loss on [Z, 1]
        Z1 = np.hstack([Z, np.ones((len(Z), 1))])
        lr = 1.0 / (0.25 * np.linalg.eigvalsh(Z1.T @ Z1 / len(Z1))[-1] + hp.l2)
    w = np.zeros(X.shape[1])
    b = 0.0
    epoch = 0
    for epoch in range(1, hp.epochs + 1):
        _, gw, gb = loss_and_grad(w, b, Z, y, hp.l2)
        if max(np.abs(gw).max(initial=0.0), abs(gb)) < hp.tol:
            break
        w = w - lr * gw
        b = b - lr * gb
    return LogisticModel(w, b, mean, scale, epoch)

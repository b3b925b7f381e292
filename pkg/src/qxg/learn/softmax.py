"""Multinomial logistic regression over the five ego actions."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..actions import ActionLabel

CLASSES = list(ActionLabel)


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def loss_and_grad(W: np.ndarray, b: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float):
    """Mean cross-entropy plus (l2/2)*||W||^2 and its gradient w.r.t. (W, b)."""
    n = len(X)
    P = _softmax(X @ W.T + b)
    loss = -np.log(P[np.arange(n), y] + 1e-300).mean() + 0.5 * l2 * float((W * W).sum())
    G = P
    G[np.arange(n), y] -= 1.0
    G /= n
    return loss, G.T @ X + l2 * W, G.sum(axis=0)


@dataclass
class SoftmaxModel:
    W: np.ndarray
    b: np.ndarray
    learning_rate: float
    epochs: int
    l2: float
    seed: int

    kind = "softmax"

    @property
    def n_features(self) -> int:
        return self.W.shape[1]

    def proba(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return _softmax(X @ self.W.T + self.b)

    def predict(self, X) -> list[ActionLabel]:
        return [CLASSES[i] for i in self.proba(X).argmax(axis=1)]

    def to_dict(self) -> dict:
        return {"W": self.W.tolist(), "b": self.b.tolist(), "learning_rate": self.learning_rate,
                "epochs": self.epochs, "l2": self.l2, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "SoftmaxModel":
        return cls(np.array(d["W"], dtype=np.float64), np.array(d["b"], dtype=np.float64),
                   float(d["learning_rate"]), int(d["epochs"]), float(d["l2"]), int(d["seed"]))


def train_multiclass(X, labels, *, learning_rate: float = 0.5, epochs: int = 500,
                     l2: float = 1e-4, seed: int = 0) -> SoftmaxModel:
    """Full-batch gradient descent from zero weights.

    Zero initialisation makes the result independent of ``seed``; it is kept
    on the model for provenance.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.array([CLASSES.index(ActionLabel(lab)) for lab in labels], dtype=np.int64)
    if len(X) != len(y) or len(X) == 0:
        raise ValueError("need a non-empty feature matrix with one label per row")
    if len(set(y.tolist())) < 2:
        raise ValueError("multi-class training needs at least two distinct actions")
    W = np.zeros((len(CLASSES), X.shape[1]))
    b = np.zeros(len(CLASSES))
    for _ in range(epochs):
        _, gW, gb = loss_and_grad(W, b, X, y, l2)
        W -= learning_rate * gW
        b -= learning_rate * gb
    return SoftmaxModel(W, b, learning_rate, epochs, l2, seed)

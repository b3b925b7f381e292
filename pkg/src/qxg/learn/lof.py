"""Local outlier factor, brute-force Euclidean neighbours."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# keeps densities finite when many training points coincide
_DENSITY_EPS = 1e-10
_CHUNK = 512


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = (A * A).sum(1)[:, None] - 2.0 * A @ B.T + (B * B).sum(1)[None, :]
    np.maximum(d, 0.0, out=d)
    return d


def _kneighbors(Q: np.ndarray, X: np.ndarray, k: int, exclude_self: bool):
    """Indices and distances of the k nearest training rows, nearest first."""
    idx_out = np.empty((len(Q), k), dtype=np.int64)
    dist_out = np.empty((len(Q), k))
    for start in range(0, len(Q), _CHUNK):
        d = _sq_dists(Q[start:start + _CHUNK], X)
        if exclude_self:
            rows = np.arange(len(d))
            d[rows, start + rows] = np.inf
        order = np.argsort(d, axis=1, kind="stable")[:, :k]
        idx_out[start:start + len(d)] = order
        dist_out[start:start + len(d)] = np.sqrt(np.take_along_axis(d, order, axis=1))
    return idx_out, dist_out


@dataclass
class LofModel:
    X: np.ndarray
    k: int
    k_distance: np.ndarray
    lrd: np.ndarray
    train_lof: np.ndarray

    kind = "lof"

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    def score(self, Q) -> np.ndarray:
        """LOF of query points against the training set; ~1 for inliers, larger for outliers."""
        Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
        if Q.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {Q.shape[1]}")
        idx, dist = _kneighbors(Q, self.X, self.k, exclude_self=False)
        reach = np.maximum(self.k_distance[idx], dist)
        lrd_q = 1.0 / (reach.mean(axis=1) + _DENSITY_EPS)
        return self.lrd[idx].mean(axis=1) / lrd_q

    def training_scores(self, X=None) -> np.ndarray:
        return self.train_lof.copy()

    def to_dict(self) -> dict:
        return {"k": self.k, "X": self.X.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LofModel":
        return train_lof(np.array(d["X"], dtype=np.float64), int(d["k"]))


def train_lof(data, k: int = 20) -> LofModel:
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("LOF needs a non-empty 2-D data matrix")
    if not 1 <= k < len(X):
        raise ValueError(f"k must satisfy 1 <= k < {len(X)}, got {k}")
    idx, dist = _kneighbors(X, X, k, exclude_self=True)
    k_distance = dist[:, -1].copy()
    reach = np.maximum(k_distance[idx], dist)
    lrd = 1.0 / (reach.mean(axis=1) + _DENSITY_EPS)
    train_lof = lrd[idx].mean(axis=1) / lrd
    return LofModel(X, k, k_distance, lrd, train_lof)

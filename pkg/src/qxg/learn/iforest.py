"""Isolation forest on dense feature matrices."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

EULER_GAMMA = 0.5772156649


def average_path_length(n) -> np.ndarray | float:
    """Expected path length of an unsuccessful BST search among ``n`` points.

    c(1) = 0, c(2) = 1, c(n) = 2(ln(n-1) + gamma) - 2(n-1)/n otherwise.
    """
    arr = np.asarray(n, dtype=np.float64)
    out = np.zeros_like(arr)
    out[arr == 2] = 1.0
    big = arr > 2
    m = arr[big]
    out[big] = 2.0 * (np.log(m - 1.0) + EULER_GAMMA) - 2.0 * (m - 1.0) / m
    return float(out) if out.ndim == 0 else out


@dataclass
class IsolationTree:
    # parallel node arrays; feature == -1 marks an external node
    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    size: np.ndarray
    depth: np.ndarray

    @property
    def height(self) -> int:
        return int(self.depth.max())

    def path_lengths(self, X: np.ndarray) -> np.ndarray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.arange(len(X))
        for _ in range(self.height + 1):
            feat = self.feature[node]
            internal = feat >= 0
            if not internal.any():
                break
            go_left = X[rows, np.where(internal, feat, 0)] < self.threshold[node]
            node = np.where(internal, np.where(go_left, self.left[node], self.right[node]), node)
        return self.depth[node] + average_path_length(self.size[node])

    def to_list(self) -> list:
        return [[int(f), float(t), int(l), int(r), int(s)]
                for f, t, l, r, s in zip(self.feature, self.threshold, self.left,
                                         self.right, self.size)]

    @classmethod
    def from_list(cls, nodes: list) -> "IsolationTree":
        feature = np.array([n[0] for n in nodes], dtype=np.int64)
        left = np.array([n[2] for n in nodes], dtype=np.int64)
        right = np.array([n[3] for n in nodes], dtype=np.int64)
        depth = np.zeros(len(nodes), dtype=np.int64)
        for i in range(len(nodes)):
            if feature[i] >= 0:
                depth[left[i]] = depth[i] + 1
                depth[right[i]] = depth[i] + 1
        return cls(feature, np.array([n[1] for n in nodes], dtype=np.float64), left, right,
                   np.array([n[4] for n in nodes], dtype=np.int64), depth)


def _grow_tree(X: np.ndarray, height_limit: int, rng: np.random.Generator) -> IsolationTree:
    feature, threshold, left, right, size, depth = [], [], [], [], [], []

    def new_node(d):
        for lst, v in ((feature, -1), (threshold, 0.0), (left, -1), (right, -1), (size, 0),
                       (depth, d)):
            lst.append(v)
        return len(feature) - 1

    stack = [(new_node(0), np.arange(len(X)))]
    while stack:
        node, idx = stack.pop()
        d = depth[node]
        size[node] = len(idx)
        if d >= height_limit or len(idx) <= 1:
            continue
        sub = X[idx]
        lo, hi = sub.min(axis=0), sub.max(axis=0)
        candidates = np.flatnonzero(hi > lo)
        if len(candidates) == 0:
            continue
        f = int(candidates[rng.integers(len(candidates))])
        split = rng.uniform(lo[f], hi[f])
        while split <= lo[f]:
            split = rng.uniform(lo[f], hi[f])
        mask = sub[:, f] < split
        feature[node], threshold[node] = f, float(split)
        left[node], right[node] = new_node(d + 1), new_node(d + 1)
        # right pushed first so the left subtree is numbered first
        stack.append((right[node], idx[~mask]))
        stack.append((left[node], idx[mask]))
    return IsolationTree(np.array(feature, dtype=np.int64), np.array(threshold, dtype=np.float64),
                         np.array(left, dtype=np.int64), np.array(right, dtype=np.int64),
                         np.array(size, dtype=np.int64), np.array(depth, dtype=np.int64))


@dataclass
class IsolationForest:
    trees: list[IsolationTree]
    subsample: int
    seed: int
    n_features: int
    params: dict = field(default_factory=dict)

    kind = "iforest"

    def expected_path_length(self, X) -> np.ndarray:
        X = self._check(X)
        total = np.zeros(len(X))
        for tree in self.trees:
            total += tree.path_lengths(X)
        return total / len(self.trees)

    def score(self, X) -> np.ndarray:
        """Anomaly score 2^(-E[h(x)] / c(psi)); higher is more anomalous."""
        h = self.expected_path_length(X)
        c = average_path_length(self.subsample)
        if c == 0:
            return np.full(len(h), 0.5)
        return np.power(2.0, -h / c)

    def training_scores(self, X) -> np.ndarray:
        return self.score(X)

    def _check(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def to_dict(self) -> dict:
        return {"subsample": self.subsample, "seed": self.seed, "n_features": self.n_features,
                "trees": [t.to_list() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "IsolationForest":
        return cls([IsolationTree.from_list(t) for t in d["trees"]], int(d["subsample"]),
                   int(d["seed"]), int(d["n_features"]))


def train_iforest(data, n_trees: int = 100, subsample: int = 256, seed: int = 0) -> IsolationForest:
    """Grow ``n_trees`` isolation trees on seeded subsamples of ``data``.

    The subsample size is capped at the number of rows and the tree height at
    ceil(log2(subsample)).
    """
    X = np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or len(X) == 0:
        raise ValueError("isolation forest needs a non-empty 2-D data matrix")
    if n_trees < 1:
        raise ValueError("n_trees must be >= 1")
    if subsample < 2:
        raise ValueError("subsample must be >= 2")
    psi = min(subsample, len(X))
    height_limit = math.ceil(math.log2(psi)) if psi > 1 else 0
    rng = np.random.default_rng(seed)
    trees = []
    for _ in range(n_trees):
        idx = np.sort(rng.choice(len(X), size=psi, replace=False))
        trees.append(_grow_tree(X[idx], height_limit, rng))
    return IsolationForest(trees, psi, seed, X.shape[1])

"""Random forest on Gini-split decision trees.

Per tree: a bootstrap resample, sqrt(d) candidate features drawn fresh at
every node, and greedy splitting until purity or the depth/leaf limits. The
per-node split search runs through `debias_clr._kernels.best_split`, which
is the compiled hot path (with a pure-numpy fallback chosen at import).
Each tree derives its own child stream, so growing order cannot change
results. Ties everywhere break toward the lower index or label.
"""

from __future__ import annotations

import math

import numpy as np

from .._kernels import best_split
from ..numerics import RandomStream

__all__ = ["DecisionTree", "RandomForest"]


class DecisionTree:
    """Array-backed binary tree; label -1 marks internal nodes."""

    def __init__(self, min_samples_leaf: int = 1, max_depth: int | None = None,
                 split_fn=None):
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth
        self.split_fn = split_fn or best_split

    def fit(self, X: np.ndarray, y: np.ndarray, stream: RandomStream,
            max_features: int | None = None) -> "DecisionTree":
        n, d = X.shape
        if max_features is None:
            max_features = d
        feature, threshold, left, right, label = [], [], [], [], []

        def new_node() -> int:
            feature.append(-1)
            threshold.append(0.0)
            left.append(-1)
            right.append(-1)
            label.append(-1)
            return len(feature) - 1

        def majority(idx: np.ndarray) -> int:
            ones = int(y[idx].sum())
            zeros = len(idx) - ones
            return 1 if ones > zeros else 0  # tie -> lower label

        root = new_node()
        stack = [(root, np.arange(n), 0)]
        while stack:
            node, idx, depth = stack.pop()
            ones = int(y[idx].sum())
            pure = ones == 0 or ones == len(idx)
            depth_capped = self.max_depth is not None and depth >= self.max_depth
            if pure or depth_capped or len(idx) < 2 * self.min_samples_leaf:
                label[node] = majority(idx)
                continue
            cand = np.sort(stream.choice_without_replacement(d, max_features))
            block = np.ascontiguousarray(X[np.ix_(idx, cand)])
            f_local, thr, gain = self.split_fn(block, np.ascontiguousarray(y[idx]),
                                               self.min_samples_leaf)
            if f_local < 0:
                label[node] = majority(idx)
                continue
            feat = int(cand[f_local])
            go_left = X[idx, feat] < thr
            feature[node] = feat
            threshold[node] = float(thr)
            left_child = new_node()
            right_child = new_node()
            left[node] = left_child
            right[node] = right_child
            # Right pushed first so the left subtree is grown first (preorder),
            # pinning the per-node stream draw order.
            stack.append((right_child, idx[~go_left], depth + 1))
            stack.append((left_child, idx[go_left], depth + 1))

        self.feature = np.array(feature, dtype=np.int64)
        self.threshold = np.array(threshold, dtype=np.float64)
        self.left = np.array(left, dtype=np.int64)
        self.right = np.array(right, dtype=np.int64)
        self.label = np.array(label, dtype=np.int64)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        cur = np.zeros(X.shape[0], dtype=np.int64)
        active = self.label[cur] < 0
        while np.any(active):
            rows = np.flatnonzero(active)
            nodes = cur[rows]
            go_left = X[rows, self.feature[nodes]] < self.threshold[nodes]
            cur[rows] = np.where(go_left, self.left[nodes], self.right[nodes])
            active = self.label[cur] < 0
        return self.label[cur].astype(np.uint8)


class RandomForest:
    """Bagged Gini trees with majority vote (ties to the lower label)."""

    def __init__(self, n_trees: int = 100, min_samples_leaf: int = 1,
                 max_depth: int | None = None, split_fn=None):
        self.n_trees = n_trees
        self.min_samples_leaf = min_samples_leaf
        self.max_depth = max_depth
        self.split_fn = split_fn

    def fit(self, X: np.ndarray, y: np.ndarray, stream: RandomStream) -> "RandomForest":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y).astype(np.uint8)
        n, d = X.shape
        max_features = max(1, int(math.isqrt(d)))
        self.trees = []
        for t in range(self.n_trees):
            tree_stream = stream.child(f"tree{t}")
            boot = tree_stream.integers(n, n)
            tree = DecisionTree(self.min_samples_leaf, self.max_depth, self.split_fn)
            tree.fit(X[boot], y[boot], tree_stream, max_features)
            self.trees.append(tree)
        return self

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        votes = np.zeros(X.shape[0], dtype=np.int64)
        for tree in self.trees:
            votes += tree.predict(X)
        return (2 * votes > self.n_trees).astype(np.uint8)

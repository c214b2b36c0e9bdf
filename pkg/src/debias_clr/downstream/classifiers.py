"""From-scratch binary classifiers for the representativeness benchmark.

Five model families, all seeded through an explicit RandomStream and all
deterministic given that seed: nearest neighbors, logistic regression by
full-batch gradient descent, a linear SVM by stochastic subgradient descent
on the hinge loss, a one-hidden-layer perceptron trained with Adam, and a
random forest (see `forest.py`). Hyperparameters the protocol does not fix
are exposed through the `hyper` dict of `fit`.
"""

from __future__ import annotations

import warnings

import numpy as np

from ..errors import DimensionMismatch, InvalidConfig, NonConvergenceWarning, SingleClassTraining
from ..numerics import RandomStream
from .forest import RandomForest

__all__ = ["ALL_KINDS", "fit", "predict"]

ALL_KINDS = ("knn", "logistic_regression", "linear_svm", "mlp", "random_forest")

_DEFAULTS = {
    "knn": {"k": 5},
    "logistic_regression": {"lr": 0.5, "epochs": 500, "l2": 1e-4},
    "linear_svm": {"epochs": 50, "l2": 1e-4},
    "mlp": {"hidden": 64, "epochs": 200, "batch": 128, "lr": 1e-3},
    "random_forest": {"n_trees": 100, "min_samples_leaf": 1, "max_depth": None},
}


class _Standardizer:
    """Per-column z-scoring fit on the training split (zero spread -> 1)."""

    def fit(self, X: np.ndarray) -> np.ndarray:
        self.mean = X.mean(axis=0)
        sd = X.std(axis=0)
        self.sd = np.where(sd > 1e-12, sd, 1.0)
        return (X - self.mean) / self.sd

    def transform(self, X: np.ndarray) -> np.ndarray:
        return (X - self.mean) / self.sd


def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * x))


class _Fitted:
    kind: str

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DimensionMismatch("predict expects a non-empty (n, d) matrix")
        if X.shape[1] != self._dim:
            raise DimensionMismatch(f"expected {self._dim} features, got {X.shape[1]}")
        return self._predict(X)


class KnnClassifier(_Fitted):
    kind = "knn"

    def __init__(self, X: np.ndarray, y: np.ndarray, k: int):
        self._dim = X.shape[1]
        self.X = X
        self.y = y
        self.k = min(k, len(y))

    def _predict(self, X: np.ndarray) -> np.ndarray:
        sq_train = np.einsum("ij,ij->i", self.X, self.X)
        out = np.empty(X.shape[0], dtype=np.uint8)
        # Blockwise so the distance matrix stays small.
        for start in range(0, X.shape[0], 512):
            Q = X[start : start + 512]
            d2 = sq_train[None, :] - 2.0 * (Q @ self.X.T)
            order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
            votes = self.y[order]
            ones = votes.sum(axis=1)
            pred = (2 * ones > self.k).astype(np.uint8)
            ties = 2 * ones == self.k
            if np.any(ties):
                pred[ties] = votes[ties, 0]  # tie goes to the nearest neighbor
            out[start : start + 512] = pred
        return out


class LogisticRegressionGD(_Fitted):
    kind = "logistic_regression"

    def __init__(self, X, y, lr: float, epochs: int, l2: float):
        self._dim = X.shape[1]
        self.scaler = _Standardizer()
        Xs = self.scaler.fit(X)
        n = len(y)
        w = np.zeros(X.shape[1])
        b = 0.0
        grad_norm = np.inf
        for _ in range(epochs):
            p = _sigmoid(Xs @ w + b)
            err = p - y
            gw = Xs.T @ err / n + l2 * w
            gb = float(err.mean())
            w -= lr * gw
            b -= lr * gb
            grad_norm = max(np.abs(gw).max(), abs(gb))
        if grad_norm > 1e-2:
            warnings.warn(
                f"logistic regression gradient norm {grad_norm:.3g} after {epochs} epochs",
                NonConvergenceWarning,
            )
        self.w, self.b = w, b

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scaler.transform(X) @ self.w + self.b >= 0.0).astype(np.uint8)


class LinearSvmSgd(_Fitted):
    """Hinge-loss linear classifier with the 1/(lambda*t) step schedule."""

    kind = "linear_svm"

    def __init__(self, X, y, epochs: int, l2: float, stream: RandomStream):
        self._dim = X.shape[1]
        self.scaler = _Standardizer()
        Xs = self.scaler.fit(X)
        s = 2.0 * y - 1.0
        n = len(y)
        w = np.zeros(X.shape[1])
        b = 0.0
        t = 0
        for _ in range(epochs):
            for i in stream.permutation(n):
                t += 1
                eta = 1.0 / (l2 * t)
                margin = s[i] * (Xs[i] @ w + b)
                w *= 1.0 - eta * l2
                if margin < 1.0:
                    w += eta * s[i] * Xs[i]
                    b += eta * s[i]
        self.w, self.b = w, b

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return (self.scaler.transform(X) @ self.w + self.b >= 0.0).astype(np.uint8)


class MlpClassifier(_Fitted):
    """One hidden ReLU layer, sigmoid output, cross-entropy, Adam updates."""

    kind = "mlp"

    def __init__(self, X, y, hidden: int, epochs: int, batch: int, lr: float, stream: RandomStream):
        self._dim = X.shape[1]
        self.scaler = _Standardizer()
        Xs = self.scaler.fit(X)
        n, d = Xs.shape
        bound1 = np.sqrt(6.0 / (d + hidden))
        w1 = (stream.uniform(hidden * d).reshape(hidden, d) * 2 - 1) * bound1
        b1 = np.zeros(hidden)
        bound2 = np.sqrt(6.0 / (hidden + 1))
        w2 = (stream.uniform(hidden) * 2 - 1) * bound2
        b2 = 0.0

        mom = {k: 0.0 for k in ("w1", "b1", "w2", "b2")}
        vel = {k: 0.0 for k in ("w1", "b1", "w2", "b2")}
        beta1, beta2, eps = 0.9, 0.999, 1e-8
        step = 0
        batch = min(batch, n)
        for _ in range(epochs):
            perm = stream.permutation(n)
            for start in range(0, n, batch):
                idx = perm[start : start + batch]
                xb, yb = Xs[idx], y[idx]
                a1 = xb @ w1.T + b1
                r1 = np.maximum(a1, 0.0)
                p = _sigmoid(r1 @ w2 + b2)
                err = (p - yb) / len(idx)
                gw2 = r1.T @ err
                gb2 = float(err.sum())
                dr1 = np.outer(err, w2) * (a1 > 0)
                gw1 = dr1.T @ xb
                gb1 = dr1.sum(axis=0)
                step += 1
                grads = {"w1": gw1, "b1": gb1, "w2": gw2, "b2": gb2}
                values = {"w1": w1, "b1": b1, "w2": w2, "b2": b2}
                for k, g in grads.items():
                    mom[k] = beta1 * mom[k] + (1 - beta1) * g
                    vel[k] = beta2 * vel[k] + (1 - beta2) * np.square(g)
                    m_hat = mom[k] / (1 - beta1**step)
                    v_hat = vel[k] / (1 - beta2**step)
                    values[k] = values[k] - lr * m_hat / (np.sqrt(v_hat) + eps)
                w1, b1, w2, b2 = values["w1"], values["b1"], values["w2"], values["b2"]
        self.w1, self.b1, self.w2, self.b2 = w1, b1, w2, float(b2)

    def _predict(self, X: np.ndarray) -> np.ndarray:
        r1 = np.maximum(self.scaler.transform(X) @ self.w1.T + self.b1, 0.0)
        return (r1 @ self.w2 + self.b2 >= 0.0).astype(np.uint8)


class ForestClassifier(_Fitted):
    kind = "random_forest"

    def __init__(self, X, y, n_trees, min_samples_leaf, max_depth, stream):
        self._dim = X.shape[1]
        self.forest = RandomForest(
            n_trees=n_trees,
            min_samples_leaf=min_samples_leaf,
            max_depth=max_depth,
        )
        self.forest.fit(X, y, stream)

    def _predict(self, X: np.ndarray) -> np.ndarray:
        return self.forest.predict(X)


def fit(kind: str, X, y, hyper: dict | None = None, stream: RandomStream | None = None):
    """Fit one classifier kind; see module docstring for the defaults."""
    if kind not in ALL_KINDS:
        raise InvalidConfig(f"unknown classifier kind {kind!r}")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y).astype(np.uint8)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise DimensionMismatch("X must be (n, d) aligned with y")
    if y.min() == y.max():
        raise SingleClassTraining("training labels contain a single class")
    params = dict(_DEFAULTS[kind])
    params.update(hyper or {})
    if stream is None:
        stream = RandomStream(0)

    if kind == "knn":
        return KnnClassifier(X, y, k=params["k"])
    if kind == "logistic_regression":
        return LogisticRegressionGD(X, y, params["lr"], params["epochs"], params["l2"])
    if kind == "linear_svm":
        return LinearSvmSgd(X, y, params["epochs"], params["l2"], stream)
    if kind == "mlp":
        return MlpClassifier(
            X, y, params["hidden"], params["epochs"], params["batch"], params["lr"], stream
        )
    return ForestClassifier(
        X, y, params["n_trees"], params["min_samples_leaf"], params["max_depth"], stream
    )


def predict(model, X) -> np.ndarray:
    """One label per row; dispatches to the fitted model."""
    return model.predict(X)

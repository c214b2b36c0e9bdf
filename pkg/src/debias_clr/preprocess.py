"""Sensitive-feature selection and class balancing.

Feature relevance to a sensitive attribute is scored with a plug-in mutual
information estimator over an equal-frequency 10-bin discretization; the top
half of features by that score forms the sensitive set. Class imbalance is
repaired with nearest-neighbor interpolation oversampling of the minority
class (classic SMOTE), applied to training splits only.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureTable, _class_names, _jsonable
from .errors import (
    DimensionMismatch,
    InsufficientData,
    IoFailure,
    SingleClassLabels,
    TooFewMinoritySamples,
)
from .numerics import RandomStream

__all__ = [
    "N_BINS",
    "SensitiveProfile",
    "mutual_information",
    "bulk_mutual_information",
    "select_sensitive_features",
    "smote",
    "oversample_minority",
]

N_BINS = 10


def _edge_positions(n: int) -> list[int]:
    # Type-1 (non-interpolating) quantiles: order statistics at k/B. These
    # commute with strictly monotone transforms, which keeps the binning,
    # and therefore the score, transform-invariant.
    return [math.ceil(k * n / N_BINS) - 1 for k in range(1, N_BINS)]


def _mi_from_counts(counts: np.ndarray) -> np.ndarray:
    """Plug-in MI in bits from (..., B, 2) contingency counts."""
    total = counts.sum(axis=(-2, -1), keepdims=True)
    pxy = counts / total
    px = pxy.sum(axis=-1, keepdims=True)
    py = pxy.sum(axis=-2, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, pxy * np.log2(pxy / (px * py)), 0.0)
    return np.maximum(terms.sum(axis=(-2, -1)), 0.0)


def _check_labels(labels: np.ndarray, n: int) -> np.ndarray:
    y = np.asarray(labels)
    if y.shape != (n,):
        raise DimensionMismatch(f"labels shape {y.shape} does not match {n} values")
    y = y.astype(np.int64)
    if np.any((y < 0) | (y > 1)):
        raise SingleClassLabels("labels must be binary 0/1")
    if n < 20:
        raise InsufficientData(f"mutual information needs >= 20 samples, got {n}")
    if y.min() == y.max():
        raise SingleClassLabels("both attribute classes must be present")
    return y


def mutual_information(feature_values, attribute_labels) -> float:
    """MI in bits between one feature and a binary label.

    The feature is discretized into 10 equal-frequency bins (duplicate bin
    edges collapse ties into a single bin, so a constant feature scores 0
    exactly); the estimator is the plug-in entropy of the resulting
    contingency table. Empty bins contribute nothing.
    """
    x = np.asarray(feature_values, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("feature_values must be one-dimensional")
    y = _check_labels(attribute_labels, x.size)
    edges = np.sort(x)[_edge_positions(x.size)]
    bins = (x[:, None] >= edges[None, :]).sum(axis=1)
    counts = np.zeros((N_BINS, 2), dtype=np.int64)
    np.add.at(counts, (bins, y), 1)
    return float(_mi_from_counts(counts.astype(np.float64)))


def bulk_mutual_information(X: np.ndarray, attribute_labels) -> np.ndarray:
    """Per-column MI against a binary label; equals the scalar op per column."""
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    y = _check_labels(attribute_labels, n)
    edge_rows = np.sort(X, axis=0)[_edge_positions(n), :]
    bins = np.zeros((n, d), dtype=np.int32)
    for k in range(N_BINS - 1):
        bins += X >= edge_rows[k]
    codes = np.arange(d, dtype=np.int32)[None, :] * (2 * N_BINS) + bins * 2
    codes += y[:, None].astype(np.int32)
    counts = np.bincount(codes.ravel(), minlength=d * 2 * N_BINS)
    counts = counts.reshape(d, N_BINS, 2).astype(np.float64)
    return _mi_from_counts(counts)


@dataclass
class SensitiveProfile:
    """Selected sensitive feature indices and their per-class mean values."""

    attribute: str
    sensitive_indices: np.ndarray
    mi_scores: np.ndarray
    class1_means: np.ndarray
    class2_means: np.ndarray

    def __post_init__(self):
        self.sensitive_indices = np.asarray(self.sensitive_indices, dtype=np.int64)
        self.mi_scores = np.asarray(self.mi_scores, dtype=np.float64)
        self.class1_means = np.asarray(self.class1_means, dtype=np.float64)
        self.class2_means = np.asarray(self.class2_means, dtype=np.float64)
        _class_names(self.attribute)
        idx = self.sensitive_indices
        if idx.size and (np.any(np.diff(idx) <= 0) or idx[0] < 0):
            raise DimensionMismatch("sensitive indices must be unique and ascending")
        if self.class1_means.shape != idx.shape or self.class2_means.shape != idx.shape:
            raise DimensionMismatch("class means must align with sensitive indices")

    @property
    def class_names(self) -> tuple[str, str]:
        return _class_names(self.attribute)

    def save(self, path: str) -> None:
        payload = {
            "attribute": self.attribute,
            "sensitive_indices": self.sensitive_indices.tolist(),
            "mi_scores": self.mi_scores.tolist(),
            "class1_means": self.class1_means.tolist(),
            "class2_means": self.class2_means.tolist(),
        }
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(payload, fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write profile {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "SensitiveProfile":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                payload = json.load(fh)
        except OSError as exc:
            raise IoFailure(f"cannot read profile {path}: {exc}") from exc
        return cls(
            attribute=payload["attribute"],
            sensitive_indices=payload["sensitive_indices"],
            mi_scores=payload["mi_scores"],
            class1_means=payload["class1_means"],
            class2_means=payload["class2_means"],
        )


def select_sensitive_features(table: FeatureTable, attribute: str) -> SensitiveProfile:
    """Rank features by MI with the attribute; keep the top half.

    Exactly floor(D/2) indices are selected, ties broken toward the lower
    index, and per-class means are taken over the selected columns only.
    Deterministic: no random input.
    """
    codes = table.attribute_codes(attribute)
    mi = bulk_mutual_information(table.features, codes)
    d = table.dim
    k = d // 2
    ranked = np.lexsort((np.arange(d), -mi))
    selected = np.sort(ranked[:k])
    class1 = table.features[codes == 0][:, selected]
    class2 = table.features[codes == 1][:, selected]
    return SensitiveProfile(
        attribute=attribute,
        sensitive_indices=selected,
        mi_scores=mi,
        class1_means=class1.mean(axis=0) if k else np.empty(0),
        class2_means=class2.mean(axis=0) if k else np.empty(0),
    )


def _nearest_same_class(X: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest rows (Euclidean) per row, self excluded.

    Distance ties break toward the lower row index (stable sort).
    """
    sq = np.einsum("ij,ij->i", X, X)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    return order[:, :k]


def oversample_minority(
    X: np.ndarray, labels: np.ndarray, k: int, stream: RandomStream
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Synthesize minority-class rows on segments toward same-class neighbors.

    Returns (synthetic_rows, seed_row_indices, neighbor_row_indices, lambdas),
    all indexed into X. Enough rows are produced to balance the two classes;
    seed rows are visited in a shuffled cyclic order so coverage stays even.
    """
    labels = np.asarray(labels)
    n0 = int(np.sum(labels == 0))
    n1 = int(np.sum(labels == 1))
    if n0 == n1:
        empty = np.empty(0, dtype=np.int64)
        return np.empty((0, X.shape[1])), empty, empty, np.empty(0)
    minority = 0 if n0 < n1 else 1
    min_idx = np.flatnonzero(labels == minority)
    deficit = abs(n0 - n1)
    if len(min_idx) <= k:
        raise TooFewMinoritySamples(
            f"minority class has {len(min_idx)} rows, need more than k={k}"
        )
    neighbors = _nearest_same_class(X[min_idx], k)
    order = stream.permutation(len(min_idx))
    u = stream.uniform(2 * deficit)
    picks = np.minimum((u[0::2] * k).astype(np.int64), k - 1)
    lambdas = u[1::2]
    seed_pos = order[np.arange(deficit) % len(min_idx)]
    nn_pos = neighbors[seed_pos, picks]
    seed_rows = min_idx[seed_pos]
    nn_rows = min_idx[nn_pos]
    synth = X[seed_rows] + lambdas[:, None] * (X[nn_rows] - X[seed_rows])
    return synth, seed_rows, nn_rows, lambdas


def smote(
    table: FeatureTable, attribute: str, k: int = 5, stream: RandomStream | None = None
) -> FeatureTable:
    """Balance the sensitive-attribute classes of a table.

    Original rows are preserved as a prefix; synthetic rows copy the seed
    row's labels and phenotypes, get fresh record ids, and are recorded in
    provenance["smote_lineage"] as (seed_id, neighbor_id, lambda) triples.
    A table that is already balanced is returned unchanged.
    """
    if stream is None:
        raise ValueError("smote requires an explicit RandomStream")
    codes = table.attribute_codes(attribute)
    synth, seed_rows, nn_rows, lambdas = oversample_minority(
        table.features, codes, k, stream
    )
    if len(seed_rows) == 0:
        return table

    existing = set(table.record_ids)
    new_ids = []
    for t, row in enumerate(seed_rows):
        rid = f"smote{t:05d}_{table.record_ids[row]}"
        while rid in existing:
            rid += "x"
        existing.add(rid)
        new_ids.append(rid)

    lineage = [
        (table.record_ids[s], table.record_ids[nn], float(lam))
        for s, nn, lam in zip(seed_rows, nn_rows, lambdas)
    ]
    provenance = dict(table.provenance)
    provenance["smote_lineage"] = lineage
    provenance["smote_attribute"] = attribute
    return FeatureTable(
        record_ids=table.record_ids + new_ids,
        features=np.vstack([table.features, synth]),
        gender_codes=np.concatenate([table.gender_codes, table.gender_codes[seed_rows]]),
        ethnicity_codes=np.concatenate(
            [table.ethnicity_codes, table.ethnicity_codes[seed_rows]]
        ),
        los_classes=np.concatenate([table.los_classes, table.los_classes[seed_rows]]),
        dx_phenotypes=np.vstack([table.dx_phenotypes, table.dx_phenotypes[seed_rows]]),
        proc_phenotypes=np.vstack([table.proc_phenotypes, table.proc_phenotypes[seed_rows]]),
        provenance=provenance,
    )

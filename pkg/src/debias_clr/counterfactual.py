"""Counterfactual positive-pair construction and cutout masking.

A record's positive view is built by overwriting its sensitive feature
values with the opposite class's per-feature means, leaving every other
coordinate untouched. During regularized training a cutout mask
additionally zeroes a random slice of the sensitive coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import FeatureTable
from .errors import DimensionMismatch
from .numerics import RandomStream
from .preprocess import SensitiveProfile

__all__ = ["PairedSample", "generate_positive", "build_pairs", "pair_matrices", "cutout", "cutout_rows"]


@dataclass
class PairedSample:
    """Anchor row and its counterfactual positive; equal off the sensitive set."""

    anchor: np.ndarray
    positive: np.ndarray
    attribute_class: str


def _class_code(sample_class, profile: SensitiveProfile) -> int:
    if isinstance(sample_class, str):
        names = profile.class_names
        if sample_class not in names:
            raise ValueError(f"unknown class {sample_class!r} for {profile.attribute}")
        return names.index(sample_class)
    code = int(sample_class)
    if code not in (0, 1):
        raise ValueError(f"class code must be 0 or 1, got {sample_class!r}")
    return code


def generate_positive(sample, sample_class, profile: SensitiveProfile) -> np.ndarray:
    """Swap the sensitive coordinates for the opposite class's means.

    Class 1 rows receive the class-2 means and vice versa; all other
    coordinates are copied verbatim.
    """
    x = np.asarray(sample, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch("sample must be a vector")
    idx = profile.sensitive_indices
    if idx.size and idx[-1] >= x.size:
        raise DimensionMismatch(
            f"profile indexes feature {int(idx[-1])} but sample has dim {x.size}"
        )
    out = x.copy()
    code = _class_code(sample_class, profile)
    out[idx] = profile.class2_means if code == 0 else profile.class1_means
    return out


def pair_matrices(
    table: FeatureTable, profile: SensitiveProfile
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(anchors, positives, class_codes) for a whole table, order preserved."""
    idx = profile.sensitive_indices
    if idx.size and idx[-1] >= table.dim:
        raise DimensionMismatch(
            f"profile indexes feature {int(idx[-1])} but table has dim {table.dim}"
        )
    anchors = table.features.copy()
    positives = anchors.copy()
    codes = table.attribute_codes(profile.attribute)
    positives[np.ix_(codes == 0, idx)] = profile.class2_means
    positives[np.ix_(codes == 1, idx)] = profile.class1_means
    return anchors, positives, codes


def build_pairs(table: FeatureTable, profile: SensitiveProfile) -> list[PairedSample]:
    """One (anchor, positive) pair per record; negatives are implicit and
    materialize as the other in-batch views at training time."""
    anchors, positives, codes = pair_matrices(table, profile)
    names = profile.class_names
    return [
        PairedSample(anchor=anchors[i], positive=positives[i], attribute_class=names[codes[i]])
        for i in range(len(table))
    ]


def _mask_count(n_sensitive: int, fraction: float) -> int:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"cutout fraction {fraction} outside [0, 1]")
    if fraction == 0.0 or n_sensitive == 0:
        return 0
    return max(1, math.floor(fraction * n_sensitive))


def cutout(
    sample, profile: SensitiveProfile, fraction: float = 0.2, stream: RandomStream | None = None
) -> np.ndarray:
    """Zero a random fixed-size subset of the sensitive coordinates.

    Exactly max(1, floor(fraction * n_sensitive)) coordinates are masked
    (zero when fraction is 0), chosen uniformly without replacement.
    """
    x = np.asarray(sample, dtype=np.float64).copy()
    m = _mask_count(profile.sensitive_indices.size, fraction)
    if m == 0:
        return x
    chosen = stream.choice_without_replacement(profile.sensitive_indices.size, m)
    x[profile.sensitive_indices[chosen]] = 0.0
    return x


def cutout_rows(
    X: np.ndarray, profile: SensitiveProfile, fraction: float, stream: RandomStream
) -> np.ndarray:
    """Row-wise cutout with an independent mask per row.

    Draws are consumed row-major (n_sensitive keys per row), so this equals
    applying `cutout` to each row in order with the same stream.
    """
    X = np.asarray(X, dtype=np.float64).copy()
    n_sens = profile.sensitive_indices.size
    m = _mask_count(n_sens, fraction)
    if m == 0:
        return X
    keys = stream.uniform(X.shape[0] * n_sens).reshape(X.shape[0], n_sens)
    chosen = np.argsort(keys, axis=1, kind="stable")[:, :m]
    rows = np.repeat(np.arange(X.shape[0]), m)
    X[rows, profile.sensitive_indices[chosen].ravel()] = 0.0
    return X

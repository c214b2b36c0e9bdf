"""Shared fixtures and table builders."""

from __future__ import annotations

import numpy as np
import pytest

from debias_clr.dataset import FeatureTable
from debias_clr.numerics import RandomStream


def make_table(
    n: int = 24,
    dim: int = 6,
    seed: int = 0,
    gender_codes=None,
    features=None,
    los=None,
) -> FeatureTable:
    """Small hand-controllable table for unit tests."""
    stream = RandomStream(seed)
    if features is None:
        features = stream.normal(n * dim).reshape(n, dim)
    features = np.asarray(features, dtype=np.float64)
    n, dim = features.shape
    if gender_codes is None:
        gender_codes = (np.arange(n) % 2).astype(np.uint8)
    gender_codes = np.asarray(gender_codes, dtype=np.uint8)
    ethnicity = ((np.arange(n) // 2) % 2).astype(np.uint8)
    if los is None:
        los = (np.arange(n) % 5 + 1).astype(np.int8)
    dx = np.zeros((n, 12), dtype=np.uint8)
    proc = np.zeros((n, 12), dtype=np.uint8)
    dx[np.arange(n), np.arange(n) % 12] = 1
    proc[np.arange(n), (np.arange(n) + 5) % 12] = 1
    return FeatureTable(
        record_ids=[f"r{i:03d}" for i in range(n)],
        features=features,
        gender_codes=gender_codes,
        ethnicity_codes=ethnicity,
        los_classes=np.asarray(los, dtype=np.int8),
        dx_phenotypes=dx,
        proc_phenotypes=proc,
        provenance={"source": "test"},
    )


@pytest.fixture
def small_table() -> FeatureTable:
    return make_table()

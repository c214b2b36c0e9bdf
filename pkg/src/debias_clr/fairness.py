"""Embedding-association fairness statistics.

The core measure is a single-category association effect size: the
difference between the mean cosine of target vectors with class-1 rows and
with class-2 rows, divided by the sample standard deviation of all
target-row cosines. Zero means no association; the statistic lives in
[-2, 2] and a positive sign means a stronger pull toward class 1.

Targets are clinical-phenotype centroids computed in whatever embedding
space is under audit. The published procedure pairs 12-dim one-hot
phenotype indicators directly with full-width embeddings, which is
dimensionally inconsistent; representing each phenotype by the centroid of
its member embeddings keeps the target in the audited space and is isolated
behind `TargetSet` so alternatives can be swapped in.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, IoFailure, ZeroVariance
from .numerics import cosine_similarity_matrix, mean_and_sample_std

__all__ = [
    "AttributeSets",
    "TargetSet",
    "EffectSizeReport",
    "association",
    "weat_statistic",
    "sc_weat_effect_size",
    "phenotype_targets",
    "audit_cell",
    "audit",
    "TARGET_BLOCKS",
    "VARIANT_LABELS",
]

TARGET_BLOCKS = ("diagnostic_codes", "procedure_reports")
VARIANT_LABELS = {
    "raw": "Before",
    "debias_clr": "Debias-CLR",
    "debias_clr_r": "Debias-CLR-R",
}


@dataclass
class AttributeSets:
    """Embedding rows for the two classes of a sensitive attribute."""

    a1: np.ndarray
    a2: np.ndarray

    def __post_init__(self):
        self.a1 = np.atleast_2d(np.asarray(self.a1, dtype=np.float64))
        self.a2 = np.atleast_2d(np.asarray(self.a2, dtype=np.float64))
        if self.a1.size == 0 or self.a2.size == 0:
            raise DimensionMismatch("both attribute classes must be non-empty")
        if self.a1.shape[1] != self.a2.shape[1]:
            raise DimensionMismatch("attribute sets must share a dimension")


@dataclass
class TargetSet:
    """Named set of target vectors living in the same space as the attributes."""

    name: str
    vectors: np.ndarray
    phenotype_ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=np.float64))
        if self.vectors.size == 0:
            raise DimensionMismatch("target set must hold at least one vector")


def association(w, A1, A2) -> float:
    """Mean cosine of w with A1 minus mean cosine with A2."""
    w = np.atleast_2d(np.asarray(w, dtype=np.float64))
    sims1 = cosine_similarity_matrix(w, np.atleast_2d(A1))
    sims2 = cosine_similarity_matrix(w, np.atleast_2d(A2))
    return float(sims1.mean() - sims2.mean())


def weat_statistic(T1, T2, A1, A2) -> float:
    """Two-target association statistic: summed associations of T1 minus T2."""
    T1 = np.atleast_2d(np.asarray(T1, dtype=np.float64))
    T2 = np.atleast_2d(np.asarray(T2, dtype=np.float64))
    if T1.size == 0 or T2.size == 0:
        raise DimensionMismatch("both target sets must be non-empty")
    s1 = sum(association(T1[i], A1, A2) for i in range(T1.shape[0]))
    s2 = sum(association(T2[i], A1, A2) for i in range(T2.shape[0]))
    return float(s1 - s2)


def sc_weat_effect_size(targets: TargetSet, attributes: AttributeSets) -> float:
    """Single-category effect size of the target set against the two classes.

    mean1 pools cos(w, a) over all target-by-class-1 pairs, mean2 over
    class 2, and the denominator is the sample standard deviation of
    cos(w, x) over all targets and all rows of both classes. Raises
    ZeroVariance when that spread collapses, which signals degenerate
    embeddings rather than a clean zero.
    """
    sims1 = cosine_similarity_matrix(targets.vectors, attributes.a1)
    sims2 = cosine_similarity_matrix(targets.vectors, attributes.a2)
    pooled = np.concatenate([sims1.ravel(), sims2.ravel()])
    _, std = mean_and_sample_std(pooled)
    if std < 1e-12:
        raise ZeroVariance("target-attribute cosines have no spread")
    return float((sims1.mean() - sims2.mean()) / std)


def phenotype_targets(
    embeddings: np.ndarray, phenotype_bits: np.ndarray, name: str
) -> TargetSet:
    """Centroid of member embeddings per phenotype; empty phenotypes drop out."""
    embeddings = np.asarray(embeddings, dtype=np.float64)
    bits = np.asarray(phenotype_bits)
    if bits.shape[0] != embeddings.shape[0]:
        raise DimensionMismatch("phenotype block must align with embeddings")
    vectors, kept = [], []
    for p in range(bits.shape[1]):
        members = bits[:, p] == 1
        if np.any(members):
            vectors.append(embeddings[members].mean(axis=0))
            kept.append(p)
    if not vectors:
        raise DimensionMismatch(f"no phenotype in block {name!r} has members")
    return TargetSet(name=name, vectors=np.array(vectors), phenotype_ids=kept)


@dataclass
class AuditInput:
    """One grid cell: a variant's training-split embeddings plus labels."""

    fraction: float
    variant: str
    embeddings: np.ndarray
    class_codes: np.ndarray
    dx_bits: np.ndarray
    proc_bits: np.ndarray


@dataclass
class EffectSizeReport:
    """Effect sizes per (fraction, variant, target block) for one attribute."""

    attribute: str
    cells: dict[tuple[float, str, str], float] = field(default_factory=dict)
    failures: dict[tuple[float, str, str], str] = field(default_factory=dict)

    def value(self, fraction: float, variant: str, block: str) -> float:
        return self.cells[(round(fraction, 6), variant, block)]

    def fractions(self) -> list[float]:
        return sorted({key[0] for key in self.cells})

    def variants(self) -> list[str]:
        ordered = [v for v in VARIANT_LABELS if any(k[1] == v for k in self.cells)]
        extras = sorted({k[1] for k in self.cells} - set(ordered))
        return ordered + extras

    def to_json_dict(self) -> dict:
        return {
            "attribute": self.attribute,
            "cells": [
                {
                    "fraction": f,
                    "variant": v,
                    "block": b,
                    "effect_size": val,
                }
                for (f, v, b), val in sorted(self.cells.items())
            ],
            "failures": [
                {"fraction": f, "variant": v, "block": b, "error": msg}
                for (f, v, b), msg in sorted(self.failures.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "EffectSizeReport":
        report = cls(attribute=payload["attribute"])
        for cell in payload["cells"]:
            key = (round(cell["fraction"], 6), cell["variant"], cell["block"])
            report.cells[key] = cell["effect_size"]
        for cell in payload.get("failures", []):
            key = (round(cell["fraction"], 6), cell["variant"], cell["block"])
            report.failures[key] = cell["error"]
        return report

    def to_text(self) -> str:
        """Aligned grid: one row per training fraction, one column per
        (target block, variant) combination."""
        variants = self.variants()
        header = ["attribute", "fraction"]
        for block in TARGET_BLOCKS:
            for v in variants:
                header.append(f"{block}:{VARIANT_LABELS.get(v, v)}")
        rows = [header]
        for f in self.fractions():
            row = [self.attribute, f"{f:g}"]
            for block in TARGET_BLOCKS:
                for v in variants:
                    key = (f, v, block)
                    if key in self.cells:
                        row.append(f"{self.cells[key]:+.4f}")
                    elif key in self.failures:
                        row.append("ERR")
                    else:
                        row.append("-")
            rows.append(row)
        widths = [max(len(r[c]) for r in rows) for c in range(len(header))]
        return "\n".join(
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)) for row in rows
        ) + "\n"

    def save(self, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write effect-size report {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "EffectSizeReport":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_json_dict(json.load(fh))
        except OSError as exc:
            raise IoFailure(f"cannot read effect-size report {path}: {exc}") from exc


def audit_cell(cell: AuditInput) -> dict[str, float]:
    """Effect size per target block for one (fraction, variant) cell."""
    codes = np.asarray(cell.class_codes)
    attrs = AttributeSets(a1=cell.embeddings[codes == 0], a2=cell.embeddings[codes == 1])
    out = {}
    for block, bits in (
        ("diagnostic_codes", cell.dx_bits),
        ("procedure_reports", cell.proc_bits),
    ):
        targets = phenotype_targets(cell.embeddings, bits, block)
        out[block] = sc_weat_effect_size(targets, attrs)
    return out


def audit(attribute: str, cells: list[AuditInput]) -> EffectSizeReport:
    """Run the effect-size grid; failures are recorded per cell, not raised."""
    report = EffectSizeReport(attribute=attribute)
    for cell in cells:
        key_base = (round(cell.fraction, 6), cell.variant)
        try:
            values = audit_cell(cell)
        except Exception as exc:  # per-cell continuation by contract
            for block in TARGET_BLOCKS:
                report.failures[(*key_base, block)] = f"{type(exc).__name__}: {exc}"
            continue
        for block, value in values.items():
            report.cells[(*key_base, block)] = value
    return report

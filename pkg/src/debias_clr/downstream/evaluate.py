"""Benchmark grid: fit every classifier kind on every embedding variant.

Two tasks share the machinery. `length_of_stay` predicts the binarized stay
length from each variant's training-split features; `sensitive_probe`
predicts the sensitive attribute itself (how much demographic signal is
still recoverable). Training labels are rebalanced by minority oversampling
in the feature space under evaluation; test rows are never touched. Each
(variant, kind) cell derives its own child stream, so cells can run in any
order without changing the report.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import IoFailure
from ..numerics import RandomStream
from ..preprocess import oversample_minority
from .classifiers import ALL_KINDS, fit
from .metrics import accuracy, cohen_kappa, confusion_counts, mcc

__all__ = ["EvalCell", "EvalReport", "VariantData", "evaluate", "balance_training_set"]

TASKS = ("length_of_stay", "sensitive_probe")


@dataclass
class VariantData:
    """One variant's feature matrices over the shared train/test records."""

    train: np.ndarray
    test: np.ndarray


@dataclass
class EvalCell:
    accuracy: float | None = None
    mcc: float | None = None
    kappa: float | None = None
    kappa_negative: bool = False
    error: str | None = None


@dataclass
class EvalReport:
    """Scores per (classifier kind, embedding variant)."""

    task: str
    cells: dict[tuple[str, str], EvalCell] = field(default_factory=dict)

    def cell(self, kind: str, variant: str) -> EvalCell:
        return self.cells[(kind, variant)]

    def variants(self) -> list[str]:
        seen: list[str] = []
        for _, variant in self.cells:
            if variant not in seen:
                seen.append(variant)
        return seen

    def to_json_dict(self) -> dict:
        return {
            "task": self.task,
            "cells": [
                {
                    "kind": kind,
                    "variant": variant,
                    "accuracy": c.accuracy,
                    "mcc": c.mcc,
                    "kappa": c.kappa,
                    "kappa_negative": c.kappa_negative,
                    "error": c.error,
                }
                for (kind, variant), c in sorted(self.cells.items())
            ],
        }

    @classmethod
    def from_json_dict(cls, payload: dict) -> "EvalReport":
        report = cls(task=payload["task"])
        for cell in payload["cells"]:
            report.cells[(cell["kind"], cell["variant"])] = EvalCell(
                accuracy=cell["accuracy"],
                mcc=cell["mcc"],
                kappa=cell["kappa"],
                kappa_negative=cell["kappa_negative"],
                error=cell["error"],
            )
        return report

    def to_text(self) -> str:
        rows = [["model", "features", "A", "MCC", "K"]]
        kinds = [k for k in ALL_KINDS if any(key[0] == k for key in self.cells)]
        for kind in kinds:
            for variant in self.variants():
                key = (kind, variant)
                if key not in self.cells:
                    continue
                c = self.cells[key]
                if c.error:
                    rows.append([kind, variant, "ERR", "ERR", "ERR"])
                else:
                    kappa = f"{c.kappa:.3f}" + ("!" if c.kappa_negative else "")
                    rows.append(
                        [kind, variant, f"{c.accuracy:.3f}", f"{c.mcc:.3f}", kappa]
                    )
        widths = [max(len(r[c]) for r in rows) for c in range(5)]
        return "\n".join(
            "  ".join(cell.ljust(widths[c]) for c, cell in enumerate(row)) for row in rows
        ) + "\n"

    def save(self, path: str) -> None:
        try:
            with open(path, "w", encoding="utf-8") as fh:
                json.dump(self.to_json_dict(), fh, indent=2, sort_keys=True)
                fh.write("\n")
        except OSError as exc:
            raise IoFailure(f"cannot write eval report {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str) -> "EvalReport":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_json_dict(json.load(fh))
        except OSError as exc:
            raise IoFailure(f"cannot read eval report {path}: {exc}") from exc


def balance_training_set(
    X: np.ndarray, y: np.ndarray, stream: RandomStream, k: int = 5
) -> tuple[np.ndarray, np.ndarray]:
    """Oversample the minority class in this feature space.

    The neighbor count drops to minority-1 for tiny classes; when even that
    is impossible the data is returned unbalanced.
    """
    y = np.asarray(y).astype(np.uint8)
    n_min = min(int(np.sum(y == 0)), int(np.sum(y == 1)))
    if n_min == 0 or n_min == max(int(np.sum(y == 0)), int(np.sum(y == 1))):
        return X, y
    k_eff = min(k, n_min - 1)
    if k_eff < 1:
        return X, y
    synth, seed_rows, _, _ = oversample_minority(X, y, k_eff, stream)
    if len(seed_rows) == 0:
        return X, y
    return np.vstack([X, synth]), np.concatenate([y, y[seed_rows]])


def evaluate(
    variants: dict[str, VariantData],
    y_train: np.ndarray,
    y_test: np.ndarray,
    task: str,
    stream: RandomStream,
    kinds=ALL_KINDS,
    hyper: dict | None = None,
    balance: bool = True,
) -> EvalReport:
    """Fit/score the full (kind, variant) grid; failures stay in their cell.

    `hyper` maps classifier kind to overrides, e.g. {"knn": {"k": 3}}.
    """
    report = EvalReport(task=task)
    y_train = np.asarray(y_train).astype(np.uint8)
    y_test = np.asarray(y_test).astype(np.uint8)
    for variant, data in variants.items():
        if balance:
            bal_stream = stream.child(f"{task}:{variant}:balance")
            Xb, yb = balance_training_set(data.train, y_train, bal_stream)
        else:
            Xb, yb = data.train, y_train
        for kind in kinds:
            cell_stream = stream.child(f"{task}:{variant}:{kind}")
            try:
                model = fit(kind, Xb, yb, (hyper or {}).get(kind), cell_stream)
                pred = model.predict(data.test)
                counts = confusion_counts(y_test, pred)
                kappa = cohen_kappa(counts)
                report.cells[(kind, variant)] = EvalCell(
                    accuracy=accuracy(counts),
                    mcc=mcc(counts),
                    kappa=kappa,
                    kappa_negative=kappa < 0,
                )
            except Exception as exc:  # per-cell continuation by contract
                report.cells[(kind, variant)] = EvalCell(
                    error=f"{type(exc).__name__}: {exc}"
                )
    return report

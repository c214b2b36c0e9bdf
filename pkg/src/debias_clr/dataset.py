"""Data model, table file I/O, label binarization, splitting, and the
synthetic biased-cohort generator.

A `FeatureTable` stores its records columnwise in numpy arrays and is frozen
after construction (arrays are marked read-only), so tables can be shared
across threads without copying. The synthetic generator stands in for a
private clinical cohort: it plants a controllable demographic signal in a
known subset of feature columns and an independent stay-length signal in a
disjoint "clinical" subset, and records both index sets in the table's
provenance so audits can be scored against ground truth.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    DegenerateSplit,
    DimensionMismatch,
    DuplicateRecordId,
    InvalidClass,
    InvalidConfig,
    IoFailure,
    ParseError,
)
from .numerics import RandomStream

__all__ = [
    "GENDER_CLASSES",
    "ETHNICITY_CLASSES",
    "N_PHENOTYPES",
    "Record",
    "FeatureTable",
    "SynthConfig",
    "binarize_los",
    "split",
    "generate_synthetic",
    "load_table",
    "write_table",
]

# Class 1 of each attribute comes first; effect-size signs follow this order.
GENDER_CLASSES = ("female", "male")
ETHNICITY_CLASSES = ("hispanic", "non_hispanic")
_GENDER_CODES = {"F": 0, "M": 1}
_ETHNICITY_CODES = {"H": 0, "N": 1}
N_PHENOTYPES = 12


@dataclass
class Record:
    """One hospitalization row: feature vector plus labels."""

    record_id: str
    features: np.ndarray
    gender: str
    ethnicity: str
    los_class: int
    dx_phenotypes: np.ndarray
    proc_phenotypes: np.ndarray


def _class_names(attribute: str) -> tuple[str, str]:
    if attribute == "gender":
        return GENDER_CLASSES
    if attribute == "ethnicity":
        return ETHNICITY_CLASSES
    raise InvalidConfig(f"unknown sensitive attribute {attribute!r}")


class FeatureTable:
    """Immutable columnar table of records.

    Attribute classes are stored as codes: 0 for the first class of each
    attribute (female, hispanic), 1 for the second.
    """

    def __init__(
        self,
        record_ids: Sequence[str],
        features: np.ndarray,
        gender_codes: np.ndarray,
        ethnicity_codes: np.ndarray,
        los_classes: np.ndarray,
        dx_phenotypes: np.ndarray,
        proc_phenotypes: np.ndarray,
        provenance: dict | None = None,
    ):
        self.record_ids = list(record_ids)
        self.features = np.ascontiguousarray(features, dtype=np.float64)
        self.gender_codes = np.asarray(gender_codes, dtype=np.uint8)
        self.ethnicity_codes = np.asarray(ethnicity_codes, dtype=np.uint8)
        self.los_classes = np.asarray(los_classes, dtype=np.int8)
        self.dx_phenotypes = np.asarray(dx_phenotypes, dtype=np.uint8)
        self.proc_phenotypes = np.asarray(proc_phenotypes, dtype=np.uint8)
        self.provenance = dict(provenance or {})
        self._validate()
        for arr in (
            self.features,
            self.gender_codes,
            self.ethnicity_codes,
            self.los_classes,
            self.dx_phenotypes,
            self.proc_phenotypes,
        ):
            arr.setflags(write=False)

    def _validate(self) -> None:
        n = len(self.record_ids)
        if n == 0:
            raise ParseError("a table must hold at least one record")
        if self.features.ndim != 2 or self.features.shape[0] != n:
            raise DimensionMismatch(
                f"features shape {self.features.shape} inconsistent with {n} records"
            )
        if not np.all(np.isfinite(self.features)):
            bad = np.argwhere(~np.isfinite(self.features))[0]
            raise ParseError(f"non-finite feature at row {bad[0]}, column f_{bad[1]}")
        if len(set(self.record_ids)) != n:
            seen: set[str] = set()
            for rid in self.record_ids:
                if rid in seen:
                    raise DuplicateRecordId(f"duplicate record_id {rid!r}")
                seen.add(rid)
        for name, arr in (("gender", self.gender_codes), ("ethnicity", self.ethnicity_codes)):
            if arr.shape != (n,) or np.any(arr > 1):
                raise ParseError(f"bad {name} codes")
        if self.los_classes.shape != (n,) or np.any(
            (self.los_classes < 1) | (self.los_classes > 5)
        ):
            bad = int(np.argmax((self.los_classes < 1) | (self.los_classes > 5)))
            raise InvalidClass(
                f"row {bad}: los_class {int(self.los_classes[bad])} outside 1..5"
            )
        for name, arr in (("dx", self.dx_phenotypes), ("proc", self.proc_phenotypes)):
            if arr.shape != (n, N_PHENOTYPES) or np.any(arr > 1):
                raise ParseError(f"{name} phenotype block must be (n, 12) of 0/1")

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def __len__(self) -> int:
        return len(self.record_ids)

    def record(self, i: int) -> Record:
        gender = GENDER_CLASSES[self.gender_codes[i]]
        ethnicity = ETHNICITY_CLASSES[self.ethnicity_codes[i]]
        return Record(
            record_id=self.record_ids[i],
            features=self.features[i],
            gender=gender,
            ethnicity=ethnicity,
            los_class=int(self.los_classes[i]),
            dx_phenotypes=self.dx_phenotypes[i],
            proc_phenotypes=self.proc_phenotypes[i],
        )

    def iter_records(self) -> Iterator[Record]:
        return (self.record(i) for i in range(len(self)))

    @classmethod
    def from_records(cls, records: Sequence[Record], provenance: dict | None = None):
        if not records:
            raise ParseError("a table must hold at least one record")
        dim = len(records[0].features)
        for r in records:
            if len(r.features) != dim:
                raise DimensionMismatch(
                    f"record {r.record_id!r} has dim {len(r.features)}, expected {dim}"
                )
        return cls(
            record_ids=[r.record_id for r in records],
            features=np.array([r.features for r in records], dtype=np.float64),
            gender_codes=np.array(
                [GENDER_CLASSES.index(r.gender) for r in records], dtype=np.uint8
            ),
            ethnicity_codes=np.array(
                [ETHNICITY_CLASSES.index(r.ethnicity) for r in records], dtype=np.uint8
            ),
            los_classes=np.array([r.los_class for r in records], dtype=np.int8),
            dx_phenotypes=np.array([r.dx_phenotypes for r in records], dtype=np.uint8),
            proc_phenotypes=np.array([r.proc_phenotypes for r in records], dtype=np.uint8),
            provenance=provenance,
        )

    def attribute_codes(self, attribute: str) -> np.ndarray:
        """0/1 class codes for the chosen sensitive attribute (0 = class 1)."""
        _class_names(attribute)
        return self.gender_codes if attribute == "gender" else self.ethnicity_codes

    def los_binary(self) -> np.ndarray:
        """0 = short stay (classes 1-2), 1 = long stay (classes 3-5)."""
        return (self.los_classes >= 3).astype(np.uint8)

    def subset(self, indices: np.ndarray, note: str | None = None) -> "FeatureTable":
        indices = np.asarray(indices, dtype=np.int64)
        provenance = dict(self.provenance)
        if note:
            provenance["subset"] = note
        return FeatureTable(
            record_ids=[self.record_ids[i] for i in indices],
            features=self.features[indices],
            gender_codes=self.gender_codes[indices],
            ethnicity_codes=self.ethnicity_codes[indices],
            los_classes=self.los_classes[indices],
            dx_phenotypes=self.dx_phenotypes[indices],
            proc_phenotypes=self.proc_phenotypes[indices],
            provenance=provenance,
        )

    def equals(self, other: "FeatureTable") -> bool:
        return (
            self.record_ids == other.record_ids
            and np.array_equal(self.features, other.features)
            and np.array_equal(self.gender_codes, other.gender_codes)
            and np.array_equal(self.ethnicity_codes, other.ethnicity_codes)
            and np.array_equal(self.los_classes, other.los_classes)
            and np.array_equal(self.dx_phenotypes, other.dx_phenotypes)
            and np.array_equal(self.proc_phenotypes, other.proc_phenotypes)
        )


def binarize_los(los_class: int) -> str:
    """Collapse the five stay-length classes: 1-2 -> short, 3-5 -> long."""
    if los_class in (1, 2):
        return "short"
    if los_class in (3, 4, 5):
        return "long"
    raise InvalidClass(f"los_class {los_class!r} outside 1..5")


# ---------------------------------------------------------------------------
# File format
# ---------------------------------------------------------------------------
#
# Delimited text, header:
#   record_id,f_0..f_{D-1},gender,ethnicity,los_class,dx_0..dx_11,proc_0..proc_11
# gender in {F, M}; ethnicity in {H, N}; features written with 17 significant
# digits so load(write(t)) round-trips bit-exactly. A JSON companion manifest
# (<table>.manifest.json) carries dim, row count, and generator provenance.


def _manifest_path(path: str) -> str:
    return path + ".manifest.json"


def write_table(table: FeatureTable, path: str) -> None:
    d = table.dim
    header = (
        ["record_id"]
        + [f"f_{j}" for j in range(d)]
        + ["gender", "ethnicity", "los_class"]
        + [f"dx_{j}" for j in range(N_PHENOTYPES)]
        + [f"proc_{j}" for j in range(N_PHENOTYPES)]
    )
    gender_letters = np.array(["F", "M"])
    ethnicity_letters = np.array(["H", "N"])
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(",".join(header) + "\n")
            for i in range(len(table)):
                cells = [table.record_ids[i]]
                cells.extend(f"{v:.17g}" for v in table.features[i])
                cells.append(gender_letters[table.gender_codes[i]])
                cells.append(ethnicity_letters[table.ethnicity_codes[i]])
                cells.append(str(int(table.los_classes[i])))
                cells.extend(str(int(v)) for v in table.dx_phenotypes[i])
                cells.extend(str(int(v)) for v in table.proc_phenotypes[i])
                fh.write(",".join(cells) + "\n")
        manifest = {
            "dim": d,
            "n_records": len(table),
            "provenance": _jsonable(table.provenance),
        }
        with open(_manifest_path(path), "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise IoFailure(f"cannot write table {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


def load_table(path: str) -> FeatureTable:
    """Parse a table file; errors name the offending row and column."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read table {path}: {exc}") from exc
    if not lines:
        raise ParseError(f"{path}: empty file")
    header = lines[0].split(",")
    d = sum(1 for name in header if name.startswith("f_"))
    expected = (
        ["record_id"]
        + [f"f_{j}" for j in range(d)]
        + ["gender", "ethnicity", "los_class"]
        + [f"dx_{j}" for j in range(N_PHENOTYPES)]
        + [f"proc_{j}" for j in range(N_PHENOTYPES)]
    )
    if header != expected:
        raise ParseError(f"{path}: header does not match the documented layout")
    n_cols = len(expected)

    ids: list[str] = []
    features = np.empty((len(lines) - 1, d), dtype=np.float64)
    gender = np.empty(len(lines) - 1, dtype=np.uint8)
    ethnicity = np.empty(len(lines) - 1, dtype=np.uint8)
    los = np.empty(len(lines) - 1, dtype=np.int8)
    dx = np.empty((len(lines) - 1, N_PHENOTYPES), dtype=np.uint8)
    proc = np.empty((len(lines) - 1, N_PHENOTYPES), dtype=np.uint8)

    for i, line in enumerate(lines[1:]):
        row = i + 1
        cells = line.split(",")
        if len(cells) != n_cols:
            raise ParseError(f"{path}: row {row} has {len(cells)} cells, expected {n_cols}")
        ids.append(cells[0])
        try:
            features[i] = np.array(cells[1 : 1 + d], dtype=np.float64)
        except ValueError:
            for j, cell in enumerate(cells[1 : 1 + d]):
                try:
                    float(cell)
                except ValueError:
                    raise ParseError(
                        f"{path}: row {row}, column f_{j}: non-numeric value {cell!r}"
                    ) from None
            raise
        g = cells[1 + d]
        e = cells[2 + d]
        if g not in _GENDER_CODES:
            raise ParseError(f"{path}: row {row}, column gender: bad value {g!r}")
        if e not in _ETHNICITY_CODES:
            raise ParseError(f"{path}: row {row}, column ethnicity: bad value {e!r}")
        gender[i] = _GENDER_CODES[g]
        ethnicity[i] = _ETHNICITY_CODES[e]
        try:
            los_val = int(cells[3 + d])
        except ValueError:
            raise ParseError(
                f"{path}: row {row}, column los_class: bad value {cells[3 + d]!r}"
            ) from None
        if not 1 <= los_val <= 5:
            raise InvalidClass(f"{path}: row {row}: los_class {los_val} outside 1..5")
        los[i] = los_val
        for block, offset, name in ((dx, 4 + d, "dx"), (proc, 4 + d + N_PHENOTYPES, "proc")):
            for j in range(N_PHENOTYPES):
                cell = cells[offset + j]
                if cell not in ("0", "1"):
                    raise ParseError(
                        f"{path}: row {row}, column {name}_{j}: bad value {cell!r}"
                    )
                block[i, j] = int(cell)

    provenance: dict = {"source_file": os.path.abspath(path)}
    manifest = _manifest_path(path)
    if os.path.exists(manifest):
        with open(manifest, "r", encoding="utf-8") as fh:
            provenance.update(json.load(fh).get("provenance", {}))
    return FeatureTable(ids, features, gender, ethnicity, los, dx, proc, provenance)


# ---------------------------------------------------------------------------
# Splitting
# ---------------------------------------------------------------------------


def split(
    table: FeatureTable,
    train_fraction: float,
    stream: RandomStream,
    attribute: str = "gender",
) -> tuple[FeatureTable, FeatureTable]:
    """Stratified shuffle split on the chosen sensitive attribute.

    Per-class training counts are apportioned by largest remainder so the
    total matches round(train_fraction * n); any class with at least two
    members is then clamped to keep one member on each side, which takes
    precedence over the exact total for tiny strata (otherwise the
    counterfactual mean-swap would see an empty class).
    """
    if not 0.0 < train_fraction < 1.0:
        raise InvalidConfig(f"train_fraction {train_fraction} outside (0, 1)")
    n = len(table)
    codes = table.attribute_codes(attribute)
    target_total = round(train_fraction * n)

    class_indices = [np.flatnonzero(codes == c) for c in (0, 1)]
    exact = [train_fraction * len(idx) for idx in class_indices]
    counts = [math.floor(e) for e in exact]
    leftover = target_total - sum(counts)
    remainder_order = sorted(range(2), key=lambda c: (-(exact[c] - counts[c]), c))
    for c in remainder_order:
        if leftover <= 0:
            break
        counts[c] += 1
        leftover -= 1
    for c in (0, 1):
        if len(class_indices[c]) >= 2:
            counts[c] = min(max(counts[c], 1), len(class_indices[c]) - 1)

    train_parts, test_parts = [], []
    for c in (0, 1):
        idx = class_indices[c]
        if len(idx) == 0:
            continue
        perm = idx[stream.permutation(len(idx))]
        train_parts.append(perm[: counts[c]])
        test_parts.append(perm[counts[c] :])
    train_idx = np.sort(np.concatenate(train_parts)) if train_parts else np.array([], dtype=np.int64)
    test_idx = np.sort(np.concatenate(test_parts)) if test_parts else np.array([], dtype=np.int64)
    if len(train_idx) == 0 or len(test_idx) == 0:
        raise DegenerateSplit(
            f"fraction {train_fraction} on {n} records leaves an empty side"
        )
    return (
        table.subset(train_idx, note=f"train f={train_fraction}"),
        table.subset(test_idx, note=f"test f={train_fraction}"),
    )


# ---------------------------------------------------------------------------
# Synthetic biased-cohort generator
# ---------------------------------------------------------------------------


@dataclass
class SynthConfig:
    """Knobs for the synthetic cohort.

    A `sensitive_frac` share of feature columns carries the demographic
    signal: +bias_shift for class 1 of `biased_attribute`, -bias_shift for
    class 2. Stay length is driven by a disjoint clinical subset through an
    ordered-logit latent (`los_signal` scales the signal-to-noise ratio), so
    the downstream task stays learnable when the demographic signal is
    removed. `bias_overlap` moves that fraction of the clinical columns into
    the biased set for stress tests. Phenotype bits are independent
    Bernoulli draws per phenotype with log-odds monotone in the biased
    columns (`phenotype_link` scales the coupling), so phenotype-attribute
    associations share a direction across the block.

    `latent_rank` controls the spectral shape of the noise. None gives
    independent standard-normal columns. A positive rank draws each row from
    an r-dimensional latent mixed into the columns (plus a `latent_residual`
    isotropic remainder, rescaled to keep unit column variance), mimicking
    transformer-style embeddings whose effective rank is far below their
    width; without that structure no encoder narrower than the feature
    width could retain the stay-length signal.
    """

    n_records: int
    dim: int = 2136
    sensitive_frac: float = 0.05
    bias_shift: float = 1.0
    gender_priors: tuple[float, float] = (0.5, 0.5)
    ethnicity_priors: tuple[float, float] = (0.5, 0.5)
    los_priors: tuple[float, ...] = (0.2, 0.2, 0.2, 0.2, 0.2)
    phenotype_link: float = 1.0
    seed: int = 0
    biased_attribute: str = "gender"
    clinical_frac: float = 0.05
    los_signal: float = 2.0
    bias_overlap: float = 0.0
    latent_rank: int | None = None
    latent_residual: float = 0.5

    def validate(self) -> None:
        if self.n_records < 2:
            raise InvalidConfig("n_records must be at least 2")
        if self.dim < 2:
            raise InvalidConfig("dim must be at least 2")
        if not 0.0 < self.sensitive_frac <= 1.0:
            raise InvalidConfig("sensitive_frac must be in (0, 1]")
        if not 0.0 < self.clinical_frac <= 1.0:
            raise InvalidConfig("clinical_frac must be in (0, 1]")
        if not 0.0 <= self.bias_overlap <= 1.0:
            raise InvalidConfig("bias_overlap must be in [0, 1]")
        if self.latent_rank is not None and self.latent_rank < 1:
            raise InvalidConfig("latent_rank must be positive or None")
        if self.latent_residual < 0:
            raise InvalidConfig("latent_residual must be non-negative")
        _class_names(self.biased_attribute)
        for name, priors, k in (
            ("gender_priors", self.gender_priors, 2),
            ("ethnicity_priors", self.ethnicity_priors, 2),
            ("los_priors", self.los_priors, 5),
        ):
            if len(priors) != k or any(p < 0 for p in priors):
                raise InvalidConfig(f"{name} must be {k} non-negative probabilities")
            if abs(sum(priors) - 1.0) > 1e-9:
                raise InvalidConfig(f"{name} must sum to 1")

    @classmethod
    def cohort(cls, seed: int, bias_shift: float = 0.10, attribute: str = "gender"):
        """Scale preset: 2,429 records, 2,136 features, demographic and
        stay-length priors of a mid-size inpatient cohort, rank-256 latent
        structure. bias_shift defaults to a value calibrated so that the
        attribute is recoverable from the raw features at roughly 0.72-0.85
        probe accuracy.
        """
        return cls(
            n_records=2429,
            dim=2136,
            sensitive_frac=0.05,
            bias_shift=bias_shift,
            gender_priors=(1269 / 2429, 1160 / 2429),
            ethnicity_priors=(510 / 2429, 1919 / 2429),
            los_priors=(261 / 2429, 1319 / 2429, 542 / 2429, 164 / 2429, 143 / 2429),
            phenotype_link=0.8,
            seed=seed,
            biased_attribute=attribute,
            clinical_frac=0.05,
            los_signal=4.0,
            latent_rank=256,
            latent_residual=1.0,
        )


def _largest_remainder_counts(priors: Sequence[float], n: int) -> list[int]:
    exact = [p * n for p in priors]
    counts = [math.floor(e) for e in exact]
    order = sorted(range(len(priors)), key=lambda c: (-(exact[c] - counts[c]), c))
    for c in order[: n - sum(counts)]:
        counts[c] += 1
    return counts


def generate_synthetic(config: SynthConfig) -> FeatureTable:
    """Draw a cohort per the config; see `SynthConfig` for the mechanics.

    Ground-truth biased and clinical column indices are recorded in the
    table provenance. Deterministic: config + seed fix every byte.
    """
    config.validate()
    stream = RandomStream(config.seed)
    n, d = config.n_records, config.dim

    gender = (stream.uniform(n) >= config.gender_priors[0]).astype(np.uint8)
    ethnicity = (stream.uniform(n) >= config.ethnicity_priors[0]).astype(np.uint8)
    if config.latent_rank is None:
        features = stream.normal(n * d).reshape(n, d)
    else:
        r = config.latent_rank
        latent = stream.normal(n * r).reshape(n, r)
        mixing = stream.normal(r * d).reshape(r, d) / np.sqrt(r)
        features = latent @ mixing
        if config.latent_residual > 0:
            features += config.latent_residual * stream.normal(n * d).reshape(n, d)
        features /= np.sqrt(1.0 + config.latent_residual**2)

    n_biased = max(1, round(config.sensitive_frac * d))
    col_perm = stream.permutation(d)
    biased_idx = np.sort(col_perm[:n_biased])
    remaining = col_perm[n_biased:]
    n_clinical = max(1, round(config.clinical_frac * d))
    n_shared = min(round(config.bias_overlap * n_clinical), n_biased)
    clinical_parts = [remaining[: n_clinical - n_shared]]
    if n_shared:
        clinical_parts.append(biased_idx[:n_shared])
    clinical_idx = np.sort(np.concatenate(clinical_parts))

    codes = gender if config.biased_attribute == "gender" else ethnicity
    signs = np.where(codes == 0, 1.0, -1.0)
    features[:, biased_idx] += config.bias_shift * signs[:, None]

    # Demographic score seen by the phenotype sampler: mean over the biased
    # columns, normalized so its spread is O(1) whatever the column count.
    demo_score = features[:, biased_idx].mean(axis=1) * np.sqrt(n_biased)

    # Independent Bernoulli membership per phenotype, log-odds monotone in
    # the biased columns. All strengths within a block share a sign, so
    # every phenotype over-samples the same class and the centroids tilt
    # coherently instead of cancelling across a partition; the procedure
    # block is coupled more weakly than the diagnostic block.
    pheno_base = np.log(np.linspace(0.35, 0.12, N_PHENOTYPES))
    pheno_base -= np.log1p(-np.exp(pheno_base))  # prevalence -> logit
    pheno_strength = np.linspace(1.25, 0.75, N_PHENOTYPES)
    blocks = []
    for block_scale in (1.0, 0.6):
        logits = pheno_base[None, :] + (
            config.phenotype_link * block_scale
        ) * np.outer(demo_score, pheno_strength)
        probs = 1.0 / (1.0 + np.exp(-logits))
        u = stream.uniform(n * N_PHENOTYPES).reshape(n, N_PHENOTYPES)
        blocks.append((u < probs).astype(np.uint8))
    dx, proc = blocks

    clinical_score = features[:, clinical_idx].sum(axis=1) / np.sqrt(n_clinical)
    u = np.clip(stream.uniform(n), 1e-12, 1.0 - 1e-12)
    logistic_noise = np.log(u / (1.0 - u))
    latent = config.los_signal * clinical_score + logistic_noise
    los_counts = _largest_remainder_counts(config.los_priors, n)
    order = np.argsort(latent, kind="stable")
    los = np.empty(n, dtype=np.int8)
    start = 0
    for cls, count in enumerate(los_counts, start=1):
        los[order[start : start + count]] = cls
        start += count

    provenance = {
        "source": "synthetic",
        "config": _jsonable(
            {
                "n_records": n,
                "dim": d,
                "sensitive_frac": config.sensitive_frac,
                "bias_shift": config.bias_shift,
                "gender_priors": config.gender_priors,
                "ethnicity_priors": config.ethnicity_priors,
                "los_priors": config.los_priors,
                "phenotype_link": config.phenotype_link,
                "seed": config.seed,
                "biased_attribute": config.biased_attribute,
                "clinical_frac": config.clinical_frac,
                "los_signal": config.los_signal,
                "bias_overlap": config.bias_overlap,
                "latent_rank": config.latent_rank,
                "latent_residual": config.latent_residual,
            }
        ),
        "seed": config.seed,
        "biased_indices": biased_idx.tolist(),
        "clinical_indices": clinical_idx.tolist(),
    }
    ids = [f"rec{i:06d}" for i in range(n)]
    return FeatureTable(ids, features, gender, ethnicity, los, dx, proc, provenance)

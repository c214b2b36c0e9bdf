"""End-to-end protocol orchestration.

One pipeline run covers, per sensitive attribute and training fraction:
stratified split, minority oversampling of the training side, sensitive-
feature selection, contrastive training of the plain and cutout-regularized
variants, embedding, the effect-size audit, and the downstream benchmark
(stay-length task plus sensitive-attribute probes). Reports are written as
aligned text and JSON; every byte is a function of the config and master
seed (timings are kept in memory only, never emitted).

Grid-cell failures (a diverging training run, a degenerate audit cell) are
recorded in the run manifest and do not abort the remaining cells; config
errors fail fast.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .dataset import FeatureTable, SynthConfig, generate_synthetic, load_table, split
from .downstream import ALL_KINDS, EvalReport, VariantData, evaluate
from .errors import ConfigError, InvalidConfig, IoFailure, NumericalError
from .fairness import AuditInput, EffectSizeReport, audit
from .numerics import RandomStream
from .preprocess import SensitiveProfile, select_sensitive_features, smote
from .trainer import (
    TrainConfig,
    TrainReport,
    embed_matrix,
    load_checkpoint,
    save_checkpoint,
    train,
)

__all__ = [
    "VALID_FRACTIONS",
    "VALID_VARIANTS",
    "ExperimentConfig",
    "PipelineResult",
    "run_pipeline",
    "fraction_sweep",
    "emit_reports",
    "write_embeddings",
    "read_embeddings",
]

VALID_FRACTIONS = (0.2, 0.4, 0.6, 0.8)
VALID_VARIANTS = ("raw", "debias_clr", "debias_clr_r")
PROBE_RAW_VARIANTS = ("all_features", "sensitive_features")


@dataclass
class ExperimentConfig:
    seed: int
    outdir: str
    table_path: str | None = None
    synth: SynthConfig | None = None
    attributes: list[str] = field(default_factory=lambda: ["gender"])
    fractions: list[float] = field(default_factory=lambda: [0.8])
    variants: list[str] = field(default_factory=lambda: list(VALID_VARIANTS))
    train: TrainConfig = field(default_factory=TrainConfig)
    downstream_hyper: dict = field(default_factory=dict)
    downstream_kinds: list[str] = field(default_factory=lambda: list(ALL_KINDS))
    smote_k: int = 5

    def validate(self) -> None:
        if (self.table_path is None) == (self.synth is None):
            raise InvalidConfig("exactly one of table_path or synth must be given")
        if not self.attributes or any(a not in ("gender", "ethnicity") for a in self.attributes):
            raise InvalidConfig(f"attributes must be gender/ethnicity, got {self.attributes}")
        if not self.fractions:
            raise InvalidConfig("at least one training fraction is required")
        for f in self.fractions:
            if not any(abs(f - v) < 1e-9 for v in VALID_FRACTIONS):
                raise InvalidConfig(f"fraction {f} not in {VALID_FRACTIONS}")
        if len(set(self.fractions)) != len(self.fractions):
            raise InvalidConfig("fractions must be unique")
        if not self.variants or any(v not in VALID_VARIANTS for v in self.variants):
            raise InvalidConfig(f"variants must be a subset of {VALID_VARIANTS}")
        if any(k not in ALL_KINDS for k in self.downstream_kinds):
            raise InvalidConfig(f"downstream kinds must be a subset of {ALL_KINDS}")
        if self.smote_k < 1:
            raise InvalidConfig("smote_k must be at least 1")
        self.train.validate()
        if self.synth is not None:
            self.synth.validate()

    def to_json_dict(self) -> dict:
        out = {
            "seed": self.seed,
            "outdir": self.outdir,
            "table_path": self.table_path,
            "synth": dataclasses.asdict(self.synth) if self.synth else None,
            "attributes": self.attributes,
            "fractions": self.fractions,
            "variants": self.variants,
            "train": self.train.to_dict(),
            "downstream_hyper": self.downstream_hyper,
            "downstream_kinds": list(self.downstream_kinds),
            "smote_k": self.smote_k,
        }
        return out

    @classmethod
    def from_json_dict(cls, payload: dict) -> "ExperimentConfig":
        synth = payload.get("synth")
        train_cfg = payload.get("train") or {}
        return cls(
            seed=payload["seed"],
            outdir=payload["outdir"],
            table_path=payload.get("table_path"),
            synth=SynthConfig(**{**synth, "los_priors": tuple(synth["los_priors"]),
                                 "gender_priors": tuple(synth["gender_priors"]),
                                 "ethnicity_priors": tuple(synth["ethnicity_priors"])})
            if synth else None,
            attributes=list(payload.get("attributes", ["gender"])),
            fractions=[float(f) for f in payload.get("fractions", [0.8])],
            variants=list(payload.get("variants", VALID_VARIANTS)),
            train=TrainConfig(**train_cfg),
            downstream_hyper=payload.get("downstream_hyper", {}),
            downstream_kinds=list(payload.get("downstream_kinds", ALL_KINDS)),
            smote_k=payload.get("smote_k", 5),
        )

    @classmethod
    def load(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                return cls.from_json_dict(json.load(fh))
        except OSError as exc:
            raise IoFailure(f"cannot read experiment config {path}: {exc}") from exc
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidConfig(f"bad experiment config {path}: {exc}") from exc


@dataclass
class PipelineResult:
    config: ExperimentConfig
    effect_reports: dict[str, EffectSizeReport] = field(default_factory=dict)
    los_reports: dict[tuple[str, float], EvalReport] = field(default_factory=dict)
    probe_reports: dict[tuple[str, float], EvalReport] = field(default_factory=dict)
    train_reports: dict[tuple[str, float, str], TrainReport] = field(default_factory=dict)
    profiles: dict[tuple[str, float], SensitiveProfile] = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    files: list[str] = field(default_factory=list)


def _write_atomic(path: str, text: str) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_embeddings(path: str, record_ids, matrix: np.ndarray) -> None:
    """CSV with header record_id,e_0..e_{K-1}, 17 significant digits."""
    k = matrix.shape[1]
    lines = ["record_id," + ",".join(f"e_{j}" for j in range(k))]
    for rid, row in zip(record_ids, matrix):
        lines.append(rid + "," + ",".join(f"{v:.17g}" for v in row))
    _write_atomic(path, "\n".join(lines) + "\n")


def read_embeddings(path: str) -> tuple[list[str], np.ndarray]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise IoFailure(f"cannot read embeddings {path}: {exc}") from exc
    ids, rows = [], []
    for line in lines[1:]:
        cells = line.split(",")
        ids.append(cells[0])
        rows.append(np.array(cells[1:], dtype=np.float64))
    return ids, np.array(rows)


def _load_input_table(config: ExperimentConfig) -> FeatureTable:
    if config.table_path is not None:
        return load_table(config.table_path)
    return generate_synthetic(config.synth)


def _frac_tag(fraction: float) -> str:
    return f"f{int(round(fraction * 100)):02d}"


def _train_variants(
    config: ExperimentConfig,
    attribute: str,
    fraction: float,
    train_bal: FeatureTable,
    profile: SensitiveProfile,
    master: RandomStream,
    result: PipelineResult,
    outdir: str | None,
):
    """Fit the requested debiasing variants; both reuse one derived seed so
    the only difference between them is the cutout mask."""
    fitted = {}
    cell_seed = master.child(f"train:{attribute}:{fraction}").seed
    for variant in config.variants:
        if variant == "raw":
            continue
        cfg = dataclasses.replace(
            config.train,
            cutout_enabled=(variant == "debias_clr_r"),
            seed=cell_seed,
        )
        key = (attribute, fraction, variant)
        try:
            params, report = train(train_bal, profile, cfg)
        except NumericalError as exc:
            result.failures.append(f"train {key}: {type(exc).__name__}: {exc}")
            continue
        result.train_reports[key] = report
        fitted[variant] = params
        if outdir:
            path = os.path.join(
                outdir,
                f"ckpt_{attribute}_{_frac_tag(fraction)}_{variant}_seed{config.seed}.npz",
            )
            save_checkpoint(params, cfg, path)
            result.files.append(path)
    return fitted


def run_pipeline(config: ExperimentConfig, write_files: bool = True) -> PipelineResult:
    """Execute the full protocol for every (attribute, fraction) cell."""
    config.validate()
    outdir = config.outdir if write_files else None
    if outdir:
        os.makedirs(outdir, exist_ok=True)
    table = _load_input_table(config)
    master = RandomStream(config.seed)
    result = PipelineResult(config=config)

    for attribute in config.attributes:
        audit_cells: list[AuditInput] = []
        for fraction in config.fractions:
            train_tbl, test_tbl = split(
                table, fraction, master.child(f"split:{attribute}:{fraction}"), attribute
            )
            overlap = set(train_tbl.record_ids) & set(test_tbl.record_ids)
            if overlap:
                raise RuntimeError(f"leakage guard tripped: {sorted(overlap)[:3]}")
            train_bal = smote(
                train_tbl,
                attribute,
                k=config.smote_k,
                stream=master.child(f"smote:{attribute}:{fraction}"),
            )
            profile = select_sensitive_features(train_bal, attribute)
            result.profiles[(attribute, fraction)] = profile
            if outdir:
                path = os.path.join(
                    outdir,
                    f"profile_{attribute}_{_frac_tag(fraction)}_seed{config.seed}.json",
                )
                profile.save(path)
                result.files.append(path)

            fitted = _train_variants(
                config, attribute, fraction, train_bal, profile, master, result, outdir
            )

            # The audit and the downstream grid run on the original (not
            # oversampled) training rows and the held-out remainder.
            los_variants: dict[str, VariantData] = {}
            probe_variants: dict[str, VariantData] = {}
            for variant in config.variants:
                if variant == "raw":
                    emb_train, emb_test = train_tbl.features, test_tbl.features
                    probe_variants["all_features"] = VariantData(emb_train, emb_test)
                    sens = profile.sensitive_indices
                    probe_variants["sensitive_features"] = VariantData(
                        train_tbl.features[:, sens], test_tbl.features[:, sens]
                    )
                elif variant in fitted:
                    emb_train = embed_matrix(fitted[variant], train_tbl.features)
                    emb_test = embed_matrix(fitted[variant], test_tbl.features)
                    probe_variants[variant] = VariantData(emb_train, emb_test)
                else:
                    continue
                los_variants[variant] = VariantData(emb_train, emb_test)
                audit_cells.append(
                    AuditInput(
                        fraction=fraction,
                        variant=variant,
                        embeddings=emb_train,
                        class_codes=train_tbl.attribute_codes(attribute),
                        dx_bits=train_tbl.dx_phenotypes,
                        proc_bits=train_tbl.proc_phenotypes,
                    )
                )

            result.los_reports[(attribute, fraction)] = evaluate(
                los_variants,
                train_tbl.los_binary(),
                test_tbl.los_binary(),
                "length_of_stay",
                master.child(f"eval:{attribute}:{fraction}"),
                kinds=config.downstream_kinds,
                hyper=config.downstream_hyper,
            )
            result.probe_reports[(attribute, fraction)] = evaluate(
                probe_variants,
                train_tbl.attribute_codes(attribute),
                test_tbl.attribute_codes(attribute),
                "sensitive_probe",
                master.child(f"probe:{attribute}:{fraction}"),
                kinds=config.downstream_kinds,
                hyper=config.downstream_hyper,
            )

        report = audit(attribute, audit_cells)
        result.effect_reports[attribute] = report
        for key, msg in report.failures.items():
            result.failures.append(f"audit {attribute} {key}: {msg}")

    if outdir:
        emit_reports(result, outdir)
    return result


def emit_reports(result: PipelineResult, outdir: str) -> list[str]:
    """Write every report as JSON plus aligned text; returns the paths."""
    os.makedirs(outdir, exist_ok=True)
    seed = result.config.seed
    written = []

    def emit(stem: str, json_payload: dict, text: str) -> None:
        jpath = os.path.join(outdir, stem + ".json")
        tpath = os.path.join(outdir, stem + ".txt")
        _write_atomic(jpath, _json_text(json_payload))
        _write_atomic(tpath, text)
        written.extend([jpath, tpath])

    for attribute, report in result.effect_reports.items():
        emit(f"effect_sizes_{attribute}_seed{seed}", report.to_json_dict(), report.to_text())
    for (attribute, fraction), report in result.los_reports.items():
        emit(
            f"eval_los_{attribute}_{_frac_tag(fraction)}_seed{seed}",
            report.to_json_dict(),
            report.to_text(),
        )
    for (attribute, fraction), report in result.probe_reports.items():
        emit(
            f"probe_{attribute}_{_frac_tag(fraction)}_seed{seed}",
            report.to_json_dict(),
            report.to_text(),
        )

    train_payload = {
        f"{attr}:{_frac_tag(frac)}:{variant}": {
            "epoch_losses": rep.epoch_losses,
            "final_loss": rep.final_loss,
            "config": rep.config,
            "n_pairs": rep.n_pairs,
        }
        for (attr, frac, variant), rep in result.train_reports.items()
    }
    tr_path = os.path.join(outdir, f"train_reports_seed{seed}.json")
    _write_atomic(tr_path, _json_text(train_payload))
    written.append(tr_path)

    config_echo = result.config.to_json_dict()
    config_echo.pop("outdir")  # keep report bytes independent of location
    manifest = {
        "seed": seed,
        "config": config_echo,
        "failures": result.failures,
        "files": sorted(os.path.basename(p) for p in written + result.files),
    }
    mpath = os.path.join(outdir, f"run_manifest_seed{seed}.json")
    _write_atomic(mpath, _json_text(manifest))
    written.append(mpath)
    result.files.extend(written)
    return written


def fraction_sweep(config: ExperimentConfig, write_files: bool = True):
    """Pipeline over at least two fractions plus a qualitative trend summary.

    The summary compares |effect size| at the largest fraction against the
    smallest, per attribute, variant, and target block.
    """
    if len(config.fractions) < 2:
        raise ConfigError("fraction_sweep needs at least two fractions")
    result = run_pipeline(config, write_files=write_files)
    lo, hi = min(config.fractions), max(config.fractions)
    summary = {}
    for attribute, report in result.effect_reports.items():
        for variant in report.variants():
            for block in ("diagnostic_codes", "procedure_reports"):
                try:
                    d_lo = abs(report.value(lo, variant, block))
                    d_hi = abs(report.value(hi, variant, block))
                except KeyError:
                    continue
                summary[f"{attribute}:{variant}:{block}"] = {
                    "abs_at_smallest": d_lo,
                    "abs_at_largest": d_hi,
                    "trend": "decreased" if d_hi <= d_lo else "increased",
                }
    if write_files:
        path = os.path.join(config.outdir, f"sweep_summary_seed{config.seed}.json")
        _write_atomic(path, _json_text(summary))
        result.files.append(path)
    return result, summary

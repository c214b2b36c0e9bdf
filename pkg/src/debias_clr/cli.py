"""Command-line interface.

Subcommands: synth, select, train, embed, audit, eval, run, report.
Exit codes: 0 success; 1 configuration or input-content error; 2 numerical
failure; 3 filesystem I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from .dataset import SynthConfig, generate_synthetic, load_table, split, write_table
from .downstream import ALL_KINDS, EvalReport, VariantData, evaluate
from .errors import (
    ConfigError,
    DebiasClrError,
    IoFailure,
    NumericalError,
)
from .experiment import (
    ExperimentConfig,
    fraction_sweep,
    read_embeddings,
    run_pipeline,
    write_embeddings,
)
from .fairness import AuditInput, EffectSizeReport, audit
from .numerics import RandomStream
from .preprocess import SensitiveProfile, select_sensitive_features, smote
from .trainer import TrainConfig, embed_matrix, load_checkpoint, save_checkpoint, train

__all__ = ["main"]


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would sys.exit(2); remap to code 1
        raise ConfigError(message)


def _add_train_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--epochs", type=int, default=100)
    p.add_argument("--batch-size", type=int, default=1024)
    p.add_argument("--temperature", type=float, default=0.5)
    p.add_argument("--base-lr", type=float, default=None)
    p.add_argument("--lars-trust", type=float, default=0.001)
    p.add_argument("--weight-decay", type=float, default=1e-6)
    p.add_argument("--cutout", action="store_true")
    p.add_argument("--cutout-fraction", type=float, default=0.2)


def _train_config(args, seed: int) -> TrainConfig:
    return TrainConfig(
        temperature=args.temperature,
        batch_size=args.batch_size,
        epochs=args.epochs,
        base_lr=args.base_lr,
        lars_trust=args.lars_trust,
        weight_decay=args.weight_decay,
        cutout_enabled=args.cutout,
        cutout_fraction=args.cutout_fraction,
        seed=seed,
    )


def _parse_variant_paths(pairs: list[str]) -> dict[str, str]:
    out = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"expected VARIANT=PATH, got {pair!r}")
        variant, path = pair.split("=", 1)
        out[variant] = path
    return out


def build_parser() -> _Parser:
    parser = _Parser(prog="debias-clr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic cohort table")
    p.add_argument("--out", required=True, help="table file to write")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--config", help="JSON file with SynthConfig fields")
    p.add_argument("--cohort", action="store_true", help="use the 2,429 x 2,136 preset")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--sensitive-frac", type=float, default=0.05)
    p.add_argument("--bias-shift", type=float, default=1.0)
    p.add_argument("--phenotype-link", type=float, default=1.0)
    p.add_argument("--attribute", default="gender", choices=["gender", "ethnicity"])

    p = sub.add_parser("select", help="emit a sensitive-feature profile")
    p.add_argument("--table", required=True)
    p.add_argument("--attribute", required=True, choices=["gender", "ethnicity"])
    p.add_argument("--out", required=True)
    p.add_argument("--balance", action="store_true", help="oversample before selecting")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="fit the debiasing encoder")
    p.add_argument("--table", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--out", required=True, help="checkpoint (.npz) to write")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--balance", action="store_true", help="oversample the table first")
    _add_train_flags(p)

    p = sub.add_parser("embed", help="write representations for a table")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--table", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("audit", help="effect-size audit of one or more embeddings")
    p.add_argument("--table", required=True)
    p.add_argument("--profile", required=True)
    p.add_argument("--embeddings", nargs="*", metavar="VARIANT=CSV",
                   help="extra variants; raw features are always audited")
    p.add_argument("--fraction", type=float, default=0.8,
                   help="fraction label recorded in the report")
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--text", help="optional aligned-text report path")

    p = sub.add_parser("eval", help="downstream benchmark on a table")
    p.add_argument("--table", required=True)
    p.add_argument("--task", required=True, choices=["length_of_stay", "sensitive_probe"])
    p.add_argument("--attribute", default="gender", choices=["gender", "ethnicity"])
    p.add_argument("--fraction", type=float, default=0.8)
    p.add_argument("--checkpoints", nargs="*", metavar="VARIANT=NPZ")
    p.add_argument("--kinds", nargs="*", default=list(ALL_KINDS), choices=list(ALL_KINDS))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--text", help="optional aligned-text report path")

    p = sub.add_parser("run", help="full pipeline from a config file")
    p.add_argument("--config", required=True, help="ExperimentConfig JSON")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument("--sweep", action="store_true",
                   help="also emit the fraction-trend summary (needs >= 2 fractions)")

    p = sub.add_parser("report", help="re-render a JSON report as aligned text")
    p.add_argument("--infile", required=True)
    p.add_argument("--kind", required=True, choices=["effect_sizes", "eval"])
    p.add_argument("--out", help="write here instead of stdout")
    return parser


def _cmd_synth(args) -> int:
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        payload["seed"] = args.seed
        for key in ("gender_priors", "ethnicity_priors", "los_priors"):
            if key in payload:
                payload[key] = tuple(payload[key])
        cfg = SynthConfig(**payload)
    elif args.cohort:
        cfg = SynthConfig.cohort(seed=args.seed, bias_shift=args.bias_shift,
                                 attribute=args.attribute)
    else:
        cfg = SynthConfig(
            n_records=args.n,
            dim=args.dim,
            sensitive_frac=args.sensitive_frac,
            bias_shift=args.bias_shift,
            phenotype_link=args.phenotype_link,
            seed=args.seed,
            biased_attribute=args.attribute,
        )
    table = generate_synthetic(cfg)
    write_table(table, args.out)
    print(f"wrote {len(table)} records, dim {table.dim} -> {args.out}")
    return 0


def _cmd_select(args) -> int:
    table = load_table(args.table)
    if args.balance:
        table = smote(table, args.attribute, stream=RandomStream(args.seed))
    profile = select_sensitive_features(table, args.attribute)
    profile.save(args.out)
    print(f"selected {profile.sensitive_indices.size} sensitive features -> {args.out}")
    return 0


def _cmd_train(args) -> int:
    table = load_table(args.table)
    profile = SensitiveProfile.load(args.profile)
    if args.balance:
        table = smote(table, profile.attribute, stream=RandomStream(args.seed))
    config = _train_config(args, args.seed)
    params, report = train(table, profile, config)
    save_checkpoint(params, config, args.out)
    print(
        f"trained {config.epochs} epochs on {report.n_pairs} pairs; "
        f"loss {report.epoch_losses[0]:.4f} -> {report.final_loss:.4f}; "
        f"checkpoint -> {args.out}"
    )
    return 0


def _cmd_embed(args) -> int:
    params, _ = load_checkpoint(args.checkpoint)
    table = load_table(args.table)
    H = embed_matrix(params, table.features)
    write_embeddings(args.out, table.record_ids, H)
    print(f"wrote {H.shape[0]} x {H.shape[1]} embeddings -> {args.out}")
    return 0


def _cmd_audit(args) -> int:
    table = load_table(args.table)
    profile = SensitiveProfile.load(args.profile)
    codes = table.attribute_codes(profile.attribute)
    cells = [
        AuditInput(args.fraction, "raw", table.features, codes,
                   table.dx_phenotypes, table.proc_phenotypes)
    ]
    for variant, path in _parse_variant_paths(args.embeddings).items():
        ids, matrix = read_embeddings(path)
        if ids != table.record_ids:
            raise ConfigError(f"embeddings {path} do not cover the table's records")
        cells.append(AuditInput(args.fraction, variant, matrix, codes,
                                table.dx_phenotypes, table.proc_phenotypes))
    report = audit(profile.attribute, cells)
    report.save(args.out)
    if args.text:
        with open(args.text, "w", encoding="utf-8") as fh:
            fh.write(report.to_text())
    print(report.to_text(), end="")
    return 0 if not report.failures else 2


def _cmd_eval(args) -> int:
    table = load_table(args.table)
    stream = RandomStream(args.seed)
    train_tbl, test_tbl = split(table, args.fraction, stream.child("split"), args.attribute)
    variants = {"raw": VariantData(train_tbl.features, test_tbl.features)}
    for variant, path in _parse_variant_paths(args.checkpoints).items():
        params, _ = load_checkpoint(path)
        variants[variant] = VariantData(
            embed_matrix(params, train_tbl.features),
            embed_matrix(params, test_tbl.features),
        )
    if args.task == "length_of_stay":
        y_train, y_test = train_tbl.los_binary(), test_tbl.los_binary()
    else:
        y_train = train_tbl.attribute_codes(args.attribute)
        y_test = test_tbl.attribute_codes(args.attribute)
    report = evaluate(
        variants, y_train, y_test, args.task, stream.child("eval"), kinds=args.kinds
    )
    report.save(args.out)
    if args.text:
        with open(args.text, "w", encoding="utf-8") as fh:
            fh.write(report.to_text())
    print(report.to_text(), end="")
    failed = [c for c in report.cells.values() if c.error]
    return 0 if not failed else 2


def _cmd_run(args) -> int:
    config = ExperimentConfig.load(args.config)
    config.seed = args.seed
    if args.out:
        config.outdir = args.out
    if args.sweep:
        result, summary = fraction_sweep(config)
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        result = run_pipeline(config)
    print(f"wrote {len(result.files)} artifacts under {config.outdir}")
    if result.failures:
        print("cell failures:", file=sys.stderr)
        for failure in result.failures:
            print(f"  {failure}", file=sys.stderr)
        return 2
    return 0


def _cmd_report(args) -> int:
    if args.kind == "effect_sizes":
        text = EffectSizeReport.load(args.infile).to_text()
    else:
        text = EvalReport.load(args.infile).to_text()
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return 0


_COMMANDS = {
    "synth": _cmd_synth,
    "select": _cmd_select,
    "train": _cmd_train,
    "embed": _cmd_embed,
    "audit": _cmd_audit,
    "eval": _cmd_eval,
    "run": _cmd_run,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except IoFailure as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io failure: {exc}", file=sys.stderr)
        return 3
    except DebiasClrError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

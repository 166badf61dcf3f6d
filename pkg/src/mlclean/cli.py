"""Command-line surface for the preprocessing engine and benchmark harness.

Every subcommand reads a dataset CSV plus a sectioned key=value config file
(see ``config.py`` for the grammar) and writes its outputs under
``--out-dir``. Exit codes: 0 success, 1 validation/config error, 2 stage
infeasibility, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import replace
from pathlib import Path

from . import config as cfgmod
from .dataset import load_dataset, save_dataset
from .errors import (
    ConfigError,
    DegenerateGroupError,
    InfeasibleStrategyError,
    MLCleanError,
    ParameterError,
    SchemaError,
    StageError,
    ValidationError,
)
from .harness import bench_orderings, impact, inject_duplicates, inject_poison
from .model import TrainConfig, evaluate, load_model, train
from .pipeline import run_pipeline
from .resolve import resolve
from .reweigh import reweigh
from .sanitize import sanitize

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlclean",
        description="Data sanitization, cleaning, and reweighing for ML training sets.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, needs_input: bool = True, **kwargs):
        p = sub.add_parser(name, **kwargs)
        if needs_input:
            p.add_argument("input", help="dataset CSV path")
        p.add_argument("--config", required=True, help="sectioned key=value config file")
        p.add_argument("--seed", type=int, default=None, help="override all configured seeds")
        p.add_argument("--out-dir", default=".", help="directory for output files")
        return p

    add("inject-dups", help="append Zipf-replicated duplicate records")
    add("inject-poison", help="append out-of-range poison records")
    add("sanitize", help="drop anomalous records via clustering")
    add("clean", help="merge duplicate records (entity resolution)")
    add("reweigh", help="equalize weighted positive ratios across groups")
    add("train", help="fit the weighted linear classifier")
    p = add("evaluate", help="score a saved model on a dataset")
    p.add_argument("--model", required=True, help="model file from the train command")
    add("pipeline", help="run the configured stage pipeline end to end")
    add("bench", help="compare pipeline orderings on one corrupted split")
    p = add("impact", help="accuracy delta from dropping ids out of training")
    p.add_argument("--ids", required=True, help="comma-separated record ids")
    return parser


def _override_seeds(config: dict, seed: int | None) -> dict:
    if seed is None:
        return config
    out = {name: dict(section) for name, section in config.items()}
    for section in ("sanitize", "split", "train", "duplicates", "poison"):
        out.setdefault(section, {})["seed"] = str(seed)
    return out


def _write_ground_truth(truth, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["kind", "id", "related"])
        for orig, copies in truth.duplicate_clusters.items():
            writer.writerow(["duplicate", orig, ";".join(copies)])
        for pid in sorted(truth.poison_ids):
            writer.writerow(["poison", pid, ""])


def _run(args) -> int:
    config = _override_seeds(cfgmod.load_config(args.config), args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    schema = cfgmod.schema_from_config(config)
    dataset = load_dataset(args.input, schema) if hasattr(args, "input") else None

    if args.command == "inject-dups":
        injected, truth = inject_duplicates(dataset, cfgmod.duplicate_spec_from_config(config))
        save_dataset(injected, out_dir / "injected.csv")
        _write_ground_truth(truth, out_dir / "ground_truth.csv")
    elif args.command == "inject-poison":
        injected, truth = inject_poison(dataset, cfgmod.poison_spec_from_config(config))
        save_dataset(injected, out_dir / "injected.csv")
        _write_ground_truth(truth, out_dir / "ground_truth.csv")
    elif args.command == "sanitize":
        k, seed = cfgmod.sanitize_k_seed(config)
        cleaned, report = sanitize(
            dataset, k=k, seed=seed, policy=cfgmod.sanitize_policy_from_config(config)
        )
        save_dataset(cleaned, out_dir / "sanitized.csv")
        report.save_csv(out_dir / "sanitize_report.csv")
        print(f"flagged {len(report.flagged)} of {len(dataset)} records")
    elif args.command == "clean":
        resolved, log = resolve(
            dataset,
            rules=cfgmod.match_rules_from_config(config),
            policy=cfgmod.merge_policy_from_config(config),
        )
        save_dataset(resolved, out_dir / "cleaned.csv")
        log.save_csv(out_dir / "merge_log.csv")
        print(f"merged {len(dataset) - len(resolved)} records in {len(log.entries)} groups")
    elif args.command == "reweigh":
        reweighed, report = reweigh(dataset, cfgmod.reweigh_strategy_from_config(config))
        save_dataset(reweighed, out_dir / "reweighed.csv")
        report.save_csv(out_dir / "reweigh_report.csv")
        print("group ratios:", {g: round(r, 6) for g, r in report.ratios_after.items()})
    elif args.command == "train":
        model = train(dataset, cfgmod.train_config_from_config(config))
        model.save(out_dir / "model.txt")
        print(f"model written to {out_dir / 'model.txt'}")
    elif args.command == "evaluate":
        model = load_model(args.model)
        metrics = evaluate(model, dataset)
        parity = "UNDEFINED" if metrics.parity_ratio is None else f"{metrics.parity_ratio:.6f}"
        with open(out_dir / "metrics.csv", "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["accuracy", "parity_ratio"])
            writer.writerow([repr(metrics.accuracy), parity])
        print(f"accuracy={metrics.accuracy:.6f} parity_ratio={parity}")
    elif args.command == "pipeline":
        report = run_pipeline(dataset, cfgmod.pipeline_config_from_config(config))
        (out_dir / "pipeline_report.txt").write_text(report.to_text() + "\n")
        (out_dir / "pipeline_report.csv").write_text(report.to_csv())
        print(report.to_text())
    elif args.command == "bench":
        methods = cfgmod.bench_methods(config)
        configs = []
        labels = []
        for m in methods:
            if m.upper() == "NONE":
                continue  # the baseline row is always emitted
            configs.append(cfgmod.method_to_pipeline(config, m))
            labels.append(m)
        split_seed, test_fraction, _ = cfgmod.split_params(config)
        table = bench_orderings(
            dataset,
            configs,
            labels,
            dup_spec=cfgmod.duplicate_spec_from_config(config)
            if "duplicates" in config
            else None,
            poison_spec=cfgmod.poison_spec_from_config(config)
            if "poison" in config
            else None,
            split_seed=split_seed,
            test_fraction=test_fraction,
            baseline_train=cfgmod.train_config_from_config(config),
        )
        (out_dir / "bench.csv").write_text(table.to_csv())
        (out_dir / "bench.txt").write_text(table.to_text() + "\n")
        print(table.to_text())
    elif args.command == "impact":
        split_seed, test_fraction, _ = cfgmod.split_params(config)
        delta = impact(
            dataset,
            [i.strip() for i in args.ids.split(",") if i.strip()],
            train_config=cfgmod.train_config_from_config(config),
            split_seed=split_seed,
            test_fraction=test_fraction,
        )
        print(f"accuracy_delta={delta:+.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _run(args)
    except (StageError, InfeasibleStrategyError, DegenerateGroupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, SchemaError, ValidationError, ParameterError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except MLCleanError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())

"""
Main entry point - noise-robust classification experiments.

Run from project root:
python -m src.main <synth|cluster|train|evaluate|sweep> --config configs/quick.json
"""

import sys
from pathlib import Path

# Load .env early so AMNN_* overrides reach config
sys.path.insert(0, str(Path(__file__).parent))
try:
    from dotenv import load_dotenv
    load_dotenv(Path(__file__).resolve().parent.parent / ".env")
except ImportError:
    pass

import argparse
import json
import logging
from dataclasses import replace
from typing import Optional

import numpy as np
import pandas as pd

from clustering.density_peak import fit_density_peaks, write_decision_graph
from config import CSV_FLOAT_FORMAT, LOG_LEVEL
from data.datasets import Dataset, apply_standardization, load_csv, write_csv, synthesize, with_noise
from data.noise import NoiseSpec
from errors import AmnnError, ConfigError, DataError
from evaluation.metrics import REPORT_COLUMNS, MetricsReport, adjusted_rand
from experiment.report import emit_report
from experiment.settings import ExperimentConfig, parse_config, with_seed
from experiment.sweep import evaluate_model, prepare_data, run_sweep, train_and_evaluate
from network.amnn import AmnnModel
from network.history import TrainingLog
from network.serialize import load_model, save_model

logger = logging.getLogger("amnn")


# ------------------ helpers ------------------

def _load_config(args) -> ExperimentConfig:
    config = parse_config(args.config) if args.config else ExperimentConfig()
    if args.seed is not None:
        config = with_seed(config, args.seed)
    return config


def _out_dir(args, config: ExperimentConfig, leaf: str = "") -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return Path(config.output_dir) / leaf if leaf else Path(config.output_dir)


def _metrics_csv(metrics: MetricsReport) -> str:
    frame = pd.DataFrame([metrics.as_row()], columns=REPORT_COLUMNS)
    return frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def _output_size(model) -> int:
    net = model.subnets[0] if isinstance(model, AmnnModel) else model
    return net.output_size


def _class_ids(dataset: Dataset) -> np.ndarray:
    """Integer label names are class ids; anything else keeps first-appearance order."""
    names = dataset.label_names
    try:
        ids = [int(n) for n in names]
    except ValueError:
        logger.warning("Labels are not integer class ids; using first-appearance order %s", list(names))
        return dataset.labels
    return np.asarray(ids, dtype=np.int64)[dataset.labels]


# ------------------ subcommands ------------------

def cmd_synth(args) -> None:
    config = _load_config(args)
    spec = config.data.synth
    if spec is None:
        raise ConfigError("synth needs a synth data source", "data.synth")
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    path = write_csv(synthesize(spec), args.out or Path(config.output_dir) / "synth.csv")
    logger.info("Wrote %d rows to %s", sum(spec.counts()), path)
    print(path)


def cmd_cluster(args) -> None:
    config = _load_config(args)
    data = prepare_data(config)
    cluster_model, profile, dm = fit_density_peaks(
        data.train.features, config.clustering.center_policy(), config.clustering.cutoff_percent
    )
    out = _out_dir(args, config, "cluster")
    out.mkdir(parents=True, exist_ok=True)
    write_decision_graph(profile, cluster_model.centers, out / "decision_graph.csv")
    pd.DataFrame({
        "index": np.arange(data.train.size),
        "cluster": cluster_model.assignments,
        "label": data.train.labels,
    }).to_csv(out / "assignments.csv", index=False, lineterminator="\n")

    summary = {
        "center_count": cluster_model.center_count,
        "centers": [int(c) for c in cluster_model.centers],
        "cutoff": dm.cutoff,
        "ari": adjusted_rand(data.train.labels, cluster_model.assignments) if data.train.size >= 2 else None,
    }
    logger.info("Found %d centers; outputs in %s", cluster_model.center_count, out)
    print(json.dumps(summary))


def cmd_train(args) -> None:
    config = _load_config(args)
    if len(config.algorithms) != 1:
        raise ConfigError("train expects exactly one algorithm", "algorithms")
    algorithm = config.algorithms[0]
    seed = config.seeds[0]
    data = prepare_data(config)
    train = data.train
    if args.rate:
        train = with_noise(train, NoiseSpec(config.noise.kind, args.rate, seed))

    log = TrainingLog(_out_dir(args, config) / "logs" / f"{algorithm}_s{seed}.csv") if config.log_training else None
    model, metrics = train_and_evaluate(algorithm, train, data.test, config, seed, log)
    if log is not None and log.rows:
        log.write()
    path = save_model(model, args.model or _out_dir(args, config) / "models" / f"{algorithm}_s{seed}.json",
                      data.standardization)
    logger.info("Model saved to %s", path)
    sys.stdout.write(_metrics_csv(metrics))


def cmd_evaluate(args) -> None:
    model, scaling = load_model(args.model)
    if args.data:
        dataset = load_csv(args.data, args.label_column)
        labels = _class_ids(dataset)
        features = dataset.features
        if scaling is not None:
            features = apply_standardization(features, scaling.means, scaling.stddevs)
        classes = _output_size(model)
        if labels.size and labels.max() >= classes:
            raise DataError(f"label id {int(labels.max())} exceeds the model's {classes} classes")
        test = Dataset(features=features, labels=labels, class_count=classes)
    else:
        test = prepare_data(_load_config(args)).test
    sys.stdout.write(_metrics_csv(evaluate_model(model, test)))


def cmd_sweep(args) -> None:
    config = _load_config(args)
    report = run_sweep(config, workers=args.workers)
    emit_report(report, _out_dir(args, config))


COMMANDS = {
    "synth": cmd_synth,
    "cluster": cmd_cluster,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "sweep": cmd_sweep,
}


class CliParser(argparse.ArgumentParser):
    """Usage errors exit 2 with the same JSON error line as command failures."""

    def error(self, message: str):
        words = self.prog.split()
        command = words[1] if len(words) > 1 else None
        self.print_usage(sys.stderr)
        print(json.dumps({"error": "UsageError", "command": command, "message": message}), file=sys.stderr)
        self.exit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = CliParser(prog="amnn", description="Noise-robust classification experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="experiment config JSON (defaults when omitted)")
        p.add_argument("--seed", type=int, help="replace the config's seed list with this one seed")
        return p

    p = add("synth", "write synthetic blob data as CSV")
    p.add_argument("--out", help="CSV path (default <output_dir>/synth.csv)")

    p = add("cluster", "density-peak clustering of the train split")
    p.add_argument("--out", help="output directory (default <output_dir>/cluster)")

    p = add("train", "train the single configured algorithm and save the model")
    p.add_argument("--rate", type=float, default=0.0, help="train-label noise rate")
    p.add_argument("--model", help="model JSON path")
    p.add_argument("--out", help="output directory")

    p = add("evaluate", "score a saved model")
    p.add_argument("--model", required=True, help="model JSON path")
    p.add_argument("--data", help="labelled CSV (default: the config's test split)")
    p.add_argument("--label-column", default=-1, type=lambda s: int(s) if s.lstrip("-").isdigit() else s,
                   help="label column name or zero-based index")

    p = add("sweep", "noise sweep over algorithms x rates x seeds")
    p.add_argument("--out", help="report directory (default <output_dir>)")
    p.add_argument("--workers", type=int, help="parallel cells (default AMNN_WORKERS)")
    return parser


# ------------------ main ------------------

def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, LOG_LEVEL, logging.INFO),
        format="[%(name)s] %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        COMMANDS[args.command](args)
    except AmnnError as e:
        print(json.dumps({"error": type(e).__name__, "command": args.command, "message": str(e)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())

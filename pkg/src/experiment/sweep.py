"""
Noise sweep: algorithms x noise rates x seeds.

Every cell derives its own seeds from (seed, rate index, algorithm index), so a cell's
result depends only on the config and never on which other cells ran or in which order.
Noise is injected into the training split only; evaluation uses the clean test split.
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional, Union

import numpy as np
from tqdm import tqdm

from config import progress_enabled, workers as default_workers
from data.datasets import Dataset, load_csv, split, standardize, synthesize, with_noise
from data.noise import NoiseSpec
from errors import AmnnError
from evaluation.metrics import MetricsReport, evaluate
from experiment.report import SweepReport, SweepRow
from experiment.settings import ExperimentConfig
from network.amnn import AmnnModel, predict, train_amnn
from network.classic import train_classic
from network.history import TrainingLog
from network.mlp import Mlp
from network.serialize import Standardization, save_model
from robust.trainer import train_cross_entropy, train_robust

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class PreparedData:
    train: Dataset
    test: Dataset
    standardization: Optional[Standardization] = None


def cell_seed(seed: int, rate_index: int, algorithm_index: int) -> int:
    return int(np.random.SeedSequence([seed, rate_index, algorithm_index]).generate_state(1)[0])


def noise_seed(seed: int, rate_index: int) -> int:
    """Shared by every algorithm at (seed, rate) so they all see the same noisy labels."""
    return int(np.random.SeedSequence([seed, rate_index]).generate_state(1)[0])


def load_dataset(config: ExperimentConfig) -> Dataset:
    source = config.data
    if source.csv is not None:
        return load_csv(source.csv.path, source.csv.label_column)
    return synthesize(source.synth)


def prepare_data(config: ExperimentConfig) -> PreparedData:
    dataset = load_dataset(config)
    train, test = split(dataset, config.split.test_ratio, config.split.seed)
    if not config.standardize:
        return PreparedData(train, test)
    train, test, means, stddevs = standardize(train, test)
    return PreparedData(train, test, Standardization(means, stddevs))


def layer_sizes(config: ExperimentConfig, train: Dataset) -> list[int]:
    return [train.dimension, *config.hidden_sizes, train.class_count]


def train_algorithm(
    algorithm: str,
    train: Dataset,
    config: ExperimentConfig,
    seed: int,
    on_epoch=None,
) -> Union[Mlp, AmnnModel]:
    sizes = layer_sizes(config, train)
    classic = replace(config.classic, seed=seed)
    robust = replace(config.robust, seed=seed)
    if algorithm == "classic_dnn":
        return train_classic(train, sizes, classic, on_epoch)
    if algorithm == "amnn":
        return train_amnn(train, config.clustering, sizes, classic)
    if algorithm == "amnn_robust":
        return train_amnn(train, config.clustering, sizes, robust, trainer=train_robust)
    if algorithm == "robust_dnn":
        return train_robust(train, sizes, robust, on_epoch)
    if algorithm == "ce_dnn":
        return train_cross_entropy(train, sizes, robust, on_epoch=on_epoch)
    if algorithm == "dnn_mixup":
        return train_cross_entropy(train, sizes, robust, mixup_alpha=config.mixup.alpha, on_epoch=on_epoch)
    raise AmnnError(f"unknown algorithm {algorithm!r}")


def evaluate_model(model: Union[Mlp, AmnnModel], test: Dataset) -> MetricsReport:
    truth = test.clean_labels if test.clean_labels is not None else test.labels
    return evaluate(truth, predict(model, test.features), test.class_count)


def train_and_evaluate(
    algorithm: str,
    train: Dataset,
    test: Dataset,
    config: ExperimentConfig,
    seed: int,
    on_epoch=None,
) -> tuple[Union[Mlp, AmnnModel], MetricsReport]:
    model = train_algorithm(algorithm, train, config, seed, on_epoch)
    return model, evaluate_model(model, test)


@dataclass(frozen=True)
class Cell:
    algorithm_index: int
    rate_index: int
    seed: int


def _cells(config: ExperimentConfig) -> list[Cell]:
    return [
        Cell(a, r, seed)
        for a in range(len(config.algorithms))
        for r in range(len(config.noise.rates))
        for seed in config.seeds
    ]


def _failed_row(algorithm: str, rate: float, seed: int, error: Exception, started: float) -> SweepRow:
    return SweepRow(algorithm, rate, seed, MetricsReport.nan(), "failed", f"{type(error).__name__}: {error}",
                    time.perf_counter() - started)


def run_cell(config: ExperimentConfig, data: PreparedData, cell: Cell) -> SweepRow:
    algorithm = config.algorithms[cell.algorithm_index]
    rate = config.noise.rates[cell.rate_index]
    tag = f"{algorithm}_r{cell.rate_index}_s{cell.seed}"
    out = Path(config.output_dir)
    started = time.perf_counter()
    try:
        train = with_noise(data.train, NoiseSpec(config.noise.kind, rate, noise_seed(cell.seed, cell.rate_index)))
        log = TrainingLog(out / "logs" / f"{tag}.csv") if config.log_training else None
        model, metrics = train_and_evaluate(
            algorithm, train, data.test, config, cell_seed(cell.seed, cell.rate_index, cell.algorithm_index), log
        )
        if log is not None and log.rows:
            log.write()
        if config.save_models:
            save_model(model, out / "models" / f"{tag}.json", data.standardization)
    except (AmnnError, FloatingPointError) as e:
        logger.warning("Cell %s failed: %s", tag, e)
        return _failed_row(algorithm, rate, cell.seed, e, started)
    except Exception as e:
        logger.exception("Cell %s raised an unexpected error", tag)
        return _failed_row(algorithm, rate, cell.seed, e, started)
    elapsed = time.perf_counter() - started
    logger.info("Cell %s: accuracy %.4f (%.2fs)", tag, metrics.accuracy, elapsed)
    return SweepRow(algorithm, rate, cell.seed, metrics, wall_time=elapsed)


def _run_cell_task(args: tuple) -> SweepRow:
    return run_cell(*args)


def run_sweep(
    config: ExperimentConfig,
    workers: Optional[int] = None,
    progress: Optional[bool] = None,
) -> SweepReport:
    """Rows come back in (algorithm, rate, seed) order whatever the worker count."""
    data = prepare_data(config)
    cells = _cells(config)
    workers = default_workers() if workers is None else max(1, workers)
    progress = progress_enabled() if progress is None else progress
    logger.info(
        "Sweep: %d algorithms x %d rates x %d seeds on %d train / %d test rows (%d workers)",
        len(config.algorithms), len(config.noise.rates), len(config.seeds), data.train.size, data.test.size, workers,
    )

    bar = tqdm(total=len(cells), desc="sweep", disable=not progress)
    rows: list[SweepRow] = []
    if workers == 1:
        for cell in cells:
            rows.append(run_cell(config, data, cell))
            bar.update(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(_run_cell_task, [(config, data, cell) for cell in cells]):
                rows.append(row)
                bar.update(1)
    bar.close()

    failed = sum(not r.ok for r in rows)
    logger.info("Sweep finished: %d rows, %d failed", len(rows), failed)
    return SweepReport(rows=rows, label_names=data.train.label_names)

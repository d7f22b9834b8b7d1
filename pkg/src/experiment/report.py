"""
Sweep rows, their per-(algorithm, rate) aggregation, and the report files:

    rows.csv      one row per (algorithm, rate, seed), failed cells included
    summary.csv   mean and population std of every metric over the successful seeds
    summary.md    accuracy table, algorithms x noise rates, in percent
    timings.csv   wall time per cell (kept apart so rows.csv is reproducible byte for byte)
    labels.csv    class id -> original label
"""

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from config import CSV_FLOAT_FORMAT
from evaluation.metrics import REPORT_COLUMNS, MetricsReport

logger = logging.getLogger(__name__)

ROW_COLUMNS = ["algorithm", "noise_rate", "seed"] + REPORT_COLUMNS + ["status", "reason"]
SUMMARY_COLUMNS = ["algorithm", "noise_rate", "runs", "failed"] + [
    f"{metric}_{stat}" for metric in REPORT_COLUMNS for stat in ("mean", "std")
]
TIMING_COLUMNS = ["algorithm", "noise_rate", "seed", "wall_time"]


@dataclass(frozen=True)
class SweepRow:
    algorithm: str
    noise_rate: float
    seed: int
    metrics: MetricsReport
    status: str = "ok"
    reason: str = ""
    wall_time: float = 0.0

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def as_record(self) -> list:
        return [self.algorithm, self.noise_rate, self.seed] + self.metrics.as_row() + [self.status, self.reason]


@dataclass
class SweepReport:
    rows: list[SweepRow] = field(default_factory=list)
    label_names: tuple[str, ...] = ()

    def cells(self) -> list[tuple[str, float]]:
        """(algorithm, rate) pairs in first-appearance order."""
        return list(dict.fromkeys((r.algorithm, r.noise_rate) for r in self.rows))

    def summary(self) -> list[dict]:
        out = []
        for algorithm, rate in self.cells():
            group = [r for r in self.rows if r.algorithm == algorithm and r.noise_rate == rate]
            ok = np.array([r.metrics.as_row() for r in group if r.ok], dtype=float)
            entry = {"algorithm": algorithm, "noise_rate": rate, "runs": len(group), "failed": len(group) - len(ok)}
            for j, metric in enumerate(REPORT_COLUMNS):
                entry[f"{metric}_mean"] = float(ok[:, j].mean()) if len(ok) else math.nan
                entry[f"{metric}_std"] = float(ok[:, j].std()) if len(ok) else math.nan
            out.append(entry)
        return out

    def rows_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.as_record() for r in self.rows], columns=ROW_COLUMNS)

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.summary(), columns=SUMMARY_COLUMNS)

    def timings_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[r.algorithm, r.noise_rate, r.seed, r.wall_time] for r in self.rows], columns=TIMING_COLUMNS
        )


def _rate_label(rate: float) -> str:
    return f"{rate * 100:g}%"


def summary_markdown(report: SweepReport) -> str:
    rates = list(dict.fromkeys(r.noise_rate for r in report.rows))
    algorithms = list(dict.fromkeys(r.algorithm for r in report.rows))
    means = {(s["algorithm"], s["noise_rate"]): s["accuracy_mean"] for s in report.summary()}

    lines = [
        "# Clean-test accuracy (%) by train-label noise rate",
        "",
        "| algorithm | " + " | ".join(_rate_label(r) for r in rates) + " |",
        "|---|" + "---:|" * len(rates),
    ]
    for algorithm in algorithms:
        cells = []
        for rate in rates:
            value = means.get((algorithm, rate), math.nan)
            cells.append("n/a" if math.isnan(value) else f"{value * 100:.2f}")
        lines.append(f"| {algorithm} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def _write_frame(frame: pd.DataFrame, path: Path) -> Path:
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, na_rep="nan", lineterminator="\n")
    return path


def emit_report(report: SweepReport, out_dir: Union[str, Path]) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = {
        "rows": _write_frame(report.rows_frame(), out / "rows.csv"),
        "summary": _write_frame(report.summary_frame(), out / "summary.csv"),
        "timings": _write_frame(report.timings_frame(), out / "timings.csv"),
        "labels": _write_frame(
            pd.DataFrame({"class_id": range(len(report.label_names)), "label": list(report.label_names)}),
            out / "labels.csv",
        ),
    }
    md = out / "summary.md"
    md.write_text(summary_markdown(report), encoding="utf-8")
    written["markdown"] = md
    logger.info("Report written to %s (%d rows)", out, len(report.rows))
    return written


def read_rows(path: Union[str, Path]) -> list[SweepRow]:
    """Parse rows.csv back; floats round-trip exactly through the 17-digit format."""
    frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    rows = []
    for record in frame.to_dict("records"):
        rows.append(SweepRow(
            algorithm=record["algorithm"],
            noise_rate=float(record["noise_rate"]),
            seed=int(record["seed"]),
            metrics=MetricsReport(*(float(record[c]) for c in REPORT_COLUMNS)),
            status=record["status"],
            reason=record["reason"],
        ))
    return rows

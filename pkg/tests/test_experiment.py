"""Tests for experiment configs, the noise sweep, report files and the CLI."""

import io
import json
import os
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from dataclasses import replace
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

# Keep progress bars out of test output
os.environ["AMNN_PROGRESS"] = "0"

from errors import ConfigError
from evaluation.metrics import REPORT_COLUMNS, MetricsReport
from experiment.report import ROW_COLUMNS, SweepReport, SweepRow, emit_report, read_rows, summary_markdown
from experiment.settings import ExperimentConfig, config_from_dict, config_to_dict, parse_config
from experiment.sweep import Cell, _cells, cell_seed, prepare_data, run_cell, run_sweep, train_and_evaluate
from main import main as cli_main
from network.serialize import load_model


def _tiny(**overrides) -> ExperimentConfig:
    raw = {
        "data": {"synth": {"class_count": 3, "samples_per_class": 10, "dimension": 2, "seed": 1}},
        "noise": {"rates": [0.0, 0.2]},
        "algorithms": ["robust_dnn", "ce_dnn"],
        "hidden_sizes": [4],
        "robust": {"epochs": 2, "batch_size": 8, "learning_rate": 0.01},
        "classic": {"epochs": 2, "batch_size": 8},
        "seeds": [0, 1],
    }
    raw.update(overrides)
    return config_from_dict(raw)


class TestSettings(unittest.TestCase):
    def test_empty_document_gives_defaults(self):
        self.assertEqual(config_from_dict({}), ExperimentConfig())
        self.assertEqual(config_from_dict({"data": {"synth": {}}}), ExperimentConfig())
        config = ExperimentConfig()
        self.assertEqual(config.hidden_sizes, (20,))
        self.assertEqual((config.robust.q, config.robust.k), (0.7, 0.5))
        self.assertEqual((config.robust.learning_rate, config.robust.batch_size, config.robust.epochs), (1e-4, 128, 20))
        self.assertEqual(config.robust.prune_warmup_epochs, 10)
        self.assertEqual(config.split.test_ratio, 0.2)

    def test_eight_rate_grid(self):
        rates = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
        config = config_from_dict({"noise": {"rates": rates}})
        self.assertEqual(len(config.noise.rates), 8)

    def test_unknown_keys_name_their_path(self):
        with self.assertRaises(ConfigError) as ctx:
            config_from_dict({"robust": {"learnign_rate": 0.1}})
        self.assertEqual(ctx.exception.key_path, "robust.learnign_rate")
        self.assertIn("learnign_rate", str(ctx.exception))
        with self.assertRaises(ConfigError) as ctx:
            config_from_dict({"sedes": [1]})
        self.assertEqual(ctx.exception.key_path, "sedes")

    def test_type_and_range_errors_name_their_path(self):
        cases = [
            ({"robust": {"epochs": "ten"}}, "robust.epochs"),
            ({"robust": {"q": 0}}, "robust.q"),
            ({"noise": {"rates": [0.1, 1.5]}}, "noise.rates"),
            ({"standardize": 1}, "standardize"),
            ({"algorithms": ["svm"]}, "algorithms"),
            ({"algorithms": []}, "algorithms"),
            ({"seeds": []}, "seeds"),
            ({"clustering": {"policy": "fixed"}}, "clustering.centers"),
            ({"data": {"synth": {"cluster_stddev": -1}}}, "data.synth"),
        ]
        for raw, key in cases:
            with self.assertRaises(ConfigError, msg=str(raw)) as ctx:
                config_from_dict(raw)
            self.assertEqual(ctx.exception.key_path, key, str(raw))

    def test_csv_source(self):
        config = config_from_dict({"data": {"csv": {"path": "x.csv", "label_column": "y"}}})
        self.assertIsNone(config.data.synth)
        self.assertEqual(config.data.csv.label_column, "y")
        with self.assertRaises(ConfigError):
            config_from_dict({"data": {"csv": {"path": "x.csv"}, "synth": {}}})

    def test_dict_round_trip(self):
        config = _tiny()
        self.assertEqual(config_from_dict(config_to_dict(config)), config)

    def test_parse_errors_report_position(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_text('{\n  "seeds": [1,\n  }\n', encoding="utf-8")
            with self.assertRaises(ConfigError) as ctx:
                parse_config(path)
            self.assertIn("line 3", str(ctx.exception))
            with self.assertRaises(ConfigError):
                parse_config(Path(tmp) / "missing.json")

    def test_undecodable_config(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.json"
            path.write_bytes(b"\xff\xfe{}")
            with self.assertRaises(ConfigError) as ctx:
                parse_config(path)
        self.assertIn("UTF-8", str(ctx.exception))


class TestSweep(unittest.TestCase):
    def test_row_count_and_order(self):
        rates = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
        config = _tiny(noise={"rates": rates}, seeds=[0, 1, 2, 3, 4], robust={"epochs": 1, "batch_size": 8})
        report = run_sweep(config, workers=1, progress=False)
        self.assertEqual(len(report.rows), 80)
        keys = [(config.algorithms.index(r.algorithm), rates.index(r.noise_rate), r.seed) for r in report.rows]
        self.assertEqual(keys, sorted(keys))
        self.assertTrue(all(r.ok for r in report.rows))

    def test_rate_zero_matches_standalone_runs(self):
        config = _tiny(noise={"rates": [0.0]}, algorithms=["robust_dnn", "classic_dnn", "amnn"],
                       clustering={"policy": "fixed", "centers": 2}, seeds=[3])
        report = run_sweep(config, workers=1, progress=False)
        data = prepare_data(config)
        for a, row in enumerate(report.rows):
            _, metrics = train_and_evaluate(row.algorithm, data.train, data.test, config, cell_seed(3, 0, a))
            self.assertEqual(row.metrics, metrics)

    def test_cells_are_order_independent(self):
        config = _tiny()
        data = prepare_data(config)
        cells = _cells(config)
        forward = [run_cell(config, data, c).as_record() for c in cells]
        backward = [run_cell(config, data, c).as_record() for c in reversed(cells)][::-1]
        self.assertEqual(forward, backward)

    def test_parallel_workers_give_the_same_rows(self):
        config = _tiny()
        serial = run_sweep(config, workers=1, progress=False)
        parallel = run_sweep(config, workers=2, progress=False)
        self.assertEqual([r.as_record() for r in serial.rows], [r.as_record() for r in parallel.rows])

    def test_test_labels_are_never_noised(self):
        config = _tiny()
        data = prepare_data(config)
        before = data.test.labels.copy()
        run_cell(config, data, Cell(algorithm_index=0, rate_index=1, seed=0))
        np.testing.assert_array_equal(data.test.labels, before)
        self.assertIsNone(data.test.clean_labels)

    def test_failed_cells_are_recorded(self):
        config = _tiny(algorithms=["amnn", "robust_dnn"], clustering={"policy": "fixed", "centers": 500})
        report = run_sweep(config, workers=1, progress=False)
        failed = [r for r in report.rows if not r.ok]
        self.assertEqual(len(failed), 4)
        self.assertTrue(all(r.algorithm == "amnn" and "ClusteringError" in r.reason for r in failed))
        self.assertTrue(all(np.isnan(r.metrics.accuracy) for r in failed))
        self.assertTrue(all(r.ok for r in report.rows if r.algorithm == "robust_dnn"))

    def test_unexpected_training_errors_become_failed_rows(self):
        with mock.patch("experiment.sweep.train_robust", side_effect=ValueError("operands could not be broadcast")):
            report = run_sweep(_tiny(), workers=1, progress=False)
        robust = [r for r in report.rows if r.algorithm == "robust_dnn"]
        self.assertEqual(len(robust), 4)
        self.assertTrue(all(r.status == "failed" and r.reason.startswith("ValueError:") for r in robust))
        self.assertTrue(all(r.ok for r in report.rows if r.algorithm == "ce_dnn"))

    def test_logs_and_models_written_on_request(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = replace(_tiny(noise={"rates": [0.2]}, algorithms=["robust_dnn"], seeds=[0]),
                             output_dir=tmp, log_training=True, save_models=True)
            run_sweep(config, workers=1, progress=False)
            log = pd.read_csv(Path(tmp) / "logs" / "robust_dnn_r0_s0.csv")
            model, scaling = load_model(Path(tmp) / "models" / "robust_dnn_r0_s0.json")
        self.assertEqual(list(log["epoch"]), [0, 1])
        self.assertEqual(model.layer_sizes, [2, 4, 3])
        self.assertIsNotNone(scaling)


class TestReport(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_empty_report_writes_headers_only(self):
        emit_report(SweepReport(), self.dir)
        self.assertEqual((self.dir / "rows.csv").read_text(), ",".join(ROW_COLUMNS) + "\n")
        self.assertEqual(len((self.dir / "summary.csv").read_text().splitlines()), 1)

    def test_markdown_cells_are_percent_with_two_decimals(self):
        rows = [
            SweepRow("ce_dnn", 0.1, 0, MetricsReport(0.5, 0.5, 0.5, 0.5, 0.2)),
            SweepRow("ce_dnn", 0.1, 1, MetricsReport(0.6, 0.6, 0.6, 0.6, 0.3)),
            SweepRow("robust_dnn", 0.1, 0, MetricsReport(0.987654, 0.9, 0.9, 0.9, 0.9)),
            SweepRow("robust_dnn", 0.1, 1, MetricsReport.nan(), status="failed", reason="boom"),
        ]
        md = summary_markdown(SweepReport(rows))
        self.assertIn("| ce_dnn | 55.00 |", md)
        self.assertIn("| robust_dnn | 98.77 |", md)
        self.assertIn("10%", md)

    def test_rows_round_trip_and_summary_is_recomputable(self):
        report = run_sweep(_tiny(), workers=1, progress=False)
        emit_report(report, self.dir)
        self.assertEqual(read_rows(self.dir / "rows.csv"), [replace(r, wall_time=0.0) for r in report.rows])

        rows = pd.read_csv(self.dir / "rows.csv")
        summary = pd.read_csv(self.dir / "summary.csv")
        for _, s in summary.iterrows():
            group = rows[(rows.algorithm == s.algorithm) & (rows.noise_rate == s.noise_rate)]
            for metric in REPORT_COLUMNS:
                self.assertAlmostEqual(s[f"{metric}_mean"], group[metric].mean(), delta=1e-12)
                self.assertAlmostEqual(s[f"{metric}_std"], group[metric].std(ddof=0), delta=1e-12)
        self.assertTrue((self.dir / "timings.csv").exists())
        self.assertEqual(pd.read_csv(self.dir / "labels.csv")["label"].tolist(), [0, 1, 2])

    def test_same_config_gives_identical_files(self):
        config = _tiny()
        for name in ("a", "b"):
            emit_report(run_sweep(config, workers=1, progress=False), self.dir / name)
        for filename in ("rows.csv", "summary.csv", "summary.md", "labels.csv"):
            self.assertEqual((self.dir / "a" / filename).read_bytes(), (self.dir / "b" / filename).read_bytes())


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _config(self, **overrides) -> str:
        raw = {
            "data": {"synth": {"samples_per_class": 20, "seed": 2}},
            "algorithms": ["robust_dnn"],
            "hidden_sizes": [5],
            "robust": {"epochs": 3, "batch_size": 16, "learning_rate": 0.01},
            "noise": {"rates": [0.0, 0.3]},
            "seeds": [0],
            "output_dir": str(self.dir / "out"),
        }
        raw.update(overrides)
        path = self.dir / "config.json"
        path.write_text(json.dumps(raw), encoding="utf-8")
        return str(path)

    def _run(self, *argv) -> tuple[int, str, str]:
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = cli_main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def test_train_needs_exactly_one_algorithm(self):
        code, _, err = self._run("train", "--config", self._config(algorithms=["robust_dnn", "ce_dnn"]))
        self.assertEqual(code, 1)
        line = json.loads(err.strip().splitlines()[-1])
        self.assertEqual((line["error"], line["command"]), ("ConfigError", "train"))
        self.assertIn("train expects exactly one algorithm", line["message"])

    def test_synth_train_evaluate(self):
        config = self._config()
        data = self.dir / "blobs.csv"
        model = self.dir / "model.json"
        self.assertEqual(self._run("synth", "--config", config, "--out", str(data))[0], 0)
        code, out, _ = self._run("train", "--config", config, "--model", str(model))
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[0], ",".join(REPORT_COLUMNS))

        code, out, _ = self._run("evaluate", "--model", str(model), "--data", str(data))
        self.assertEqual(code, 0)
        lines = out.splitlines()
        self.assertEqual(len(lines), 2)
        self.assertEqual(lines[0], ",".join(REPORT_COLUMNS))
        self.assertTrue(0.0 <= float(lines[1].split(",")[0]) <= 1.0)

    def test_cluster_dumps_decision_graph(self):
        out_dir = self.dir / "cluster"
        code, out, _ = self._run("cluster", "--config", self._config(clustering={"policy": "fixed", "centers": 3}),
                                 "--out", str(out_dir))
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["center_count"], 3)
        self.assertTrue((out_dir / "decision_graph.csv").exists())
        self.assertTrue((out_dir / "assignments.csv").exists())

    def test_sweep_rerun_is_identical(self):
        config = self._config()
        for name in ("first", "second"):
            self.assertEqual(self._run("sweep", "--config", config, "--out", str(self.dir / name))[0], 0)
        self.assertEqual((self.dir / "first" / "rows.csv").read_bytes(), (self.dir / "second" / "rows.csv").read_bytes())

    def test_seed_override(self):
        config = self._config(seeds=[0, 1, 2])
        self.assertEqual(self._run("sweep", "--config", config, "--seed", "7", "--out", str(self.dir / "s"))[0], 0)
        self.assertEqual(set(pd.read_csv(self.dir / "s" / "rows.csv")["seed"]), {7})

    def test_missing_model_file(self):
        code, _, err = self._run("evaluate", "--model", str(self.dir / "nope.json"))
        self.assertEqual(code, 1)
        self.assertIn('"command": "evaluate"', err)

    def test_bad_arguments_exit_with_two(self):
        for argv, command in ((["bogus"], None), (["sweep", "--workers", "many"], "sweep")):
            err = io.StringIO()
            with redirect_stderr(err):
                with self.assertRaises(SystemExit) as ctx:
                    cli_main(argv)
            self.assertEqual(ctx.exception.code, 2)
            line = json.loads(err.getvalue().strip().splitlines()[-1])
            self.assertEqual((line["error"], line["command"]), ("UsageError", command))

    def test_undecodable_config_reports_json_error(self):
        path = self.dir / "bad.json"
        path.write_bytes(b"\xff\xfe{}")
        code, _, err = self._run("sweep", "--config", str(path))
        self.assertEqual(code, 1)
        line = json.loads(err.strip().splitlines()[-1])
        self.assertEqual((line["error"], line["command"]), ("ConfigError", "sweep"))


if __name__ == "__main__":
    unittest.main()

"""Tests for dataset ingestion, synthesis, splitting, noise injection and mixup."""

import sys
import tempfile
import unittest
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from data.augment import mixup, one_hot
from data.datasets import (
    Dataset,
    SynthSpec,
    load_csv,
    split,
    standardize,
    synthesize,
    with_noise,
    write_csv,
)
from data.noise import NoiseSpec, inject_noise, round_half_up
from errors import DataError, ShapeError


class TestLoadCsv(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def _write(self, text: str) -> Path:
        path = self.dir / "data.csv"
        path.write_text(text, encoding="utf-8")
        return path

    def test_header_and_label_by_name(self):
        path = self._write("a,kind,b\n1.0,cat,2.0\n3.0,dog,4.0\n5.0,cat,6.0\n")
        ds = load_csv(path, label_column="kind")
        self.assertEqual(ds.features.tolist(), [[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
        self.assertEqual(ds.labels.tolist(), [0, 1, 0])
        self.assertEqual(ds.label_names, ("cat", "dog"))
        self.assertEqual(ds.class_count, 2)

    def test_headerless_numeric_labels_by_index(self):
        path = self._write("2,0.5,0.25\n1,1.5,2.5\n")
        ds = load_csv(path, label_column=0)
        self.assertEqual(ds.size, 2)
        self.assertEqual(ds.dimension, 2)
        self.assertEqual(ds.label_names, ("2", "1"))

    def test_ragged_row_reports_row(self):
        path = self._write("1,2,a\n3,4\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 2)

    def test_non_numeric_cell_reports_position(self):
        path = self._write("x0,x1,label\n1,2,a\n3,oops,b\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertEqual((ctx.exception.row, ctx.exception.column), (3, 2))

    def test_missing_and_empty_files(self):
        with self.assertRaises(DataError):
            load_csv(self.dir / "nope.csv")
        with self.assertRaises(DataError):
            load_csv(self._write(""))

    def test_long_row_reports_row(self):
        path = self._write("1,2,a\n3,4,b,extra\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertEqual(ctx.exception.row, 2)

    def test_blank_lines_keep_file_positions(self):
        path = self._write("x0,x1,label\n1,2,a\n\n3,bad,b\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertEqual((ctx.exception.row, ctx.exception.column), (4, 2))

    def test_undecodable_file(self):
        path = self.dir / "latin.csv"
        path.write_bytes(b"\xff\xfe1,2\n")
        with self.assertRaises(DataError) as ctx:
            load_csv(path)
        self.assertIn("UTF-8", str(ctx.exception))

    def test_written_floats_reload_exactly(self):
        features = np.array([[0.1 + 0.2, 1e-300], [-2.0 / 3.0, 123456.789]])
        ds = Dataset(features=features, labels=[0, 1], class_count=2)
        back = load_csv(write_csv(ds, self.dir / "exact.csv"), label_column="label")
        np.testing.assert_array_equal(back.features, features)

    def test_write_then_load_keeps_label_names(self):
        ds = Dataset(features=np.array([[0.1, 0.2], [0.3, 0.4]]), labels=[1, 0], class_count=2, label_names=("no", "yes"))
        path = write_csv(ds, self.dir / "out.csv")
        back = load_csv(path, label_column="label")
        np.testing.assert_array_equal(back.features, ds.features)
        self.assertEqual([back.label_names[i] for i in back.labels], ["yes", "no"])


class TestDataset(unittest.TestCase):
    def test_rejects_out_of_range_labels(self):
        with self.assertRaises(DataError):
            Dataset(features=np.zeros((2, 1)), labels=[0, 2], class_count=2)

    def test_rejects_non_finite_features(self):
        with self.assertRaises(DataError):
            Dataset(features=np.array([[np.nan]]), labels=[0], class_count=1)

    def test_subset_carries_clean_labels(self):
        ds = Dataset(features=np.arange(4.0).reshape(4, 1), labels=[0, 1, 1, 0], class_count=2, clean_labels=[0, 1, 0, 0])
        sub = ds.subset([2, 3])
        self.assertEqual(sub.labels.tolist(), [1, 0])
        self.assertEqual(sub.clean_labels.tolist(), [0, 0])


class TestSynthesize(unittest.TestCase):
    def test_counts_and_grouping(self):
        ds = synthesize(SynthSpec(class_count=3, samples_per_class=50, dimension=4, seed=3))
        self.assertEqual(ds.features.shape, (150, 4))
        self.assertEqual(ds.class_histogram().tolist(), [50, 50, 50])
        self.assertTrue(np.all(np.diff(ds.labels) >= 0))

    def test_class_counts_override(self):
        ds = synthesize(SynthSpec(class_count=2, class_counts=(5, 9)))
        self.assertEqual(ds.class_histogram().tolist(), [5, 9])

    def test_deterministic(self):
        a = synthesize(SynthSpec(seed=11))
        b = synthesize(SynthSpec(seed=11))
        np.testing.assert_array_equal(a.features, b.features)

    def test_invalid_spec(self):
        with self.assertRaises(DataError):
            SynthSpec(cluster_stddev=0.0)
        with self.assertRaises(DataError):
            SynthSpec(class_count=2, class_counts=(1, 2, 3))


class TestSplitAndStandardize(unittest.TestCase):
    def test_stratified_split(self):
        ds = synthesize(SynthSpec(class_count=3, samples_per_class=100))
        train, test = split(ds, 0.2, seed=0)
        self.assertEqual(test.size, 60)
        self.assertEqual(train.size, 240)
        self.assertEqual(test.class_histogram().tolist(), [20, 20, 20])
        rows = {tuple(r) for r in np.vstack([train.features, test.features])}
        self.assertEqual(len(rows), 300)

    def test_zero_ratio_keeps_everything_in_train(self):
        ds = synthesize(SynthSpec(samples_per_class=4))
        train, test = split(ds, 0.0, seed=0)
        self.assertEqual((train.size, test.size), (12, 0))

    def test_unstratified_fallback_for_singleton_class(self):
        ds = Dataset(features=np.arange(10.0).reshape(10, 1), labels=[0] * 9 + [1], class_count=2)
        train, test = split(ds, 0.3, seed=1)
        self.assertEqual(test.size, 3)
        self.assertEqual(train.size + test.size, 10)

    def test_split_rejects_bad_ratio(self):
        ds = synthesize(SynthSpec(samples_per_class=4))
        with self.assertRaises(DataError):
            split(ds, 1.0, seed=0)

    def test_split_is_deterministic(self):
        ds = synthesize(SynthSpec(class_count=3, samples_per_class=30))
        a_train, a_test = split(ds, 0.2, seed=5)
        b_train, b_test = split(ds, 0.2, seed=5)
        np.testing.assert_array_equal(a_train.features, b_train.features)
        np.testing.assert_array_equal(a_test.labels, b_test.labels)
        small = Dataset(features=np.arange(10.0).reshape(10, 1), labels=[0, 1] * 5, class_count=2)
        train, test = split(small, 0.2, seed=0)
        self.assertEqual((train.size, test.size), (8, 2))

    def test_standardize_is_idempotent(self):
        ds = synthesize(SynthSpec(class_count=2, samples_per_class=40, dimension=3, seed=6))
        once = standardize(ds)[0]
        twice = standardize(once)[0]
        np.testing.assert_allclose(twice.features, once.features, atol=1e-9)

    def test_standardize_uses_train_statistics(self):
        features = np.array([[1.0, 5.0], [3.0, 5.0], [5.0, 5.0]])
        train = Dataset(features=features, labels=[0, 1, 0], class_count=2)
        test = Dataset(features=np.array([[3.0, 7.0]]), labels=[1], class_count=2)
        train2, test2, means, stddevs = standardize(train, test)
        np.testing.assert_allclose(train2.features[:, 0].mean(), 0.0, atol=1e-12)
        np.testing.assert_allclose(train2.features[:, 0].std(), 1.0, atol=1e-12)
        self.assertEqual(train2.features[:, 1].tolist(), [0.0, 0.0, 0.0])
        self.assertEqual(test2.features.tolist(), [[0.0, 0.0]])
        self.assertEqual(means.tolist(), [3.0, 5.0])


class TestNoise(unittest.TestCase):
    def test_round_half_up(self):
        self.assertEqual(round_half_up(2.5), 3)
        self.assertEqual(round_half_up(0.49), 0)

    def test_exact_flip_counts_without_self_flips(self):
        rates = [0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]
        for n in (100, 1000):
            labels = np.arange(n) % 3
            for kind in ("symmetric", "pair-asymmetric"):
                for i, rate in enumerate(rates):
                    noise = inject_noise(labels, NoiseSpec(kind, rate, seed=i), 3)
                    self.assertEqual(noise.flip_count, round_half_up(rate * n))
                    flipped = noise.flip_mask
                    self.assertTrue(np.all(noise.noisy_labels[flipped] != labels[flipped]))
                    np.testing.assert_array_equal(noise.noisy_labels[~flipped], labels[~flipped])
                    np.testing.assert_array_equal(noise.clean_labels, labels)

    def test_small_sample_counts(self):
        labels = np.arange(10) % 2
        for i, rate in enumerate([0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40]):
            noise = inject_noise(labels, NoiseSpec(rate=rate, seed=i), 2)
            self.assertEqual(int((noise.noisy_labels != labels).sum()), round_half_up(rate * 10))
        self.assertEqual(inject_noise(labels, NoiseSpec(rate=0.05), 2).flip_count, 1)
        self.assertEqual(inject_noise(labels, NoiseSpec(rate=0.4), 2).flip_count, 4)
        flipped_all = inject_noise(labels, NoiseSpec(rate=1.0), 2)
        np.testing.assert_array_equal(flipped_all.noisy_labels, 1 - labels)

    def test_symmetric_offsets_are_uniform(self):
        labels = np.zeros(30_000, dtype=np.int64)
        noise = inject_noise(labels, NoiseSpec(rate=1.0, seed=3), 4)
        counts = np.bincount(noise.noisy_labels, minlength=4)
        self.assertEqual(counts[0], 0)
        for c in counts[1:]:
            self.assertLess(abs(int(c) - 10_000), 400)

    def test_pair_asymmetric_targets_next_class(self):
        labels = np.array([0, 1, 2, 3] * 5)
        noise = inject_noise(labels, NoiseSpec("pair-asymmetric", 0.5, seed=2), 4)
        flipped = noise.flip_mask
        np.testing.assert_array_equal(noise.noisy_labels[flipped], (labels[flipped] + 1) % 4)

    def test_zero_rate_is_identity(self):
        labels = np.array([0, 1, 1, 0])
        noise = inject_noise(labels, NoiseSpec(rate=0.0), 2)
        np.testing.assert_array_equal(noise.noisy_labels, labels)
        self.assertEqual(noise.flip_count, 0)

    def test_deterministic_per_seed(self):
        labels = np.arange(200) % 4
        a = inject_noise(labels, NoiseSpec(rate=0.3, seed=9), 4)
        b = inject_noise(labels, NoiseSpec(rate=0.3, seed=9), 4)
        np.testing.assert_array_equal(a.noisy_labels, b.noisy_labels)

    def test_invalid_specs(self):
        with self.assertRaises(DataError):
            NoiseSpec(rate=1.5)
        with self.assertRaises(DataError):
            NoiseSpec(kind="open-set")
        with self.assertRaises(DataError):
            inject_noise([0, 0, 0], NoiseSpec(rate=0.5), 1)

    def test_with_noise_keeps_clean_shadow(self):
        ds = synthesize(SynthSpec(samples_per_class=20))
        noisy = with_noise(ds, NoiseSpec(rate=0.25, seed=4))
        np.testing.assert_array_equal(noisy.clean_labels, ds.labels)
        self.assertEqual(int((noisy.labels != ds.labels).sum()), 15)


class TestMixup(unittest.TestCase):
    def setUp(self):
        self.x = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 4.0]])
        self.y = one_hot([0, 1, 2], 3)

    def test_lambda_one_returns_inputs(self):
        mx, my = mixup(self.x, self.y, alpha=0.2, seed=0, lam=1.0)
        np.testing.assert_array_equal(mx, self.x)
        np.testing.assert_array_equal(my, self.y)

    def test_targets_stay_distributions(self):
        mx, my = mixup(self.x, self.y, alpha=0.2, seed=5)
        self.assertEqual(mx.shape, self.x.shape)
        np.testing.assert_allclose(my.sum(axis=1), 1.0, atol=1e-12)
        self.assertTrue(np.all(my >= 0))

    def test_self_mix_is_a_fixed_point(self):
        x = np.tile([[1.5, -2.0]], (5, 1))
        y = one_hot([1] * 5, 3)
        for lam in (0.0, 0.3, 0.9):
            mx, my = mixup(x, y, alpha=0.2, seed=1, lam=lam)
            np.testing.assert_allclose(mx, x, atol=1e-12)
            np.testing.assert_allclose(my, y, atol=1e-12)

    def test_random_mixes_stay_bounded(self):
        rng = np.random.default_rng(4)
        for trial in range(1000):
            size = int(rng.integers(1, 9))
            _, my = mixup(rng.normal(size=(size, 2)), one_hot(rng.integers(0, 3, size=size), 3), alpha=0.2, seed=trial)
            np.testing.assert_allclose(my.sum(axis=1), 1.0, atol=1e-12)
            self.assertTrue(np.all((my >= 0.0) & (my <= 1.0)))

    def test_rejects_bad_input(self):
        with self.assertRaises(DataError):
            mixup(self.x[:0], self.y[:0], alpha=0.2, seed=0)
        with self.assertRaises(ShapeError):
            mixup(self.x, self.y[:2], alpha=0.2, seed=0)
        with self.assertRaises(DataError):
            mixup(self.x, self.y, alpha=0.0, seed=0)


if __name__ == "__main__":
    unittest.main()

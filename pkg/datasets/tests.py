# FILE: datasets/tests.py
# ============================================================
"""
Tests for Datasets App

These tests cover:
- Dataset validation and helpers
- Synthetic sine, decomposition and tabular tasks
- CSV loading errors and round trips
- Standardization and k-fold plans
"""

import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from HeteroLab.exceptions import ConfigurationError, DatasetError
from HeteroLab.utils import bitwise_equal
from predictive.distributions import NormalDiag

from .base import Dataset
from .io import load_csv_dataset, save_csv_dataset
from .preprocessing import Standardization, kfold_split, standardize
from .synthetic import (
    SINE_DOMAIN, generate_decomposition_pair, generate_sine_dataset, generate_tabular_dataset,
    sine_mean, sine_noise_law,
)


class DatasetTest(SimpleTestCase):
    """
    Tests for the Dataset container
    """

    def test_vectors_become_columns(self):
        """1-D inputs become single columns with default names"""
        dataset = Dataset([1.0, 2.0], [3.0, 4.0])
        self.assertEqual(dataset.X.shape, (2, 1))
        self.assertEqual(dataset.feature_names, ('x0',))
        self.assertEqual(dataset.target_names, ('y0',))

    def test_read_only(self):
        """Arrays cannot be modified after construction"""
        dataset = Dataset([1.0], [2.0])
        with self.assertRaises(ValueError):
            dataset.X[0, 0] = 5.0

    def test_non_finite_location(self):
        """Non-finite entries are reported with row and column"""
        with self.assertRaises(DatasetError) as ctx:
            Dataset([[1.0, 2.0], [3.0, np.nan]], [0.0, 1.0])
        self.assertEqual((ctx.exception.row, ctx.exception.column), (1, 1))

    def test_row_mismatch(self):
        """X and Y must have the same number of rows"""
        with self.assertRaises(DatasetError):
            Dataset([1.0, 2.0], [1.0])

    def test_group_means(self):
        """Replicate groups collapse to their mean target"""
        dataset = Dataset([1.0, 1.0, 2.0], [0.0, 2.0, 5.0], groups=['a', 'a', 'b'])
        means = dataset.group_means()
        np.testing.assert_array_equal(means.Y.ravel(), [1.0, 5.0])
        np.testing.assert_array_equal(means.X.ravel(), [1.0, 2.0])


class SineTaskTest(SimpleTestCase):
    """
    Tests for the sine task
    """

    def setUp(self):
        self.task = generate_sine_dataset(seed=0)
        self.dataset = self.task.dataset

    def test_size(self):
        """498 sampled points plus two isolated points"""
        self.assertEqual(self.dataset.n_rows, 500)
        inner = self.dataset.X[:-2, 0]
        self.assertTrue(np.all((inner >= SINE_DOMAIN[0]) & (inner <= SINE_DOMAIN[1])))

    def test_isolated_points(self):
        """Isolated points are noiseless x sin x"""
        X = self.dataset.X[-2:, 0]
        Y = self.dataset.Y[-2:, 0]
        np.testing.assert_array_equal(X, [0.5, 9.5])
        self.assertAlmostEqual(Y[0], 0.2397, delta=1e-4)
        self.assertAlmostEqual(Y[1], 9.5 * math.sin(9.5))
        self.assertAlmostEqual(Y[1], -0.7133, delta=1e-3)

    def test_reproducible(self):
        """Same seed, same draw"""
        again = generate_sine_dataset(seed=0).dataset
        self.assertTrue(bitwise_equal(again.Y, self.dataset.Y))
        other = generate_sine_dataset(seed=1).dataset
        self.assertFalse(bitwise_equal(other.Y, self.dataset.Y))

    def test_noise_modes(self):
        """'variance' reads 0.1 + |0.5 x| as a variance"""
        std = sine_noise_law('std')(np.array([4.0]))
        variance = sine_noise_law('variance')(np.array([4.0]))
        self.assertAlmostEqual(float(std[0]), 2.1)
        self.assertAlmostEqual(float(variance[0]) ** 2, 2.1)

    def test_unknown_noise_mode(self):
        """Unknown noise modes are rejected"""
        with self.assertRaises(ConfigurationError):
            sine_noise_law('precision')


class DecompositionPairTest(SimpleTestCase):
    """
    Tests for the clean/noisy pair
    """

    def test_clean_targets_are_the_mean(self):
        """Clean targets equal the mean function exactly"""
        pair = generate_decomposition_pair(3, sine_noise_law('std'), n=50)
        np.testing.assert_array_equal(pair.clean.Y[:, 0], sine_mean(pair.clean.X[:, 0]))
        self.assertTrue(bitwise_equal(pair.clean.X, pair.noisy.X))
        self.assertFalse(bitwise_equal(pair.clean.Y, pair.noisy.Y))

    def test_zero_noise(self):
        """A zero noise law makes both targets identical"""
        pair = generate_decomposition_pair(3, lambda x: 0.0, n=20)
        self.assertTrue(bitwise_equal(pair.clean.Y, pair.noisy.Y))

    def test_negative_noise(self):
        """Negative noise scales are rejected"""
        with self.assertRaises(DatasetError):
            generate_decomposition_pair(3, lambda x: -1.0, n=5)


class TabularTaskTest(SimpleTestCase):
    """
    Tests for the synthetic tabular task
    """

    def test_shape(self):
        """n rows, d uniform features in [-1, 1]"""
        dataset = generate_tabular_dataset(0, n=120, d=6).dataset
        self.assertEqual(dataset.X.shape, (120, 6))
        self.assertLessEqual(np.abs(dataset.X).max(), 1.0)

    def test_needs_five_features(self):
        """Fewer than 5 features is a configuration error"""
        with self.assertRaises(ConfigurationError):
            generate_tabular_dataset(0, d=4)


class CsvTest(SimpleTestCase):
    """
    Tests for CSV ingestion
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.root = Path(self.tmp.name)

    def write(self, name, text):
        path = self.root / name
        path.write_text(text, encoding='utf-8')
        return path

    def test_load(self):
        """Non-target columns become X in file order"""
        path = self.write('data.csv', 'a,target,b\n1,10,2\n3,30,4\n')
        dataset = load_csv_dataset(path, ['target'])
        self.assertEqual(dataset.feature_names, ('a', 'b'))
        np.testing.assert_array_equal(dataset.X, [[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(dataset.Y, [[10.0], [30.0]])

    def test_comma_separated_targets(self):
        """Targets may be given as a comma-separated string"""
        path = self.write('data.csv', 'a,t1,t2\n1,2,3\n')
        dataset = load_csv_dataset(path, 't2, t1')
        self.assertEqual(dataset.target_names, ('t2', 't1'))

    def test_missing_column(self):
        """Unknown target columns are reported"""
        path = self.write('data.csv', 'a,b\n1,2\n')
        with self.assertRaises(DatasetError) as ctx:
            load_csv_dataset(path, ['y'])
        self.assertEqual(ctx.exception.column, 'y')

    def test_non_numeric_cell(self):
        """Non-numeric cells are reported by row and column"""
        path = self.write('data.csv', 'a,y\n1,2\n3,oops\n')
        with self.assertRaises(DatasetError) as ctx:
            load_csv_dataset(path, ['y'])
        self.assertEqual((ctx.exception.row, ctx.exception.column), (2, 'y'))

    def test_empty_cell(self):
        """Empty cells are reported"""
        path = self.write('data.csv', 'a,y\n1,2\n,4\n')
        with self.assertRaises(DatasetError) as ctx:
            load_csv_dataset(path, ['y'])
        self.assertEqual(ctx.exception.row, 2)

    def test_empty_file(self):
        """Empty files are rejected"""
        path = self.write('empty.csv', '')
        with self.assertRaises(DatasetError):
            load_csv_dataset(path, ['y'])

    def test_header_only(self):
        """A header without rows is rejected"""
        path = self.write('header.csv', 'a,y\n')
        with self.assertRaises(DatasetError):
            load_csv_dataset(path, ['y'])

    def test_round_trip(self):
        """Written datasets read back bit for bit"""
        dataset = generate_sine_dataset(seed=4).dataset
        path = save_csv_dataset(dataset, self.root / 'sine.csv')
        loaded = load_csv_dataset(path, ['y'])
        self.assertTrue(bitwise_equal(loaded.X, dataset.X))
        self.assertTrue(bitwise_equal(loaded.Y, dataset.Y))

    def test_group_column(self):
        """A group column is kept out of X"""
        path = self.write('groups.csv', 'x,y,rep\n1,2,a\n1,3,a\n')
        dataset = load_csv_dataset(path, ['y'], group_column='rep')
        self.assertEqual(dataset.feature_names, ('x',))
        self.assertEqual(dataset.groups.tolist(), ['a', 'a'])


class StandardizationTest(SimpleTestCase):
    """
    Tests for standardization
    """

    def test_population_std(self):
        """Y = {0, 2} maps to {-1, +1}"""
        standardized, transform = standardize(Dataset([0.0, 1.0], [0.0, 2.0]))
        np.testing.assert_array_equal(standardized.Y.ravel(), [-1.0, 1.0])
        np.testing.assert_array_equal(transform.y_scale, [1.0])

    def test_constant_column(self):
        """Constant columns are centered and divided by 1"""
        standardized, transform = standardize(Dataset([[3.0], [3.0]], [1.0, 2.0]))
        np.testing.assert_array_equal(standardized.X.ravel(), [0.0, 0.0])
        np.testing.assert_array_equal(transform.x_scale, [1.0])

    def test_inverse(self):
        """invert_targets undoes the transform"""
        dataset = generate_tabular_dataset(1, n=50).dataset
        standardized, transform = standardize(dataset)
        np.testing.assert_allclose(transform.invert_targets(standardized.Y), dataset.Y, rtol=0, atol=1e-12)

    def test_source_statistics(self):
        """Statistics come from the source split"""
        source = Dataset([0.0, 2.0], [0.0, 4.0])
        standardized, _ = standardize(Dataset([1.0], [2.0]), source=source)
        np.testing.assert_array_equal(standardized.Y.ravel(), [0.0])

    def test_features_use_source_statistics(self):
        """Inputs are standardized with the source split's statistics too"""
        source = Dataset([[0.0], [4.0]], [1.0, 3.0])
        target = Dataset([[2.0], [6.0]], [0.0, 0.0])
        standardized, transform = standardize(target, source=source)
        np.testing.assert_array_equal(transform.x_mean, [2.0])
        np.testing.assert_array_equal(transform.x_scale, [2.0])
        np.testing.assert_array_equal(standardized.X.ravel(), [0.0, 2.0])
        np.testing.assert_array_equal(transform.transform_features([[6.0]]), [[2.0]])

    def test_to_raw(self):
        """Predictive distributions map back to raw units"""
        transform = Standardization(np.zeros(1), np.ones(1), np.array([10.0]), np.array([2.0]))
        mean, variance = transform.to_raw(NormalDiag([[1.0]], [[1.0]])).moments()
        self.assertEqual(float(mean[0, 0]), 12.0)
        self.assertEqual(float(variance[0, 0]), 4.0)

    def test_identity(self):
        """The identity transform leaves data unchanged"""
        dataset = Dataset([1.0, 5.0], [2.0, -3.0])
        self.assertTrue(bitwise_equal(Standardization.identity(1, 1).apply(dataset).Y, dataset.Y))


class KFoldTest(SimpleTestCase):
    """
    Tests for kfold_split
    """

    def test_sizes(self):
        """103 rows in 10 folds: three folds of 11, seven of 10"""
        plan = kfold_split(103, 10, seed=0)
        self.assertEqual(sorted(plan.sizes().tolist()), [10] * 7 + [11] * 3)

    def test_partition(self):
        """Every row is tested exactly once"""
        plan = kfold_split(37, 5, seed=2)
        tested = np.concatenate([test for _, _, test in plan])
        self.assertEqual(sorted(tested.tolist()), list(range(37)))
        for fold, train, test in plan:
            self.assertEqual(np.intersect1d(train, test).size, 0)

    def test_reproducible(self):
        """Same seed, same plan"""
        self.assertTrue(bitwise_equal(kfold_split(50, 10, 3).assignment, kfold_split(50, 10, 3).assignment))

    def test_invalid_k(self):
        """k must lie between 1 and n"""
        with self.assertRaises(ConfigurationError):
            kfold_split(5, 6, seed=0)
        with self.assertRaises(ConfigurationError):
            kfold_split(5, 0, seed=0)

    def test_frame(self):
        """Fold plans export row ids and folds"""
        frame = kfold_split(12, 3, seed=0).to_frame()
        self.assertEqual(list(frame.columns), ['row_id', 'fold'])
        self.assertEqual(len(frame), 12)

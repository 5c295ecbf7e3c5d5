# FILE: metrics/tests.py
# ============================================================
"""
Tests for Metrics App

These tests cover:
- RMSE, ECE binning and mean log likelihood
- ModelScore pooling and serialization
- The three one-sided significance tests against scipy
"""

import math

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from HeteroLab.exceptions import DomainError, ShapeError
from HeteroLab.utils import counter_rng
from predictive.distributions import NormalDiag

from .scores import ModelScore, calibration_bins, ece, mean_ll, rmse, score_model
from .significance import (
    g_statistic, g_test_histograms, ks_statistic_one_sided, ks_test_one_sided,
    paired_t_test_one_sided,
)


class RmseTest(SimpleTestCase):
    """
    Tests for rmse
    """

    def test_value(self):
        """rmse([0, 0], [5, 0]) is sqrt(12.5)"""
        self.assertAlmostEqual(rmse([0.0, 0.0], [5.0, 0.0]), math.sqrt(12.5))

    def test_perfect(self):
        """Perfect predictions score zero"""
        self.assertEqual(rmse([[1.0, 2.0]], [[1.0, 2.0]]), 0.0)

    def test_shape_mismatch(self):
        """Predictions and targets must align"""
        with self.assertRaises(ShapeError):
            rmse([1.0, 2.0], [1.0])

    def test_empty(self):
        """Empty evaluation sets are rejected"""
        with self.assertRaises(DomainError):
            rmse([], [])


class EceTest(SimpleTestCase):
    """
    Tests for calibration_bins and ece
    """

    def test_uniform_bins(self):
        """{0.25, 0.75} with 2 bins is perfectly calibrated"""
        self.assertEqual(ece([0.25, 0.75], 2), 0.0)

    def test_skewed_bins(self):
        """{0.1, 0.2} with 2 bins gives 0.5"""
        self.assertAlmostEqual(ece([0.1, 0.2], 2), 0.5)

    def test_edge_assignment(self):
        """F on an inner edge goes to the lower bin; F = 0 goes to the first"""
        bins = calibration_bins([0.0, 0.5, 0.5000001, 1.0], 2)
        np.testing.assert_array_equal(bins.counts, [2, 2])

    def test_uniform_draws(self):
        """1e5 uniform draws have ECE below 1e-3"""
        values = counter_rng(0, 'ece').random(100_000)
        self.assertLess(ece(values, 10), 1e-3)

    def test_permutation_invariant(self):
        """ECE ignores the order of CDF values"""
        values = counter_rng(1, 'ece').random(50)
        self.assertEqual(ece(values), ece(values[::-1]))

    def test_out_of_range(self):
        """CDF values outside [0, 1] are rejected"""
        with self.assertRaises(DomainError):
            ece([0.5, 1.5])

    def test_too_few_bins(self):
        """At least two bins are needed"""
        with self.assertRaises(DomainError):
            ece([0.5], 1)


class ModelScoreTest(SimpleTestCase):
    """
    Tests for score_model and ModelScore
    """

    def setUp(self):
        self.dist = NormalDiag([[0.0], [1.0], [2.0]], [[1.0], [1.0], [4.0]])
        self.targets = np.array([[0.5], [1.0], [0.0]])

    def test_score(self):
        """score_model reports RMSE, ECE and mean LL"""
        score = score_model(self.dist, self.targets, bins=2)
        self.assertAlmostEqual(score.rmse, math.sqrt((0.25 + 0.0 + 4.0) / 3.0))
        self.assertAlmostEqual(score.mean_ll, mean_ll(self.dist, self.targets))
        self.assertEqual(score.histogram.sum(), 3)
        self.assertEqual(score.ece_bins, 2)

    def test_multi_output_rmse(self):
        """RMSE averages over examples and output dimensions"""
        dist = NormalDiag(np.zeros((2, 2)), np.ones((2, 2)))
        score = score_model(dist, [[1.0, 1.0], [1.0, 1.0]])
        self.assertAlmostEqual(score.rmse, 1.0)
        self.assertEqual(score.squared_errors.tolist(), [2.0, 2.0])
        self.assertEqual(score.cdf_values.size, 4)

    def test_pooling(self):
        """from_vectors pools concatenated folds like one evaluation"""
        whole = score_model(self.dist, self.targets)
        pooled = ModelScore.from_vectors(
            np.concatenate([whole.squared_errors[:1], whole.squared_errors[1:]]),
            whole.cdf_values, whole.ll)
        self.assertEqual(pooled.rmse, whole.rmse)
        self.assertEqual(pooled.ece, whole.ece)

    def test_dict_round_trip(self):
        """to_dict / from_dict keep scores and vectors"""
        score = score_model(self.dist, self.targets)
        score.extra['members'] = 3
        restored = ModelScore.from_dict(score.to_dict())
        self.assertEqual(restored.rmse, score.rmse)
        np.testing.assert_array_equal(restored.ll, score.ll)
        self.assertEqual(restored.extra, {'members': 3})

    def test_length_mismatch(self):
        """Pooled vectors must align"""
        with self.assertRaises(ShapeError):
            ModelScore.from_vectors([1.0, 2.0], [0.5, 0.5], [0.1])


class PairedTTest(SimpleTestCase):
    """
    Tests for paired_t_test_one_sided
    """

    def test_identical(self):
        """A model is never worse than itself"""
        errors = counter_rng(0, 't').random(20)
        self.assertEqual(paired_t_test_one_sided(errors, errors), 1.0)

    def test_constant_shift(self):
        """Zero-variance positive differences give p = 0"""
        b = np.arange(30.0) / 4.0
        self.assertEqual(paired_t_test_one_sided(b + 1.0, b), 0.0)

    def test_textbook_value(self):
        """t = 2.045 at 29 dof gives p close to 0.025"""
        n = 30
        spread = math.sqrt((n - 1) / n)
        base = np.array([spread, -spread] * (n // 2))
        differences = base + 2.045 / math.sqrt(n)
        p = paired_t_test_one_sided(differences, np.zeros(n))
        self.assertAlmostEqual(p, stats.t.sf(2.045, n - 1), places=6)
        self.assertAlmostEqual(p, 0.025, delta=1e-3)

    def test_matches_scipy(self):
        """p-value matches scipy's one-sided related-samples test"""
        rng = counter_rng(2, 't')
        a = rng.normal(0.2, 1.0, 40)
        b = rng.normal(0.0, 1.0, 40)
        expected = stats.ttest_rel(a, b, alternative='greater').pvalue
        self.assertAlmostEqual(paired_t_test_one_sided(a, b), expected, places=8)

    def test_too_few_pairs(self):
        """At least two pairs are required"""
        with self.assertRaises(DomainError):
            paired_t_test_one_sided([1.0], [0.0])


class GTest(SimpleTestCase):
    """
    Tests for the two-sample G-test on ECE histograms
    """

    def test_identical_histograms(self):
        """Identical histograms give G = 0 and p = 1"""
        statistic, dof = g_statistic([50, 50], [50, 50])
        self.assertEqual(statistic, 0.0)
        self.assertEqual(dof, 1)
        self.assertEqual(g_test_histograms([50, 50], [50, 50]), 1.0)

    def test_matches_scipy(self):
        """{90, 10} vs {50, 50} matches the log-likelihood contingency test"""
        table = np.array([[90, 10], [50, 50]])
        expected, p_expected, _, _ = stats.chi2_contingency(
            table, correction=False, lambda_='log-likelihood')
        statistic, _ = g_statistic(*table)
        self.assertAlmostEqual(statistic, expected, places=9)
        p = g_test_histograms(*table)
        self.assertAlmostEqual(p, p_expected, places=9)
        self.assertLess(p, 0.05)

    def test_empty_bins_dropped(self):
        """Bins empty in both histograms reduce the dof"""
        _, dof = g_statistic([10, 0, 5, 0], [8, 0, 7, 0])
        self.assertEqual(dof, 1)

    def test_single_populated_bin(self):
        """One populated bin leaves no dof and p = 1"""
        self.assertEqual(g_test_histograms([10, 0], [4, 0]), 1.0)

    def test_empty_histogram(self):
        """Both histograms must be nonempty"""
        with self.assertRaises(DomainError):
            g_statistic([0, 0], [1, 1])


class KsTest(SimpleTestCase):
    """
    Tests for the one-sided KS test on log likelihoods
    """

    def test_identical_samples(self):
        """Identical samples give D+ = 0 and p = 1"""
        ll = counter_rng(0, 'ks').normal(size=50)
        self.assertEqual(ks_statistic_one_sided(ll, ll), 0.0)
        self.assertEqual(ks_test_one_sided(ll, ll), 1.0)

    def test_full_separation(self):
        """A = B - 10 gives D+ = 1 and p = exp(-100) for n = m = 100"""
        b = counter_rng(1, 'ks').normal(size=100)
        self.assertEqual(ks_statistic_one_sided(b - 10.0, b), 1.0)
        self.assertAlmostEqual(ks_test_one_sided(b - 10.0, b), math.exp(-100.0))

    def test_statistic_matches_scipy(self):
        """D+ matches scipy's 'greater' two-sample statistic"""
        rng = counter_rng(2, 'ks')
        a = rng.normal(-0.3, 1.0, 80)
        b = rng.normal(0.0, 1.0, 60)
        expected = stats.ks_2samp(a, b, alternative='greater', method='asymp').statistic
        self.assertAlmostEqual(ks_statistic_one_sided(a, b), expected, places=12)

    def test_empty_sample(self):
        """Both samples must be nonempty"""
        with self.assertRaises(DomainError):
            ks_statistic_one_sided([], [1.0])

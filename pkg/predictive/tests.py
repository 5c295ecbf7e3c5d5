# FILE: predictive/tests.py
# ============================================================
"""
Tests for Predictive App

These tests cover:
- Special functions against scipy
- Normal, Student and mixture densities, CDFs and moments
- Affine maps and serialization of predictive distributions
- Zero-variance point masses and per-row mixture sampling
"""

import math

import numpy as np
from django.test import SimpleTestCase
from scipy import special as sp
from scipy import stats

from HeteroLab.exceptions import DomainError, ShapeError
from HeteroLab.utils import bitwise_equal, counter_rng

from .distributions import NormalDiag, PredictiveDistribution, Student, UniformMixture, cdf, log_density, moments
from .special import (
    chi2_sf, erf, normal_cdf, regularized_incomplete_beta, regularized_lower_gamma, student_t_cdf,
)


class SpecialFunctionTest(SimpleTestCase):
    """
    Special functions against scipy
    """

    def test_lower_gamma(self):
        """P(s, x) matches scipy.special.gammainc"""
        s = np.array([0.5, 1.0, 2.5, 10.0, 30.0])
        x = np.array([0.1, 3.0, 2.0, 12.0, 25.0])
        np.testing.assert_allclose(regularized_lower_gamma(s, x), sp.gammainc(s, x), rtol=1e-10)

    def test_lower_gamma_domain(self):
        """Negative x is outside the domain"""
        with self.assertRaises(DomainError):
            regularized_lower_gamma(1.0, -1.0)

    def test_erf(self):
        """erf matches scipy and is odd"""
        x = np.array([-2.0, -0.3, 0.0, 0.7, 3.0])
        np.testing.assert_allclose(erf(x), sp.erf(x), rtol=1e-12, atol=1e-15)

    def test_incomplete_beta(self):
        """I_x(a, b) matches scipy.special.betainc"""
        a = np.array([0.5, 2.0, 5.0, 50.0])
        b = np.array([0.5, 3.0, 1.0, 0.5])
        x = np.array([0.2, 0.5, 0.9, 0.99])
        np.testing.assert_allclose(regularized_incomplete_beta(a, b, x), sp.betainc(a, b, x), rtol=1e-10)

    def test_incomplete_beta_endpoints(self):
        """I_0 = 0 and I_1 = 1"""
        self.assertEqual(regularized_incomplete_beta(2.0, 3.0, 0.0), 0.0)
        self.assertEqual(regularized_incomplete_beta(2.0, 3.0, 1.0), 1.0)

    def test_normal_cdf_quantile(self):
        """Phi(1.959964) is 0.975"""
        self.assertAlmostEqual(float(normal_cdf(1.959964)), 0.975, places=6)

    def test_student_cdf(self):
        """Student CDF matches scipy on both sides of the location"""
        t = np.array([-3.0, -0.5, 0.0, 0.5, 4.0])
        dof = np.array([3.0, 5.0, 7.0, 30.0, 100.0])
        np.testing.assert_allclose(student_t_cdf(t, dof), stats.t.cdf(t, dof), rtol=1e-9)
        self.assertEqual(float(student_t_cdf(0.0, 4.0)), 0.5)

    def test_chi2_sf(self):
        """Upper chi-square tail matches scipy; dof 0 gives 1"""
        self.assertAlmostEqual(chi2_sf(7.3, 4), stats.chi2.sf(7.3, 4), places=10)
        self.assertEqual(chi2_sf(3.0, 0), 1.0)


class NormalDiagTest(SimpleTestCase):
    """
    Tests for NormalDiag
    """

    def test_standard_log_density(self):
        """log N(0; 0, 1) = -0.918939"""
        dist = NormalDiag([0.0], [1.0])
        self.assertAlmostEqual(float(log_density(dist, [0.0])[0]), -0.918939, places=6)

    def test_sums_over_dimensions(self):
        """Log density sums the per-dimension terms"""
        mean = np.array([[0.0, 1.0], [2.0, -1.0]])
        variance = np.array([[1.0, 4.0], [0.5, 2.0]])
        y = np.array([[0.3, 0.0], [1.0, -2.0]])
        dist = NormalDiag(mean, variance)
        expected = stats.norm.logpdf(y, mean, np.sqrt(variance)).sum(axis=1)
        np.testing.assert_allclose(dist.log_density(y), expected, rtol=1e-12)

    def test_cdf_shape(self):
        """CDF is returned per dimension"""
        dist = NormalDiag(np.zeros((3, 2)), np.ones((3, 2)))
        values = cdf(dist, np.zeros((3, 2)))
        self.assertEqual(values.shape, (3, 2))
        np.testing.assert_allclose(values, 0.5)

    def test_rejects_negative_variance(self):
        """Variance must be nonnegative"""
        with self.assertRaises(DomainError):
            NormalDiag([0.0], [-1.0])

    def test_zero_variance_point_mass(self):
        """A zero variance has moments and samples but no density"""
        dist = NormalDiag([2.0], [0.0])
        np.testing.assert_array_equal(dist.moments()[1], [[0.0]])
        np.testing.assert_array_equal(dist.sample(counter_rng(0, 'point')), [[2.0]])
        with self.assertRaises(DomainError):
            dist.log_density([2.0])
        with self.assertRaises(DomainError):
            dist.cdf([2.0])

    def test_rejects_mismatched_targets(self):
        """Targets must match the predictive shape"""
        with self.assertRaises(ShapeError):
            NormalDiag(np.zeros((3, 1)), 1.0).log_density(np.zeros((2, 1)))

    def test_affine(self):
        """shift + scale * Y has mean shifted and variance scaled by scale^2"""
        dist = NormalDiag([1.0], [2.0]).affine(3.0, 2.0)
        mean, variance = moments(dist)
        self.assertEqual(float(mean[0, 0]), 5.0)
        self.assertEqual(float(variance[0, 0]), 8.0)

    def test_unit_variance(self):
        """unit_variance has variance one everywhere"""
        _, variance = NormalDiag.unit_variance(np.arange(4.0)).moments()
        np.testing.assert_array_equal(variance, np.ones((4, 1)))


class StudentTest(SimpleTestCase):
    """
    Tests for Student
    """

    def test_log_density_matches_scipy(self):
        """Student log density matches scipy"""
        dist = Student([0.5], [1.5], [4.0])
        self.assertAlmostEqual(
            float(dist.log_density([2.0])[0]), stats.t.logpdf(2.0, 4.0, 0.5, 1.5), places=12)

    def test_unit_variance_close_to_normal(self):
        """The unit-variance Student stays within 1e-2 of the standard Normal"""
        y = np.linspace(-3.0, 3.0, 13)
        student = Student.unit_variance(np.zeros_like(y))
        normal = NormalDiag.unit_variance(np.zeros_like(y))
        np.testing.assert_allclose(student.moments()[1], 1.0, rtol=1e-12)
        at_location = student.log_density(np.zeros_like(y)) - normal.log_density(np.zeros_like(y))
        self.assertLess(np.abs(at_location).max(), 1e-2)
        self.assertLess(np.abs(student.cdf(y) - normal.cdf(y)).max(), 1e-2)

    def test_variance(self):
        """Variance is sigma^2 nu / (nu - 2)"""
        _, variance = Student([0.0], [2.0], [6.0]).moments()
        self.assertAlmostEqual(float(variance[0, 0]), 6.0)

    def test_rejects_low_dof(self):
        """dof must exceed 2"""
        with self.assertRaises(DomainError):
            Student([0.0], [1.0], [2.0])

    def test_affine_negative_scale(self):
        """A negative scale flips the location and keeps a positive scale"""
        dist = Student([1.0], [2.0], [5.0]).affine(0.0, -3.0)
        self.assertEqual(float(dist.loc[0, 0]), -3.0)
        self.assertEqual(float(dist.scale[0, 0]), 6.0)


class UniformMixtureTest(SimpleTestCase):
    """
    Tests for UniformMixture
    """

    def setUp(self):
        self.first = NormalDiag([[0.0], [1.0]], [[1.0], [2.0]])
        self.second = NormalDiag([[2.0], [-1.0]], [[0.5], [1.0]])
        self.mixture = UniformMixture([self.first, self.second])
        self.y = np.array([[0.5], [0.0]])

    def test_single_component_delegates(self):
        """A one-component mixture is bitwise its component"""
        single = UniformMixture([self.first])
        self.assertTrue(bitwise_equal(single.log_density(self.y), self.first.log_density(self.y)))
        self.assertTrue(bitwise_equal(single.cdf(self.y), self.first.cdf(self.y)))
        self.assertTrue(bitwise_equal(single.moments()[1], self.first.moments()[1]))

    def test_log_density(self):
        """Mixture density is the component average"""
        expected = np.log(0.5 * (np.exp(self.first.log_density(self.y)) + np.exp(self.second.log_density(self.y))))
        np.testing.assert_allclose(self.mixture.log_density(self.y), expected, rtol=1e-12)

    def test_moments(self):
        """Mixture variance follows the law of total variance"""
        mean, variance = self.mixture.moments()
        np.testing.assert_allclose(mean, [[1.0], [0.0]])
        # 0.5 * (1 + 0.5) + 0.5 * ((0 - 1)^2 + (2 - 1)^2)
        self.assertAlmostEqual(float(variance[0, 0]), 1.75)

    def test_point_mass_moments(self):
        """Point masses at +1 and -1 mix to mean 0 and variance 1"""
        mixture = UniformMixture([NormalDiag([1.0], [0.0]), NormalDiag([-1.0], [0.0])])
        mean, variance = mixture.moments()
        np.testing.assert_array_equal(mean, [[0.0]])
        np.testing.assert_array_equal(variance, [[1.0]])

    def test_cdf(self):
        """Mixture CDF averages component CDFs"""
        expected = 0.5 * (self.first.cdf(self.y) + self.second.cdf(self.y))
        np.testing.assert_allclose(self.mixture.cdf(self.y), expected)

    def test_rejects_mixed_kinds(self):
        """Components must share one kind"""
        with self.assertRaises(ShapeError):
            UniformMixture([self.first, Student([[0.0], [0.0]], 1.0, 5.0)])

    def test_rejects_empty(self):
        """A mixture needs at least one component"""
        with self.assertRaises(DomainError):
            UniformMixture([])

    def test_dict_round_trip(self):
        """to_dict / from_dict rebuild the same mixture"""
        rebuilt = PredictiveDistribution.from_dict(self.mixture.to_dict())
        np.testing.assert_array_equal(rebuilt.log_density(self.y), self.mixture.log_density(self.y))

    def test_sample_shape(self):
        """Samples have the predictive shape"""
        draws = self.mixture.sample(counter_rng(0, 'test'))
        self.assertEqual(draws.shape, (2, 1))

    def test_sample_picks_one_component_per_row(self):
        """Every output dimension of a row comes from the same component"""
        rows = 500
        low = NormalDiag(np.zeros((rows, 2)), 1e-6)
        high = NormalDiag(np.full((rows, 2), 100.0), 1e-6)
        draws = UniformMixture([low, high]).sample(counter_rng(3, 'rows'))
        self.assertEqual(draws.shape, (rows, 2))
        from_high = draws > 50.0
        np.testing.assert_array_equal(from_high[:, 0], from_high[:, 1])
        self.assertTrue(0 < from_high[:, 0].sum() < rows)

    def test_pit_uniform(self):
        """CDF values of the predictive's own samples are uniform within Kolmogorov distance 0.01"""
        n = 100_000
        dist = NormalDiag(np.zeros((n, 1)), np.full((n, 1), 2.0))
        values = dist.cdf(dist.sample(counter_rng(1, 'pit'))).ravel()
        self.assertLess(stats.kstest(values, 'uniform').statistic, 0.01)
        self.assertAlmostEqual(values.mean(), 0.5, delta=0.02)

    def test_log_normalization(self):
        """A mixture of identical components equals one component"""
        twin = UniformMixture([self.first, self.first])
        np.testing.assert_allclose(twin.log_density(self.y), self.first.log_density(self.y), rtol=1e-12)
        self.assertAlmostEqual(math.log(2.0), math.log(twin.size))

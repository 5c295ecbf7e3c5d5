# FILE: losses/tests.py
# ============================================================
"""
Tests for Losses App

These tests cover:
- Loss values against closed forms and scipy densities
- Gradient routing of the faithful objective
- beta-NLL endpoints and stationarity
- Central-difference checks of every loss gradient
- The wiring audit and the dof head of the Student loss
"""

import math

import numpy as np
from django.test import SimpleTestCase
from scipy import stats

from autodiff.graph import Graph
from HeteroLab.exceptions import ConfigurationError, WiringError
from networks.architecture import convergence_architecture
from networks.partitioned import build_model

from .objectives import (
    LossSpec, beta_nll, build_objective, faithful_loss, faithful_student_loss, gaussian_nll,
    proposal_one_loss, proposal_two_loss, sse_loss, student_nll,
)

Y = np.array([[0.5], [-1.0], [2.0]])
MEAN = np.array([[0.0], [-0.5], [1.0]])
VARIANCE = np.array([[0.5], [2.0], [1.5]])


def evaluate(builder, *extra):
    """Build a loss over inputs y, mean, variance; return (value, grads by name)"""
    graph = Graph()
    y = graph.input('y')
    mean = graph.input('mean')
    variance = graph.input('variance')
    loss = builder(graph, y, mean, variance, *extra)
    graph.forward({'y': Y, 'mean': MEAN, 'variance': VARIANCE})
    grads = graph.backward(loss).named(graph)
    return float(graph.value(loss)), grads


class LossSpecTest(SimpleTestCase):
    """
    Tests for LossSpec
    """

    def test_parse_beta(self):
        """beta-nll(0.5) parses its beta"""
        spec = LossSpec.parse('beta-nll(0.5)')
        self.assertEqual(spec.kind, 'beta-nll')
        self.assertEqual(spec.beta, 0.5)
        self.assertEqual(str(spec), 'beta-nll(0.5)')

    def test_parse_bad_beta(self):
        """Unparseable beta is a configuration error"""
        with self.assertRaises(ConfigurationError):
            LossSpec.parse('beta-nll(half)')

    def test_beta_out_of_range(self):
        """beta outside [0, 1] is rejected"""
        with self.assertRaises(ConfigurationError):
            LossSpec('beta-nll', 1.5)

    def test_unknown_kind(self):
        """Unknown loss kinds are rejected"""
        with self.assertRaises(ConfigurationError):
            LossSpec('huber')

    def test_shielding(self):
        """Faithful losses shield the trunk, conventional does not"""
        self.assertTrue(LossSpec('faithful').shields_trunk)
        self.assertTrue(LossSpec('faithful-student').needs_dof)
        self.assertFalse(LossSpec('gaussian-nll').shields_trunk)
        self.assertFalse(LossSpec('sse').needs_scale)


class LossValueTest(SimpleTestCase):
    """
    Loss values
    """

    def test_sse(self):
        """SSE is half the summed squared residuals"""
        graph = Graph()
        y = graph.input('y')
        mean = graph.input('mean')
        loss = sse_loss(graph, y, mean)
        graph.forward({'y': Y, 'mean': MEAN})
        self.assertAlmostEqual(float(graph.value(loss)), 0.5 * np.sum((Y - MEAN) ** 2))

    def test_gaussian_nll_matches_scipy(self):
        """Gaussian NLL is a sum of negative normal log densities"""
        value, _ = evaluate(gaussian_nll)
        expected = -stats.norm.logpdf(Y, MEAN, np.sqrt(VARIANCE)).sum()
        self.assertAlmostEqual(value, expected, places=12)

    def test_student_nll_matches_scipy(self):
        """Student NLL is a sum of negative Student-t log densities"""
        graph = Graph()
        y = graph.input('y')
        mean = graph.input('mean')
        scale = graph.input('scale')
        dof = graph.input('dof')
        loss = student_nll(graph, y, mean, scale, dof)
        dofs = np.array([[3.5], [10.0], [4.0]])
        graph.forward({'y': Y, 'mean': MEAN, 'scale': np.sqrt(VARIANCE), 'dof': dofs})
        expected = -stats.t.logpdf(Y, dofs, MEAN, np.sqrt(VARIANCE)).sum()
        self.assertAlmostEqual(float(graph.value(loss)), expected, places=10)


class FaithfulLossTest(SimpleTestCase):
    """
    Gradient routing of the faithful objective
    """

    def test_mean_gradient_is_sse_gradient(self):
        """The mean receives exactly the SSE gradient"""
        _, grads = evaluate(faithful_loss)
        np.testing.assert_array_equal(grads['mean'], MEAN - Y)

    def test_variance_gradient_is_nll_gradient(self):
        """The variance receives the Gaussian NLL gradient"""
        _, grads = evaluate(faithful_loss)
        expected = 0.5 / VARIANCE - 0.5 * (Y - MEAN) ** 2 / VARIANCE ** 2
        np.testing.assert_allclose(grads['variance'], expected, rtol=1e-12)

    def test_value_is_sse_plus_nll(self):
        """Loss value is SSE plus NLL"""
        value, _ = evaluate(faithful_loss)
        sse, _ = evaluate(lambda g, y, m, v: sse_loss(g, y, m))
        nll, _ = evaluate(gaussian_nll)
        self.assertAlmostEqual(value, sse + nll, places=12)

    def test_conventional_mean_gradient_is_variance_scaled(self):
        """The conventional NLL divides the mean gradient by the variance"""
        _, grads = evaluate(gaussian_nll)
        np.testing.assert_allclose(grads['mean'], (MEAN - Y) / VARIANCE, rtol=1e-12)

    def test_proposal_one_matches_faithful_on_bare_inputs(self):
        """Without a shared trunk proposal-1 routes like the faithful loss"""
        _, faithful = evaluate(faithful_loss)
        _, proposal = evaluate(proposal_one_loss)
        np.testing.assert_array_equal(faithful['mean'], proposal['mean'])


class BetaNllTest(SimpleTestCase):
    """
    beta-NLL endpoints
    """

    def test_beta_zero_is_nll_without_constant(self):
        """beta = 0 is the Gaussian NLL minus the log 2 pi term"""
        value, grads = evaluate(beta_nll, 0.0)
        nll, nll_grads = evaluate(gaussian_nll)
        self.assertAlmostEqual(value, nll - 0.5 * math.log(2.0 * math.pi) * Y.size, places=12)
        np.testing.assert_allclose(grads['mean'], nll_grads['mean'], rtol=1e-12)

    def test_beta_one_mean_gradient_is_sse(self):
        """beta = 1 gives the mean the SSE gradient"""
        _, grads = evaluate(beta_nll, 1.0)
        np.testing.assert_allclose(grads['mean'], MEAN - Y, rtol=1e-12)

    def test_rejects_bad_beta(self):
        """beta must lie in [0, 1]"""
        with self.assertRaises(ConfigurationError):
            evaluate(beta_nll, -0.1)


class WiringAuditTest(SimpleTestCase):
    """
    The wiring audit on real model graphs
    """

    def setUp(self):
        self.model = build_model(convergence_architecture(), seed=0)

    def build(self, spec, shield_trunk):
        graph = Graph()
        nodes = self.model.build(graph, shield_trunk=shield_trunk)
        y = graph.input('y')
        return graph, nodes, build_objective(graph, spec, y, nodes)

    def test_shielded_faithful_builds(self):
        """Faithful loss on a shielded model passes the audit"""
        graph, nodes, loss = self.build(LossSpec('faithful'), shield_trunk=True)
        self.assertIsNotNone(loss)

    def test_unshielded_faithful_rejected(self):
        """Faithful loss without stop_gradient(z) is a wiring error"""
        with self.assertRaises(WiringError):
            self.build(LossSpec('faithful'), shield_trunk=False)

    def test_misplaced_stop_gradient(self):
        """A variance computed from the live trunk fails the audit"""
        graph = Graph()
        nodes = self.model.build(graph, shield_trunk=False)
        y = graph.input('y')
        with self.assertRaises(WiringError):
            faithful_loss(graph, y, nodes.mean, nodes.variance)

    def test_scale_head_required(self):
        """NLL losses need a scale head"""
        projection = self.model.mean_only_projection()
        graph = Graph()
        nodes = projection.build(graph)
        y = graph.input('y')
        with self.assertRaises(WiringError):
            build_objective(graph, LossSpec('gaussian-nll'), y, nodes)

    def test_trunk_gets_no_variance_gradient(self):
        """Trunk gradients of the faithful loss equal those of SSE"""
        x = np.linspace(0.0, 1.0, 6).reshape(-1, 1)
        y = np.sin(x)

        def trunk_grads(spec, shield):
            graph, nodes, loss = self.build(spec, shield)
            graph.forward({nodes.x: x, 'y': y, **self.model.bindings(nodes)})
            grads = graph.backward(loss)
            return {name: grads[node] for name, node in nodes.params.items()
                    if name.startswith('trunk') and node in grads}

        faithful = trunk_grads(LossSpec('faithful'), True)
        sse = trunk_grads(LossSpec('sse'), False)
        self.assertEqual(set(faithful), set(sse))
        for name in sse:
            self.assertEqual(faithful[name].tobytes(), sse[name].tobytes(), name)


class BetaNllStationarityTest(SimpleTestCase):
    """
    beta-NLL optimum and its beta = 0 endpoint
    """

    def setUp(self):
        self.optimal = (Y - MEAN) ** 2

    def gradients(self, builder, variance, *extra):
        graph = Graph()
        y = graph.input('y')
        mean = graph.input('mean')
        var = graph.input('variance')
        loss = builder(graph, y, mean, var, *extra)
        graph.forward({'y': Y, 'mean': MEAN, 'variance': variance})
        return graph.backward(loss).named(graph)

    def test_variance_gradient_vanishes_at_squared_residual(self):
        """The variance gradient is zero at var = (y - mu)^2 for every beta"""
        for beta in (0.0, 0.5, 1.0):
            with self.subTest(beta=beta):
                grads = self.gradients(beta_nll, self.optimal, beta)
                np.testing.assert_allclose(grads['variance'], 0.0, atol=1e-12)

    def test_beta_zero_gradients_equal_nll(self):
        """beta = 0 gives the Gaussian NLL's mean and variance gradients"""
        grads = self.gradients(beta_nll, VARIANCE, 0.0)
        nll = self.gradients(gaussian_nll, VARIANCE)
        for name in ('mean', 'variance'):
            np.testing.assert_allclose(grads[name], nll[name], rtol=0.0, atol=1e-12)


def _normal(builder, *extra):
    return lambda graph, n: builder(graph, n['y'], n['mean'], n['variance'], *extra)


def _student(builder):
    return lambda graph, n: builder(graph, n['y'], n['mean'], n['scale'], n['dof'])


def _sse(graph, n):
    return sse_loss(graph, n['y'], n['mean'])


# (label, loss builder, {input checked: builder whose value is differenced})
GRADIENT_CASES = (
    ('sse', _sse, {'mean': None}),
    ('gaussian-nll', _normal(gaussian_nll), {'mean': None, 'variance': None}),
    ('beta-nll(0)', _normal(beta_nll, 0.0), {'mean': None, 'variance': None}),
    ('beta-nll(0.5)', _normal(beta_nll, 0.5), {'mean': None}),
    ('beta-nll(1)', _normal(beta_nll, 1.0), {'mean': None}),
    ('student-nll', _student(student_nll), {'mean': None, 'scale': None, 'dof': None}),
    ('faithful', _normal(faithful_loss), {'mean': _sse, 'variance': None}),
    ('faithful-student', _student(faithful_student_loss), {'mean': _sse, 'scale': None, 'dof': None}),
    ('proposal-1', _normal(proposal_one_loss), {'mean': _sse, 'variance': None}),
    ('proposal-2', _normal(proposal_two_loss), {'mean': None, 'variance': None}),
)


class FiniteDifferenceTest(SimpleTestCase):
    """
    Every loss gradient against central differences on random batches

    Stop-gradient losses are differenced through the objective each input
    is trained by, so an SSE-trained mean is differenced through SSE.
    """

    instances = 100
    step = 1e-6
    tolerance = 1e-5

    def random_feeds(self, rng):
        rows = int(rng.integers(1, 5))
        mean = rng.normal(size=(rows, 1))
        return {
            'y': mean + rng.normal(size=(rows, 1)),
            'mean': mean,
            'variance': rng.uniform(0.5, 2.0, size=(rows, 1)),
            'scale': rng.uniform(0.7, 1.4, size=(rows, 1)),
            'dof': rng.uniform(3.0, 10.0, size=(rows, 1)),
        }

    def compile(self, builder):
        graph = Graph()
        nodes = {name: graph.input(name) for name in ('y', 'mean', 'variance', 'scale', 'dof')}
        return graph, builder(graph, nodes)

    def value(self, compiled, feeds):
        graph, loss = compiled
        graph.forward(feeds)
        return float(graph.value(loss))

    def central_difference(self, compiled, feeds, name, index):
        shifted = {key: value.copy() for key, value in feeds.items()}
        shifted[name][index] += self.step
        upper = self.value(compiled, shifted)
        shifted[name][index] -= 2.0 * self.step
        lower = self.value(compiled, shifted)
        return (upper - lower) / (2.0 * self.step)

    def test_gradients_match_central_differences(self):
        """Analytic gradients agree with central differences on 100 instances per loss"""
        rng = np.random.default_rng(0)
        for label, builder, checks in GRADIENT_CASES:
            compiled = self.compile(builder)
            references = {name: self.compile(ref) if ref else compiled for name, ref in checks.items()}
            for instance in range(self.instances):
                feeds = self.random_feeds(rng)
                graph, loss = compiled
                graph.forward(feeds)
                grads = graph.backward(loss).named(graph)
                for name, reference in references.items():
                    for index in np.ndindex(feeds[name].shape):
                        analytic = float(grads[name][index])
                        numeric = self.central_difference(reference, feeds, name, index)
                        self.assertLessEqual(
                            abs(numeric - analytic), self.tolerance * max(1.0, abs(analytic)),
                            f'{label} d/d{name}{index} on instance {instance}',
                        )


class FaithfulStudentHeadTest(SimpleTestCase):
    """
    The dof head of the faithful Student loss
    """

    def test_dof_head_receives_gradient(self):
        """Faithful-student trains the dof head through the likelihood"""
        model = build_model(convergence_architecture().with_dof_head(), seed=0)
        graph = Graph()
        nodes = model.build(graph, shield_trunk=True)
        y = graph.input('y')
        loss = build_objective(graph, LossSpec('faithful-student'), y, nodes)
        x = np.linspace(0.0, 10.0, 8).reshape(-1, 1)
        graph.forward({nodes.x: x, 'y': np.sin(x) + 0.3, **model.bindings(nodes)})
        grads = graph.backward(loss)

        dof = {name: grads[node] for name, node in nodes.params.items() if name.startswith('dof')}
        self.assertTrue(dof)
        self.assertTrue(any(np.any(grad != 0.0) for grad in dof.values()))

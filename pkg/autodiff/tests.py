# FILE: autodiff/tests.py
# ============================================================
"""
Tests for Autodiff App

These tests cover:
- Forward values of the primitives
- Gradients against central finite differences
- Stop-gradient blocking and sparse gradient maps
- Shape, domain and non-finite errors
"""

import math

import numpy as np
from django.test import SimpleTestCase

from HeteroLab.exceptions import DomainError, GraphError, NonFiniteError, ShapeError

from .graph import Graph, backward, forward, stop_gradient


def numeric_gradient(fn, x, eps=1e-6):
    """Central differences of a scalar function of one array"""
    x = np.array(x, dtype=np.float64)
    grad = np.zeros_like(x)
    for index in np.ndindex(x.shape):
        up = x.copy()
        down = x.copy()
        up[index] += eps
        down[index] -= eps
        grad[index] = (fn(up) - fn(down)) / (2.0 * eps)
    return grad


class PrimitiveForwardTest(SimpleTestCase):
    """
    Forward values of individual primitives
    """

    def setUp(self):
        self.graph = Graph()
        self.x = self.graph.input('x')

    def evaluate(self, node, x):
        return self.graph.forward({'x': x})[node]

    def test_softplus_at_zero(self):
        """softplus(0) is ln 2"""
        node = self.graph.softplus(self.x)
        self.assertAlmostEqual(float(self.evaluate(node, 0.0)), math.log(2.0), places=12)

    def test_softplus_large_input_is_stable(self):
        """softplus does not overflow for large inputs"""
        node = self.graph.softplus(self.x)
        self.assertAlmostEqual(float(self.evaluate(node, 800.0)), 800.0, places=9)

    def test_elu_negative_branch(self):
        """elu(x) = exp(x) - 1 for x <= 0"""
        node = self.graph.elu(self.x)
        values = self.evaluate(node, [-1.0, 0.0, 2.0])
        np.testing.assert_allclose(values, [math.expm1(-1.0), 0.0, 2.0])

    def test_clamp_min(self):
        """clamp-min floors values"""
        node = self.graph.clamp_min(self.x, 1e-6)
        np.testing.assert_array_equal(self.evaluate(node, [0.0, 2.0]), [1e-6, 2.0])

    def test_reduce_mean_axis(self):
        """reduce-mean over an axis keeps the other axis"""
        node = self.graph.reduce_mean(self.x, axis=0)
        np.testing.assert_allclose(self.evaluate(node, [[1.0, 2.0], [3.0, 6.0]]), [2.0, 4.0])

    def test_functional_aliases(self):
        """forward/backward module functions delegate to the graph"""
        loss = self.graph.reduce_sum(self.graph.square(self.x))
        forward(self.graph, {'x': [1.0, 2.0]})
        grads = backward(self.graph, loss)
        np.testing.assert_array_equal(grads[self.x], [2.0, 4.0])


class GradientTest(SimpleTestCase):
    """
    Backward pass against finite differences
    """

    def check(self, build, x, rtol=1e-6, atol=1e-8):
        graph = Graph()
        node = graph.input('x')
        loss = build(graph, node)

        def scalar(value):
            return float(graph.forward({'x': value})[loss])

        expected = numeric_gradient(scalar, x)
        graph.forward({'x': x})
        grads = graph.backward(loss)
        np.testing.assert_allclose(grads[node], expected, rtol=rtol, atol=atol)

    def test_matmul_elu_chain(self):
        """Gradient through a dense layer with elu"""
        weights = np.array([[0.3, -0.2], [0.5, 0.1], [-0.4, 0.7]])

        def build(graph, x):
            w = graph.constant(weights)
            return graph.reduce_sum(graph.square(graph.elu(graph.matmul(x, w))))

        self.check(build, [[0.2, -0.5, 1.0], [-1.2, 0.3, 0.4]])

    def test_gaussian_nll_variance(self):
        """Gradient of 0.5 log v + 0.5 r^2 / v in v"""
        def build(graph, v):
            r2 = graph.constant([[0.25], [4.0]])
            term = graph.add(graph.scale(graph.log(v), 0.5), graph.scale(graph.div(r2, v), 0.5))
            return graph.reduce_mean(term)

        self.check(build, [[0.5], [2.0]])

    def test_softplus_lgamma(self):
        """Gradients through softplus and lgamma"""
        def build(graph, x):
            return graph.reduce_sum(graph.lgamma(graph.shift(graph.softplus(x), 3.0)))

        self.check(build, [0.1, -2.0, 3.0])

    def test_broadcast_bias(self):
        """Bias gradients sum over broadcast rows"""
        graph = Graph()
        x = graph.input('x')
        b = graph.input('b')
        loss = graph.reduce_sum(graph.add(x, b))
        graph.forward({'x': np.ones((4, 3)), 'b': np.zeros((1, 3))})
        grads = graph.backward(loss)
        np.testing.assert_array_equal(grads[b], [[4.0, 4.0, 4.0]])

    def test_accumulates_over_fan_out(self):
        """A node used twice receives both contributions"""
        graph = Graph()
        x = graph.input('x')
        loss = graph.reduce_sum(graph.mul(x, x))
        graph.forward({'x': [3.0]})
        np.testing.assert_array_equal(graph.backward(loss)[x], [6.0])


class StopGradientTest(SimpleTestCase):
    """
    Stop-gradient semantics
    """

    def test_identity_forward(self):
        """stop-gradient passes the value through unchanged"""
        graph = Graph()
        x = graph.input('x')
        shielded = stop_gradient(graph, x)
        values = graph.forward({'x': [1.5, -2.0]})
        np.testing.assert_array_equal(values[shielded], values[x])

    def test_blocks_gradient(self):
        """Nothing reaches an input only through stop-gradient"""
        graph = Graph()
        x = graph.input('x')
        loss = graph.reduce_sum(graph.square(graph.stop_gradient(x)))
        graph.forward({'x': [1.0, 2.0]})
        grads = graph.backward(loss)
        self.assertNotIn(x, grads)

    def test_mixed_path(self):
        """Only the unshielded path contributes"""
        graph = Graph()
        x = graph.input('x')
        loss = graph.reduce_sum(graph.mul(x, graph.stop_gradient(x)))
        graph.forward({'x': [3.0]})
        np.testing.assert_array_equal(graph.backward(loss)[x], [3.0])

    def test_disconnected_input_absent(self):
        """Inputs without a path to the loss get no entry"""
        graph = Graph()
        x = graph.input('x')
        unused = graph.input('unused')
        loss = graph.reduce_sum(x)
        graph.forward({'x': [1.0], 'unused': [5.0]})
        grads = graph.backward(loss)
        self.assertIn('x', grads.named(graph))
        self.assertNotIn('unused', grads.named(graph))
        self.assertNotIn(unused, grads)

    def test_live_ancestors(self):
        """live_ancestors stops at stop-gradient"""
        graph = Graph()
        x = graph.input('x')
        y = graph.input('y')
        loss = graph.add(graph.stop_gradient(x), y)
        ancestors = graph.live_ancestors(loss)
        self.assertIn(y, ancestors)
        self.assertNotIn(x, ancestors)


class GraphErrorTest(SimpleTestCase):
    """
    Error reporting
    """

    def test_matmul_shape_error(self):
        """Incompatible matmul raises ShapeError with the node id"""
        graph = Graph()
        a = graph.input('a')
        b = graph.input('b')
        product = graph.matmul(a, b)
        with self.assertRaises(ShapeError) as ctx:
            graph.forward({'a': np.ones((2, 3)), 'b': np.ones((2, 3))})
        self.assertEqual(ctx.exception.node_id, product)

    def test_strict_add_rejects_broadcast(self):
        """strict elementwise ops reject mismatched shapes"""
        graph = Graph()
        a = graph.input('a')
        b = graph.input('b')
        graph.add(a, b, strict=True)
        with self.assertRaises(ShapeError):
            graph.forward({'a': np.ones((3, 1)), 'b': np.ones((1, 1))})

    def test_log_of_zero(self):
        """log of a nonpositive value is a DomainError"""
        graph = Graph()
        x = graph.input('x')
        graph.log(x)
        with self.assertRaises(DomainError):
            graph.forward({'x': [0.0]})

    def test_non_finite(self):
        """Overflow raises NonFiniteError naming the op"""
        graph = Graph()
        x = graph.input('x')
        node = graph.exp(x)
        with self.assertRaises(NonFiniteError) as ctx:
            graph.forward({'x': [1000.0]})
        self.assertEqual(ctx.exception.node_id, node)
        self.assertEqual(ctx.exception.op, 'exp')

    def test_non_scalar_loss(self):
        """backward requires a scalar loss"""
        graph = Graph()
        x = graph.input('x')
        graph.forward({'x': [1.0, 2.0]})
        with self.assertRaises(GraphError):
            graph.backward(x)

    def test_stale_values(self):
        """Appending after forward invalidates values"""
        graph = Graph()
        x = graph.input('x')
        graph.forward({'x': [1.0]})
        loss = graph.reduce_sum(x)
        with self.assertRaises(GraphError):
            graph.backward(loss)

    def test_unbound_input(self):
        """Every input must be bound"""
        graph = Graph()
        graph.input('x')
        with self.assertRaises(GraphError):
            graph.forward({})

# FILE: networks/tests.py
# ============================================================
"""
Tests for Networks App

These tests cover:
- Architecture presets and validation
- Initialization streams and partition layout
- Mean-only projection sharing storage with the full model
- Prediction modes
- Checkpoint round trips
"""

import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from HeteroLab.constants import DOF, MEAN, SCALE, TRUNK
from HeteroLab.exceptions import ArchitectureError, CheckpointError
from HeteroLab.utils import bitwise_equal

from .architecture import ArchitectureSpec, LayerSpec, convergence_architecture, uci_architecture
from .checkpoints import load_checkpoint, save_checkpoint
from .partitioned import build_model, mean_only_projection, predict_moments


class ArchitectureSpecTest(SimpleTestCase):
    """
    Tests for ArchitectureSpec
    """

    def test_convergence_preset(self):
        """One Dense(50, elu) trunk layer"""
        spec = convergence_architecture()
        self.assertEqual(spec.trunk, (LayerSpec(50, 'elu'),))
        self.assertTrue(spec.scale_head)
        self.assertFalse(spec.dof_head)

    def test_uci_preset(self):
        """Two trunk layers, dim(Y)-unit heads"""
        spec = uci_architecture(8, 2)
        self.assertEqual(len(spec.trunk), 2)
        self.assertEqual(spec.output_dim, 2)

    def test_rejects_zero_width(self):
        """Zero-width trunk layers are invalid"""
        with self.assertRaises(ArchitectureError):
            ArchitectureSpec(1, 1, (LayerSpec(0),)).validate()

    def test_rejects_unknown_activation(self):
        """Unknown activations are invalid"""
        with self.assertRaises(ArchitectureError):
            ArchitectureSpec(1, 1, (LayerSpec(10, 'tanh'),)).validate()

    def test_rejects_dropout_rate_one(self):
        """Dropout rate must be below 1"""
        with self.assertRaises(ArchitectureError):
            convergence_architecture().with_dropout(1.0)

    def test_dict_round_trip(self):
        """to_dict / from_dict preserve the spec"""
        spec = uci_architecture(3, 2).with_dof_head()
        self.assertEqual(ArchitectureSpec.from_dict(spec.to_dict()), spec)


class BuildModelTest(SimpleTestCase):
    """
    Tests for build_model
    """

    def setUp(self):
        self.spec = convergence_architecture()
        self.model = build_model(self.spec, seed=0)

    def test_parameter_count(self):
        """Convergence network has 202 parameters"""
        self.assertEqual(self.model.parameter_count(), 202)
        self.assertEqual(self.model.parameter_count((TRUNK, MEAN)), 151)

    def test_partitions(self):
        """Parameters are grouped into z, mu and sigma"""
        self.assertEqual(set(self.model.partitions), {TRUNK, MEAN, SCALE})
        self.assertEqual(self.model.partition_of('scale.weight'), SCALE)
        self.assertEqual(self.model.partition_of('trunk.0.bias'), TRUNK)

    def test_biases_start_at_zero(self):
        """Biases are zero-initialized"""
        for name, array in self.model.parameters.items():
            if name.endswith('bias'):
                self.assertFalse(array.any(), name)

    def test_glorot_limit(self):
        """Weights lie within the Glorot uniform limit"""
        weights = self.model.parameters['trunk.0.weight']
        self.assertLessEqual(np.abs(weights).max(), np.sqrt(6.0 / 51.0))

    def test_same_seed_same_weights(self):
        """Initialization is reproducible"""
        other = build_model(self.spec, seed=0)
        for name, array in self.model.parameters.items():
            self.assertTrue(bitwise_equal(array, other.parameters[name]), name)

    def test_heads_do_not_perturb_trunk(self):
        """A mean-only model draws the same trunk and mean weights"""
        twin = build_model(self.spec.mean_only(), seed=0)
        for name, array in twin.parameters.items():
            self.assertTrue(bitwise_equal(array, self.model.parameters[name]), name)

    def test_dof_head(self):
        """Student models add a nu partition"""
        model = build_model(self.spec.with_dof_head(), seed=0)
        self.assertIn(DOF, model.partitions)
        moments = predict_moments(model, np.zeros((4, 1)))
        self.assertTrue(np.all(moments.dof > 3.0))


class MeanOnlyProjectionTest(SimpleTestCase):
    """
    Tests for the mean-only projection
    """

    def setUp(self):
        self.model = build_model(convergence_architecture(), seed=3)
        self.projection = mean_only_projection(self.model)

    def test_exact_partitions(self):
        """Projection holds exactly z and mu"""
        self.assertEqual(set(self.projection.partitions), {TRUNK, MEAN})
        self.assertTrue(self.projection.is_mean_only)

    def test_shares_storage(self):
        """In-place updates through the full model are visible in the projection"""
        self.model.parameters['trunk.0.bias'][...] += 1.0
        self.assertTrue(np.all(self.projection.parameters['trunk.0.bias'] == 1.0))

    def test_same_mean_prediction(self):
        """Projection predicts the same mean bit for bit"""
        x = np.linspace(0.0, 10.0, 7).reshape(-1, 1)
        full = predict_moments(self.model, x)
        projected = predict_moments(self.projection, x)
        self.assertTrue(bitwise_equal(full.mean, projected.mean))
        self.assertIsNone(projected.variance)

    def test_copy_is_independent(self):
        """copy() returns fresh arrays"""
        clone = self.model.copy()
        clone.parameters['mean.bias'][...] = 5.0
        self.assertFalse(self.model.parameters['mean.bias'].any())


class PredictMomentsTest(SimpleTestCase):
    """
    Tests for predict_moments
    """

    def setUp(self):
        self.model = build_model(convergence_architecture().with_dropout(0.2), seed=1)
        self.x = np.linspace(0.0, 1.0, 5).reshape(-1, 1)

    def test_variance_floor(self):
        """Variance is at least the floor"""
        moments = predict_moments(self.model, self.x)
        self.assertTrue(np.all(moments.variance >= 1e-6))
        np.testing.assert_allclose(moments.scale ** 2, moments.variance)

    def test_dropout_masks_reproducible(self):
        """Same mask seed gives the same stochastic prediction"""
        first = predict_moments(self.model, self.x, mode='dropout', mask_seed=4)
        second = predict_moments(self.model, self.x, mode='dropout', mask_seed=4)
        self.assertTrue(bitwise_equal(first.mean, second.mean))

    def test_dropout_requires_seed(self):
        """Dropout mode needs a mask seed"""
        with self.assertRaises(ArchitectureError):
            predict_moments(self.model, self.x, mode='dropout')

    def test_rejects_wrong_width(self):
        """Inputs must match the input dimension"""
        with self.assertRaises(ArchitectureError):
            predict_moments(self.model, np.zeros((3, 2)))


class CheckpointTest(SimpleTestCase):
    """
    Tests for checkpoint files
    """

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.path = Path(self.tmp.name) / 'model.json'

    def test_round_trip(self):
        """Saved parameters load back bit for bit"""
        model = build_model(uci_architecture(3, 2).with_dof_head(), seed=9)
        save_checkpoint(model, self.path)
        loaded = load_checkpoint(self.path)

        self.assertEqual(loaded.spec, model.spec)
        self.assertEqual(loaded.seed, 9)
        for name, array in model.parameters.items():
            self.assertTrue(bitwise_equal(array, loaded.parameters[name]), name)

    def test_missing_file(self):
        """Unreadable files raise CheckpointError"""
        with self.assertRaises(CheckpointError):
            load_checkpoint(self.path)

    def test_wrong_version(self):
        """Unknown format versions are rejected"""
        self.path.write_text('{"format_version": 99, "spec": {}, "seed": 0, "partitions": {}}')
        with self.assertRaises(CheckpointError):
            load_checkpoint(self.path)

# FILE: optim/tests.py
# ============================================================
"""
Tests for Optim App

These tests cover:
- Adam update arithmetic
- Schedules and early stopping
- Lockstep equality of the faithful model and its mean-only twin
"""

import numpy as np
from django.test import SimpleTestCase

from datasets.base import Dataset
from HeteroLab.constants import MEAN, TRUNK
from HeteroLab.exceptions import ConfigurationError, DatasetError, ShapeError
from HeteroLab.utils import bitwise_equal
from losses.objectives import LossSpec
from networks.architecture import convergence_architecture
from networks.partitioned import build_model

from .adam import AdamHyperparameters, AdamState, adam_step
from .training import Trainer, TrainSchedule, train


def sine_rows(n=40):
    x = np.linspace(0.0, 6.0, n)
    return Dataset(x[:, None], (x * np.sin(x))[:, None])


class AdamTest(SimpleTestCase):
    """
    Tests for adam_step
    """

    def setUp(self):
        self.params = {'w': np.array([1.0, -2.0])}
        self.state = AdamState.for_parameters(self.params, AdamHyperparameters(learning_rate=0.1))

    def test_first_step_moves_by_learning_rate(self):
        """The first bias-corrected step has magnitude close to the learning rate"""
        adam_step(self.params, {'w': np.array([0.5, -4.0])}, self.state)
        np.testing.assert_allclose(self.params['w'], [0.9, -1.9], rtol=1e-6)
        self.assertEqual(self.state.step, 1)

    def test_updates_in_place(self):
        """The parameter array object is updated in place"""
        array = self.params['w']
        adam_step(self.params, {'w': np.ones(2)}, self.state)
        self.assertIs(self.params['w'], array)
        self.assertTrue(np.all(array < [1.0, -2.0]))

    def test_missing_gradient_is_zero(self):
        """A parameter without a gradient does not move on the first step"""
        adam_step(self.params, {}, self.state)
        np.testing.assert_array_equal(self.params['w'], [1.0, -2.0])

    def test_shape_mismatch(self):
        """Gradient shapes must match parameters"""
        with self.assertRaises(ShapeError):
            adam_step(self.params, {'w': np.ones(3)}, self.state)

    def test_copy_is_independent(self):
        """State copies do not share moment arrays"""
        clone = self.state.copy()
        adam_step(self.params, {'w': np.ones(2)}, self.state)
        self.assertEqual(clone.step, 0)
        self.assertFalse(clone.first_moments['w'].any())


class TrainScheduleTest(SimpleTestCase):
    """
    Tests for TrainSchedule
    """

    def test_convergence_defaults(self):
        """Convergence schedule: 20k full-batch epochs"""
        schedule = TrainSchedule.convergence()
        self.assertEqual(schedule.epochs, 20_000)
        self.assertEqual(schedule.batch_size, 0)
        self.assertEqual(schedule.early_stopping, 'none')

    def test_uci_defaults(self):
        """Tabular schedule: 60k epochs, patience 100, restore best"""
        schedule = TrainSchedule.uci()
        self.assertEqual(schedule.epochs, 60_000)
        self.assertEqual(schedule.patience, 100)
        self.assertTrue(schedule.restore_best)

    def test_patience_above_epochs(self):
        """Patience cannot exceed the epoch budget"""
        with self.assertRaises(ConfigurationError):
            TrainSchedule(epochs=5, patience=10).validate()

    def test_early_stopping_needs_validation(self):
        """Early stopping without a validation set is a configuration error"""
        model = build_model(convergence_architecture().mean_only(), seed=0)
        schedule = TrainSchedule.uci(epochs=5, patience=2)
        with self.assertRaises(ConfigurationError):
            train(model, LossSpec('sse'), sine_rows(), schedule)


class TrainerTest(SimpleTestCase):
    """
    Tests for Trainer
    """

    def setUp(self):
        self.dataset = sine_rows()

    def test_loss_decreases(self):
        """A few hundred epochs reduce the SSE"""
        model = build_model(convergence_architecture().mean_only(), seed=0)
        result = train(model, LossSpec('sse'), self.dataset, TrainSchedule(epochs=300, adam=AdamHyperparameters(0.01)))
        self.assertLess(result.trace.train_loss[-1], result.trace.train_loss[0])
        self.assertEqual(result.trace.stopped_epoch, 300)

    def test_snapshots(self):
        """Snapshots are taken at the requested epochs"""
        model = build_model(convergence_architecture(), seed=0)
        schedule = TrainSchedule(epochs=4, snapshot_epochs=(0, 2, 4))
        result = train(model, LossSpec('faithful'), self.dataset, schedule)
        self.assertEqual(sorted(result.trace.snapshots), [0, 2, 4])

    def test_early_stopping_restores_best(self):
        """Restored parameters are the best validation epoch's"""
        model = build_model(convergence_architecture().mean_only(), seed=0)
        validation = sine_rows(9)
        schedule = TrainSchedule.uci(epochs=50, patience=5, adam=AdamHyperparameters(0.5))
        result = train(model, LossSpec('sse'), self.dataset, schedule, validation=validation)

        trace = result.trace
        best = int(np.argmin(trace.val_rmse))
        self.assertEqual(trace.best_epoch, trace.epochs[best])
        self.assertLessEqual(trace.stopped_epoch, 50)

    def test_trace_frame(self):
        """The trace converts to a DataFrame"""
        model = build_model(convergence_architecture().mean_only(), seed=0)
        result = train(model, LossSpec('sse'), self.dataset, TrainSchedule(epochs=3))
        frame = result.trace.to_frame()
        self.assertEqual(list(frame.columns), ['epoch', 'train_loss', 'val_rmse'])
        self.assertEqual(frame['epoch'].tolist(), [1, 2, 3])

    def test_empty_dataset(self):
        """Training on zero rows is rejected"""
        model = build_model(convergence_architecture().mean_only(), seed=0)
        empty = Dataset(np.zeros((0, 1)), np.zeros((0, 1)))
        with self.assertRaises(DatasetError):
            Trainer(model, LossSpec('sse'), empty, TrainSchedule(epochs=1))

    def test_dimension_mismatch(self):
        """Dataset widths must fit the architecture"""
        model = build_model(convergence_architecture(input_dim=2).mean_only(), seed=0)
        with self.assertRaises(ConfigurationError):
            Trainer(model, LossSpec('sse'), self.dataset, TrainSchedule(epochs=1))


class LockstepTest(SimpleTestCase):
    """
    The faithful model's (z, mu) matches a mean-only SSE twin bit for bit
    """

    def lockstep(self, full_loss, epochs=25, batch_size=0):
        spec = convergence_architecture()
        full = build_model(spec, seed=11)
        twin = build_model(spec.mean_only(), seed=11)
        schedule = TrainSchedule(epochs=epochs, batch_size=batch_size, seed=11)
        full_trainer = Trainer(full, LossSpec.parse(full_loss), sine_rows(), schedule)
        twin_trainer = Trainer(twin, LossSpec('sse'), sine_rows(), schedule)

        for epoch in range(1, epochs + 1):
            full_trainer.run_epoch()
            twin_trainer.run_epoch()
            for key in (TRUNK, MEAN):
                for name, array in twin.partitions[key].items():
                    if not bitwise_equal(array, full.partitions[key][name]):
                        return epoch
        return None

    def test_faithful_full_batch(self):
        """Faithful training never diverges from the twin"""
        self.assertIsNone(self.lockstep('faithful'))

    def test_faithful_mini_batch(self):
        """Mini-batch schedules keep the equality"""
        self.assertIsNone(self.lockstep('faithful', epochs=10, batch_size=16))

    def test_conventional_diverges_immediately(self):
        """The conventional NLL departs from the twin at epoch 1"""
        self.assertEqual(self.lockstep('gaussian-nll'), 1)

    def test_proposal_one_diverges(self):
        """Variance gradients reaching the trunk break the equality"""
        self.assertEqual(self.lockstep('proposal-1'), 1)

    def test_beta_nll_one_diverges(self):
        """beta = 1 matches the SSE mean gradient but its variance gradients reach the trunk"""
        self.assertEqual(self.lockstep('beta-nll(1.0)'), 1)

    def test_proposal_two_diverges(self):
        """A shielded trunk alone does not stop the variance-scaled mean gradient"""
        self.assertEqual(self.lockstep('proposal-2'), 1)

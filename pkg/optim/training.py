# FILE: optim/training.py
# ============================================================
"""
Training loop

Trainer owns one model, one compute graph and one AdamState. Calling
run_epoch() advances exactly one epoch, which lets the verification
harness step two trainers in lockstep. train() wraps Trainer.fit() with
early stopping and best-epoch restoration.

Schedules:
- full batch (batch_size = 0): one batch holding every row, no shuffling
- mini-batch: rows shuffled per epoch by a counter-based permutation
"""

import logging
import math
from dataclasses import dataclass, field, replace

import pandas as pd

from autodiff.graph import Graph
from HeteroLab.exceptions import (
    ConfigurationError, DatasetError, DomainError, NonFiniteError, TrainingDivergedError,
)
from HeteroLab.utils import counter_rng
from losses.objectives import build_objective
from metrics.scores import rmse

from .adam import AdamHyperparameters, AdamState, adam_step

logger = logging.getLogger(__name__)

EARLY_STOPPING_MODES = ('none', 'validation-rmse')


@dataclass(frozen=True)
class TrainSchedule:
    epochs: int
    batch_size: int = 0
    early_stopping: str = 'none'
    patience: int = 0
    restore_best: bool = False
    seed: int = 0
    snapshot_epochs: tuple = ()
    adam: AdamHyperparameters = field(default_factory=AdamHyperparameters)

    def validate(self):
        if self.epochs < 0 or self.batch_size < 0:
            raise ConfigurationError('epochs and batch size must be nonnegative')
        if self.early_stopping not in EARLY_STOPPING_MODES:
            raise ConfigurationError(f'unknown early stopping metric {self.early_stopping!r}')
        if self.patience > self.epochs:
            raise ConfigurationError(f'patience {self.patience} exceeds epochs {self.epochs}')
        return self

    def with_seed(self, seed):
        return replace(self, seed=seed)

    @classmethod
    def convergence(cls, **options):
        """500 points, full batch, Adam lr 1e-3, 20,000 epochs"""
        options.setdefault('epochs', 20_000)
        return cls(**options).validate()

    @classmethod
    def uci(cls, **options):
        """Full batch, at most 60k epochs, patience 100 on validation RMSE, restore best"""
        options.setdefault('epochs', 60_000)
        options.setdefault('early_stopping', 'validation-rmse')
        options.setdefault('patience', 100)
        options.setdefault('restore_best', True)
        return cls(**options).validate()


@dataclass
class TrainTrace:
    epochs: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    val_rmse: list = field(default_factory=list)
    snapshots: dict = field(default_factory=dict)
    best_epoch: int = None
    stopped_epoch: int = None

    def record(self, epoch, loss, val):
        self.epochs.append(epoch)
        self.train_loss.append(loss)
        self.val_rmse.append(val)

    def to_frame(self):
        return pd.DataFrame({
            'epoch': self.epochs,
            'train_loss': self.train_loss,
            'val_rmse': self.val_rmse,
        })

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)
        return path


@dataclass
class TrainResult:
    model: object
    trace: TrainTrace
    state: AdamState


class Trainer:
    """
    One training run: model + loss + dataset + schedule

    The graph is built once; every batch rebinds inputs and parameters.
    """

    def __init__(self, model, loss_spec, dataset, schedule):
        if dataset.n_rows == 0:
            raise DatasetError('cannot train on an empty dataset')
        if dataset.X.shape[1] != model.spec.input_dim or dataset.Y.shape[1] != model.spec.output_dim:
            raise ConfigurationError(
                f'dataset shapes {dataset.X.shape}/{dataset.Y.shape} do not fit the architecture')

        self.model = model
        self.loss_spec = loss_spec
        self.dataset = dataset
        self.schedule = schedule.validate()
        self.epoch = 0

        self.dropout = model.spec.dropout_rate > 0.0
        self.graph = Graph()
        self.nodes = model.build(self.graph, shield_trunk=loss_spec.shields_trunk, dropout=self.dropout)
        self.y = self.graph.input('y')
        self.loss = build_objective(self.graph, loss_spec, self.y, self.nodes)
        self.state = AdamState.for_parameters(model.parameters, schedule.adam)

        self._validation_graph = None

    def _batches(self):
        n = self.dataset.n_rows
        size = self.schedule.batch_size
        if size == 0 or size >= n:
            yield None
            return
        order = counter_rng(self.schedule.seed, 'shuffle', self.epoch).permutation(n)
        for start in range(0, n, size):
            yield order[start:start + size]

    def run_epoch(self):
        """Advance one epoch; returns the summed training loss over its batches"""
        self.epoch += 1
        total = 0.0
        for batch, rows in enumerate(self._batches()):
            x = self.dataset.X if rows is None else self.dataset.X[rows]
            y = self.dataset.Y if rows is None else self.dataset.Y[rows]
            bindings = {self.nodes.x: x, self.y: y, **self.model.bindings(self.nodes)}
            if self.dropout:
                masks = self.model.dropout_masks(x.shape[0], self.schedule.seed, 'train', self.epoch, batch)
                for name, mask in masks.items():
                    bindings[self.nodes.masks[name]] = mask

            try:
                self.graph.forward(bindings)
            except (NonFiniteError, DomainError) as exc:
                raise TrainingDivergedError(self.epoch, str(exc)) from exc

            grads = self.graph.backward(self.loss)
            named = {
                name: grads[node_id]
                for name, node_id in self.nodes.params.items()
                if node_id in grads
            }
            total += float(self.graph.value(self.loss))
            adam_step(self.model.parameters, named, self.state)
        return total

    def validation_rmse(self, validation):
        if self._validation_graph is None:
            graph = Graph()
            nodes = self.model.mean_only_projection().build(graph)
            self._validation_graph = (graph, nodes)
        graph, nodes = self._validation_graph
        values = graph.forward({nodes.x: validation.X, **self.model.bindings(nodes)})
        return rmse(values[nodes.mean], validation.Y)

    def fit(self, validation=None, on_epoch=None):
        """
        Run the schedule

        validation: Dataset scored by RMSE after every epoch (early stopping,
            best-epoch restoration)
        on_epoch: callback(epoch, trainer) after each epoch
        """
        schedule = self.schedule
        if schedule.early_stopping != 'none' and validation is None:
            raise ConfigurationError('early stopping needs a validation set')

        trace = TrainTrace()
        if 0 in schedule.snapshot_epochs:
            trace.snapshots[0] = self.model.state()

        best_rmse = math.inf
        best_state = None
        since_best = 0
        for _ in range(schedule.epochs):
            loss = self.run_epoch()
            epoch = self.epoch
            val = self.validation_rmse(validation) if validation is not None else None
            trace.record(epoch, loss, val)
            if epoch in schedule.snapshot_epochs:
                trace.snapshots[epoch] = self.model.state()
            if on_epoch is not None:
                on_epoch(epoch, self)
            if epoch % 1000 == 0:
                logger.debug('epoch %d loss %.6g val_rmse %s', epoch, loss, val)

            if val is None:
                continue
            if val < best_rmse:
                best_rmse = val
                best_state = self.model.state()
                trace.best_epoch = epoch
                since_best = 0
            else:
                since_best += 1
            if schedule.early_stopping == 'validation-rmse' and since_best >= schedule.patience:
                logger.info('early stop at epoch %d (best epoch %d, rmse %.6g)',
                            epoch, trace.best_epoch, best_rmse)
                break

        trace.stopped_epoch = self.epoch
        if schedule.restore_best and best_state is not None:
            self.model.load_state(best_state)
        return TrainResult(self.model, trace, self.state)


def train(model, loss_spec, dataset, schedule, validation=None, on_epoch=None):
    """Train `model` in place and return it with its trace"""
    result = Trainer(model, loss_spec, dataset, schedule).fit(validation, on_epoch)
    logger.info('trained %s for %d epochs (final loss %.6g)', loss_spec,
                result.trace.stopped_epoch,
                result.trace.train_loss[-1] if result.trace.train_loss else float('nan'))
    return result


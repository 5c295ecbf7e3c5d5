# FILE: datasets/preprocessing.py
# ============================================================
"""
Standardization and k-fold cross-validation

Standardization uses population statistics (ddof = 0) from a designated
source split; constant columns are centered and divided by 1. Inputs X
and targets Y are both standardized with the source split's statistics.
Predictions map back to raw units through the target statistics only.
"""

import logging
from dataclasses import dataclass

import numpy as np
import pandas as pd

from HeteroLab.exceptions import ConfigurationError
from HeteroLab.utils import counter_rng

logger = logging.getLogger(__name__)


def _statistics(matrix):
    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    return mean, np.where(std > 0.0, std, 1.0)


@dataclass(frozen=True)
class Standardization:
    """Affine maps fitted on a source split; apply() to any split sharing its columns"""
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: np.ndarray
    y_scale: np.ndarray

    @classmethod
    def fit(cls, source):
        x_mean, x_scale = _statistics(source.X)
        y_mean, y_scale = _statistics(source.Y)
        return cls(x_mean, x_scale, y_mean, y_scale)

    @classmethod
    def identity(cls, input_dim, output_dim):
        return cls(np.zeros(input_dim), np.ones(input_dim), np.zeros(output_dim), np.ones(output_dim))

    def transform_features(self, X):
        return (np.asarray(X) - self.x_mean) / self.x_scale

    def to_raw(self, dist):
        """Predictive distribution in the original target units"""
        return dist.affine(self.y_mean, self.y_scale)

    def relative_to(self, reference):
        """(shift, scale) mapping this transform's target units onto `reference`'s"""
        return (self.y_mean - reference.y_mean) / reference.y_scale, self.y_scale / reference.y_scale

    def apply(self, dataset):
        return dataset.with_features((dataset.X - self.x_mean) / self.x_scale).with_targets(
            (dataset.Y - self.y_mean) / self.y_scale)

    def invert_targets(self, Y):
        return np.asarray(Y) * self.y_scale + self.y_mean

    def transform_targets(self, Y):
        return (np.asarray(Y) - self.y_mean) / self.y_scale

    def to_dict(self):
        return {name: getattr(self, name).tolist() for name in ('x_mean', 'x_scale', 'y_mean', 'y_scale')}


def standardize(dataset, source=None):
    """
    Standardize `dataset` with statistics from `source` (itself when None)

    Returns (standardized dataset, Standardization).
    """
    transform = Standardization.fit(dataset if source is None else source)
    return transform.apply(dataset), transform


# ============================================================
# K-FOLD
# ============================================================

@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: int

    @property
    def n_rows(self):
        return self.assignment.shape[0]

    def test_rows(self, fold):
        return np.flatnonzero(self.assignment == fold)

    def train_rows(self, fold):
        return np.flatnonzero(self.assignment != fold)

    def sizes(self):
        return np.bincount(self.assignment, minlength=self.k)

    def __iter__(self):
        for fold in range(self.k):
            yield fold, self.train_rows(fold), self.test_rows(fold)

    def to_frame(self):
        return pd.DataFrame({'row_id': np.arange(self.n_rows), 'fold': self.assignment})

    def to_csv(self, path):
        self.to_frame().to_csv(path, index=False)
        return path


def kfold_split(n, k, seed):
    """Row perm[i] goes to fold i mod k, so fold sizes differ by at most one"""
    if k < 1 or k > n:
        raise ConfigurationError(f'cannot split {n} rows into {k} folds')
    order = counter_rng(seed, 'kfold', n, k).permutation(n)
    assignment = np.empty(n, dtype=np.int64)
    assignment[order] = np.arange(n) % k
    assignment.setflags(write=False)
    return FoldPlan(k=k, assignment=assignment, seed=seed)

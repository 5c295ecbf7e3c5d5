# FILE: datasets/base.py
# ============================================================
"""
Dataset container

X is n x d, Y is n x q, both float64 and read-only after construction.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from HeteroLab.exceptions import DatasetError


def _frozen_matrix(value, label):
    value = np.array(value, dtype=np.float64, order='C')
    if value.ndim == 1:
        value = value[:, None]
    if value.ndim != 2:
        raise DatasetError(f'{label} must be 2-D, got shape {value.shape}')
    value.setflags(write=False)
    return value


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    Y: np.ndarray
    groups: np.ndarray = None
    provenance: str = ''
    feature_names: tuple = field(default=())
    target_names: tuple = field(default=())

    def __post_init__(self):
        X = _frozen_matrix(self.X, 'X')
        Y = _frozen_matrix(self.Y, 'Y')
        if X.shape[0] != Y.shape[0]:
            raise DatasetError(f'X has {X.shape[0]} rows but Y has {Y.shape[0]}')
        for label, matrix in (('X', X), ('Y', Y)):
            bad = np.argwhere(~np.isfinite(matrix))
            if bad.size:
                row, column = (int(i) for i in bad[0])
                raise DatasetError(f'non-finite entry in {label}', row=row, column=column)

        groups = self.groups
        if groups is not None:
            groups = np.array(groups).ravel()
            if groups.shape[0] != X.shape[0]:
                raise DatasetError(f'{groups.shape[0]} group ids for {X.shape[0]} rows')
            groups.setflags(write=False)

        feature_names = tuple(self.feature_names) or tuple(f'x{i}' for i in range(X.shape[1]))
        target_names = tuple(self.target_names) or tuple(f'y{i}' for i in range(Y.shape[1]))
        if len(feature_names) != X.shape[1] or len(target_names) != Y.shape[1]:
            raise DatasetError('column names do not match the array widths')

        object.__setattr__(self, 'X', X)
        object.__setattr__(self, 'Y', Y)
        object.__setattr__(self, 'groups', groups)
        object.__setattr__(self, 'feature_names', feature_names)
        object.__setattr__(self, 'target_names', target_names)

    @property
    def n_rows(self):
        return self.X.shape[0]

    @property
    def input_dim(self):
        return self.X.shape[1]

    @property
    def output_dim(self):
        return self.Y.shape[1]

    def subset(self, rows):
        rows = np.asarray(rows)
        return replace(
            self,
            X=self.X[rows],
            Y=self.Y[rows],
            groups=None if self.groups is None else self.groups[rows],
        )

    def with_targets(self, Y):
        return replace(self, Y=Y)

    def with_features(self, X):
        return replace(self, X=X)

    def group_means(self):
        """One row per replicate group with the group-mean target"""
        if self.groups is None:
            return self
        labels, inverse = np.unique(self.groups, return_inverse=True)
        first = np.array([np.flatnonzero(inverse == g)[0] for g in range(labels.size)])
        means = np.vstack([self.Y[inverse == g].mean(axis=0) for g in range(labels.size)])
        return replace(self, X=self.X[first], Y=means, groups=labels, provenance=f'{self.provenance}:group-means')

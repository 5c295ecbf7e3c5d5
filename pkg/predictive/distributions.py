# FILE: predictive/distributions.py
# ============================================================
"""
Predictive distributions

All parameters are (n, q) arrays: one row per example, one column per
output dimension (diagonal covariance).

- NormalDiag(mean, variance)
- Student(loc, scale, dof)
- UniformMixture(components): equal weights 1/M, components of one kind

log_density() sums over output dimensions and returns one value per
example; cdf() returns per-dimension values.
"""

import math

import numpy as np
from scipy.special import gammaln, logsumexp

from HeteroLab.constants import LOG_2PI, UNIT_STUDENT_DOF, UNIT_STUDENT_SCALE
from HeteroLab.exceptions import DomainError, ShapeError

from .special import normal_cdf, student_t_cdf


def _as_matrix(value):
    value = np.ascontiguousarray(value, dtype=np.float64)
    if value.ndim == 1:
        value = value[:, None]
    if value.ndim != 2:
        raise ShapeError(f'expected an (n, q) array, got shape {value.shape}')
    return value


class PredictiveDistribution:
    """Base class: subclasses implement the per-kind formulas"""

    kind = None

    @property
    def shape(self):
        raise NotImplementedError

    def _targets(self, y):
        y = _as_matrix(y)
        if y.shape != self.shape:
            raise ShapeError(f'targets of shape {y.shape} do not match predictive shape {self.shape}')
        return y

    def log_density(self, y):
        raise NotImplementedError

    def cdf(self, y):
        raise NotImplementedError

    def moments(self):
        raise NotImplementedError

    def sample(self, rng):
        raise NotImplementedError

    def affine(self, shift, scale):
        """Distribution of shift + scale * Y"""
        raise NotImplementedError

    def to_dict(self):
        raise NotImplementedError

    @staticmethod
    def from_dict(data):
        kind = data['kind']
        if kind == 'normal-diag':
            return NormalDiag(data['mean'], data['variance'])
        if kind == 'student':
            return Student(data['loc'], data['scale'], data['dof'])
        if kind == 'uniform-mixture':
            return UniformMixture([PredictiveDistribution.from_dict(c) for c in data['components']])
        raise DomainError(f'unknown distribution kind {kind!r}')


class NormalDiag(PredictiveDistribution):
    """
    Independent Normals per output dimension

    A zero variance is a point mass: it has moments and samples but no
    density or CDF.
    """
    kind = 'normal-diag'

    def __init__(self, mean, variance):
        self.mean = _as_matrix(mean)
        self.variance = np.broadcast_to(_as_matrix(variance), self.mean.shape).copy()
        if np.any(self.variance < 0.0):
            raise DomainError('Normal variance must be nonnegative')

    @classmethod
    def unit_variance(cls, mean):
        """Nominal homoscedastic isotropic unit covariance"""
        mean = _as_matrix(mean)
        return cls(mean, np.ones_like(mean))

    @property
    def shape(self):
        return self.mean.shape

    def _require_spread(self, what):
        if np.any(self.variance == 0.0):
            raise DomainError(f'{what} of a zero-variance Normal is undefined')

    def log_density(self, y):
        self._require_spread('log density')
        y = self._targets(y)
        residual = y - self.mean
        per_entry = -0.5 * (LOG_2PI + np.log(self.variance) + residual * residual / self.variance)
        return per_entry.sum(axis=1)

    def cdf(self, y):
        self._require_spread('CDF')
        y = self._targets(y)
        return normal_cdf((y - self.mean) / np.sqrt(self.variance))

    def moments(self):
        return self.mean, self.variance

    def sample(self, rng):
        return self.mean + np.sqrt(self.variance) * rng.standard_normal(self.shape)

    def affine(self, shift, scale):
        return NormalDiag(shift + scale * self.mean, scale * scale * self.variance)

    def to_dict(self):
        return {'kind': self.kind, 'mean': self.mean.tolist(), 'variance': self.variance.tolist()}


class Student(PredictiveDistribution):
    kind = 'student'

    def __init__(self, loc, scale, dof):
        self.loc = _as_matrix(loc)
        self.scale = np.broadcast_to(_as_matrix(scale), self.loc.shape).copy()
        self.dof = np.broadcast_to(_as_matrix(dof), self.loc.shape).copy()
        if np.any(self.scale <= 0.0):
            raise DomainError('Student scale must be positive')
        if np.any(self.dof <= 2.0):
            raise DomainError('Student dof must exceed 2 for a finite variance')

    @classmethod
    def unit_variance(cls, loc):
        """nu = 100, sigma = sqrt(98 / 100): unit variance, near-Normal tails"""
        loc = _as_matrix(loc)
        return cls(loc, np.full_like(loc, UNIT_STUDENT_SCALE), np.full_like(loc, UNIT_STUDENT_DOF))

    @property
    def shape(self):
        return self.loc.shape

    def log_density(self, y):
        y = self._targets(y)
        nu = self.dof
        standardized = (y - self.loc) / self.scale
        per_entry = (gammaln(0.5 * (nu + 1.0)) - gammaln(0.5 * nu)
                     - 0.5 * np.log(nu * math.pi) - np.log(self.scale)
                     - 0.5 * (nu + 1.0) * np.log1p(standardized * standardized / nu))
        return per_entry.sum(axis=1)

    def cdf(self, y):
        y = self._targets(y)
        return student_t_cdf((y - self.loc) / self.scale, self.dof)

    def moments(self):
        return self.loc, self.scale * self.scale * self.dof / (self.dof - 2.0)

    def sample(self, rng):
        return self.loc + self.scale * rng.standard_t(self.dof)

    def affine(self, shift, scale):
        return Student(shift + scale * self.loc, abs(scale) * self.scale, self.dof)

    def to_dict(self):
        return {
            'kind': self.kind,
            'loc': self.loc.tolist(),
            'scale': self.scale.tolist(),
            'dof': self.dof.tolist(),
        }


class UniformMixture(PredictiveDistribution):
    """
    Equal-weight mixture of M components of one kind

    A one-component mixture delegates every call to its component, so
    its outputs are bitwise those of the bare component.
    """
    kind = 'uniform-mixture'

    def __init__(self, components):
        components = list(components)
        if not components:
            raise DomainError('a mixture needs at least one component')
        kinds = {component.kind for component in components}
        shapes = {component.shape for component in components}
        if len(kinds) != 1 or len(shapes) != 1:
            raise ShapeError(f'mixture components differ in kind or shape: {kinds}, {shapes}')
        self.components = components

    @property
    def size(self):
        return len(self.components)

    @property
    def shape(self):
        return self.components[0].shape

    def log_density(self, y):
        if self.size == 1:
            return self.components[0].log_density(y)
        stacked = np.stack([component.log_density(y) for component in self.components])
        return logsumexp(stacked, axis=0) - math.log(self.size)

    def cdf(self, y):
        if self.size == 1:
            return self.components[0].cdf(y)
        return np.mean([component.cdf(y) for component in self.components], axis=0)

    def moments(self):
        if self.size == 1:
            return self.components[0].moments()
        means, variances = zip(*(component.moments() for component in self.components))
        means = np.stack(means)
        variances = np.stack(variances)
        mean = means.mean(axis=0)
        second = (variances + means * means).mean(axis=0)
        return mean, np.maximum(second - mean * mean, 0.0)

    def sample(self, rng):
        """One component per example row, shared by every output dimension"""
        draws = np.stack([component.sample(rng) for component in self.components])
        pick = rng.integers(0, self.size, size=self.shape[0])
        return draws[pick, np.arange(self.shape[0])]

    def affine(self, shift, scale):
        return UniformMixture([component.affine(shift, scale) for component in self.components])

    def to_dict(self):
        return {'kind': self.kind, 'components': [component.to_dict() for component in self.components]}


# ============================================================
# OPERATIONS
# ============================================================

def log_density(dist, y):
    return dist.log_density(y)


def cdf(dist, y):
    return dist.cdf(y)


def moments(dist):
    return dist.moments()

# FILE: datasets/synthetic.py
# ============================================================
"""
Synthetic regression tasks

- sine task: x ~ Uniform(2.5, 7.5), y = x sin(x) + eps, eps ~ N(0, 0.1 + |0.5 x|),
  plus two noiseless isolated points at x = 0.5 and x = 9.5
- decomposition pair: the same X with clean targets E[y|x] and noisy targets
- tabular task: d uniform features, nonlinear mean, feature-dependent noise
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from HeteroLab.exceptions import ConfigurationError, DatasetError
from HeteroLab.utils import counter_rng

from .base import Dataset

SINE_DOMAIN = (2.5, 7.5)
SINE_SAMPLED_POINTS = 498
ISOLATED_POINTS = (0.5, 9.5)
NOISE_MODES = ('std', 'variance')


def sine_mean(x):
    x = np.asarray(x, dtype=np.float64)
    return x * np.sin(x)


def sine_noise_parameter(x):
    """0.1 + |0.5 x|"""
    return 0.1 + np.abs(0.5 * np.asarray(x, dtype=np.float64))


@dataclass(frozen=True)
class SyntheticTask:
    dataset: Dataset
    mean_fn: Callable
    noise_std_fn: Callable
    noise_mode: str = 'std'

    def noise_variance(self, x):
        return self.noise_std_fn(x) ** 2


def sine_noise_law(noise_mode='std'):
    """Noise standard deviation as a function of x under either reading of the noise parameter"""
    if noise_mode not in NOISE_MODES:
        raise ConfigurationError(f'unknown noise mode {noise_mode!r}; expected one of {NOISE_MODES}')
    if noise_mode == 'std':
        return sine_noise_parameter
    return lambda x: np.sqrt(sine_noise_parameter(x))


def generate_sine_dataset(seed, noise_mode='std'):
    noise_std = sine_noise_law(noise_mode)
    rng = counter_rng(seed, 'sine')
    x = rng.uniform(*SINE_DOMAIN, size=SINE_SAMPLED_POINTS)
    y = sine_mean(x) + noise_std(x) * rng.standard_normal(SINE_SAMPLED_POINTS)

    isolated = np.asarray(ISOLATED_POINTS)
    X = np.concatenate([x, isolated])[:, None]
    Y = np.concatenate([y, sine_mean(isolated)])[:, None]
    dataset = Dataset(X, Y, provenance=f'sine(seed={seed}, noise={noise_mode})',
                      feature_names=('x',), target_names=('y',))
    return SyntheticTask(dataset, sine_mean, noise_std, noise_mode)


@dataclass(frozen=True)
class DecompositionPair:
    clean: Dataset
    noisy: Dataset
    mean_fn: Callable
    noise_law: Callable


def generate_decomposition_pair(seed, noise_law, x=None, mean_fn=sine_mean, n=500):
    """
    Clean targets are exactly mean_fn(x); noisy targets add N(0, noise_law(x)^2)

    x defaults to n draws from the sine domain.
    """
    if x is None:
        x = counter_rng(seed, 'decompose', 'x').uniform(*SINE_DOMAIN, size=n)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    scale = np.asarray(noise_law(x), dtype=np.float64) * np.ones_like(x)
    if np.any(scale < 0.0):
        raise DatasetError('noise law returned a negative scale')

    clean = mean_fn(x)
    noisy = clean + scale * counter_rng(seed, 'decompose', 'noise').standard_normal(x.shape[0])
    X = x[:, None]
    return DecompositionPair(
        clean=Dataset(X, clean[:, None], provenance=f'decompose-clean(seed={seed})',
                      feature_names=('x',), target_names=('y',)),
        noisy=Dataset(X, noisy[:, None], provenance=f'decompose-noisy(seed={seed})',
                      feature_names=('x',), target_names=('y',)),
        mean_fn=mean_fn,
        noise_law=noise_law,
    )


def tabular_mean(X):
    return X[:, 0] + np.sin(np.pi * X[:, 1]) + 0.5 * X[:, 2] * X[:, 3] - 0.3 * X[:, 4] ** 2


def tabular_noise_std(X):
    """Noise grows with the first two features; floor 0.05"""
    return 0.05 + 0.6 * np.abs(X[:, 0]) + 0.3 * (X[:, 1] + 1.0) ** 2


def generate_tabular_dataset(seed, n=500, d=5):
    if d < 5:
        raise ConfigurationError(f'tabular task needs at least 5 features, got {d}')
    rng = counter_rng(seed, 'tabular')
    X = rng.uniform(-1.0, 1.0, size=(n, d))
    y = tabular_mean(X) + tabular_noise_std(X) * rng.standard_normal(n)
    dataset = Dataset(X, y[:, None], provenance=f'tabular(seed={seed}, n={n}, d={d})',
                      target_names=('y',))
    return SyntheticTask(dataset, tabular_mean, tabular_noise_std)

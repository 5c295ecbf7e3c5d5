# FILE: metrics/scores.py
# ============================================================
"""
Accuracy and calibration scores

- rmse(mean, y): sqrt of the mean squared error over examples and output dims
- calibration_bins / ece: equal-width bins on predictive-CDF values,
  p_{j-1} < F <= p_j, with F == 0 assigned to the first bin
- mean_ll(dist, y): average per-example log density
- score_model(dist, y, bins): all of the above plus the vectors the
  significance tests consume
"""

from dataclasses import dataclass, field

import numpy as np

from HeteroLab.exceptions import DomainError, ShapeError


def _aligned(predictions, targets):
    predictions = np.asarray(predictions, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if predictions.shape != targets.shape:
        raise ShapeError(f'predictions {predictions.shape} and targets {targets.shape} differ in shape')
    if predictions.size == 0:
        raise DomainError('cannot score an empty evaluation set')
    return predictions, targets


def rmse(predictions, targets):
    predictions, targets = _aligned(predictions, targets)
    residual = predictions - targets
    return float(np.sqrt(np.mean(residual * residual)))


# ============================================================
# CALIBRATION
# ============================================================

@dataclass(frozen=True)
class CalibrationBins:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def probabilities(self):
        return self.counts / self.total

    @property
    def widths(self):
        return np.diff(self.edges)


def calibration_bins(cdf_values, m=10):
    values = np.asarray(cdf_values, dtype=np.float64).ravel()
    if values.size == 0:
        raise DomainError('cannot bin an empty set of CDF values')
    if m < 2:
        raise DomainError(f'ECE needs at least 2 bins, got {m}')
    if np.any(values < 0.0) or np.any(values > 1.0) or np.any(np.isnan(values)):
        raise DomainError('CDF values must lie in [0, 1]')

    edges = np.linspace(0.0, 1.0, m + 1)
    # side='left' puts F in bin j when edges[j-1] < F <= edges[j]
    index = np.clip(np.searchsorted(edges, values, side='left'), 1, m) - 1
    counts = np.bincount(index, minlength=m)
    return CalibrationBins(edges=edges, counts=counts)


def ece(cdf_values, m=10):
    bins = cdf_values if isinstance(cdf_values, CalibrationBins) else calibration_bins(cdf_values, m)
    gap = bins.probabilities - bins.widths
    return float(np.sum(gap * gap))


def mean_ll(dist, targets):
    values = dist.log_density(targets)
    if values.size == 0:
        raise DomainError('cannot average an empty set of log densities')
    return float(np.mean(values))


# ============================================================
# MODEL SCORE
# ============================================================

@dataclass
class ModelScore:
    rmse: float
    ece: float
    mean_ll: float
    squared_errors: np.ndarray
    cdf_values: np.ndarray
    ll: np.ndarray
    histogram: np.ndarray
    ece_bins: int = 10
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'rmse': self.rmse,
            'ece': self.ece,
            'll': self.mean_ll,
            'ece_bins': self.ece_bins,
            'squared_errors': self.squared_errors.tolist(),
            'cdf_values': self.cdf_values.tolist(),
            'll_values': self.ll.tolist(),
            'histogram': self.histogram.tolist(),
            **self.extra,
        }

    @classmethod
    def from_dict(cls, data):
        known = {'rmse', 'ece', 'll', 'ece_bins', 'squared_errors', 'cdf_values', 'll_values', 'histogram'}
        return cls(
            rmse=float(data['rmse']),
            ece=float(data['ece']),
            mean_ll=float(data['ll']),
            squared_errors=np.asarray(data['squared_errors'], dtype=np.float64),
            cdf_values=np.asarray(data['cdf_values'], dtype=np.float64),
            ll=np.asarray(data['ll_values'], dtype=np.float64),
            histogram=np.asarray(data['histogram'], dtype=np.int64),
            ece_bins=int(data.get('ece_bins', 10)),
            extra={key: value for key, value in data.items() if key not in known},
        )

    @classmethod
    def from_vectors(cls, squared_errors, cdf_values, ll, output_dim=1, bins=10):
        """Pool per-example vectors (e.g. held-out folds) into one score"""
        squared_errors = np.asarray(squared_errors, dtype=np.float64).ravel()
        ll = np.asarray(ll, dtype=np.float64).ravel()
        cdf_values = np.asarray(cdf_values, dtype=np.float64).ravel()
        if squared_errors.size == 0 or squared_errors.size != ll.size:
            raise ShapeError(f'{squared_errors.size} squared errors for {ll.size} log densities')
        histogram = calibration_bins(cdf_values, bins)
        return cls(
            rmse=float(np.sqrt(squared_errors.sum() / (squared_errors.size * output_dim))),
            ece=ece(histogram),
            mean_ll=float(np.mean(ll)),
            squared_errors=squared_errors,
            cdf_values=cdf_values,
            ll=ll,
            histogram=histogram.counts,
            ece_bins=bins,
        )


def example_vectors(dist, targets):
    """(squared error per example, CDF value per entry, log density per example)"""
    mean, _ = dist.moments()
    mean, targets = _aligned(mean, np.asarray(targets, dtype=np.float64).reshape(mean.shape))
    residual = mean - targets
    return (residual * residual).sum(axis=1), np.asarray(dist.cdf(targets)), dist.log_density(targets)


def score_model(dist, targets, bins=10):
    """
    Score a predictive distribution on held-out targets

    Squared errors are summed over output dimensions (one entry per
    example); CDF values are pooled across dimensions for the ECE.
    """
    squared, cdf_values, ll = example_vectors(dist, targets)
    return ModelScore.from_vectors(squared, cdf_values, ll, output_dim=dist.shape[1], bins=bins)

# FILE: metrics/significance.py
# ============================================================
"""
One-sided significance tests behind strike-outs and win/tie flags

Every test asks "is A worse than B?" and returns a p-value in [0, 1].
"""

import logging
import math

import numpy as np

from HeteroLab.exceptions import DomainError, ShapeError
from predictive.special import chi2_sf, student_t_cdf

logger = logging.getLogger(__name__)


def paired_t_test_one_sided(errors_a, errors_b):
    """
    H1: mean(A - B) > 0

    Zero-variance differences have no sampling distribution: p = 1 when
    their mean is <= 0 (A is never worse), 0 otherwise.
    """
    a = np.asarray(errors_a, dtype=np.float64).ravel()
    b = np.asarray(errors_b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f'paired samples differ in length: {a.size} vs {b.size}')
    if a.size < 2:
        raise DomainError('paired t-test needs at least 2 pairs')

    differences = a - b
    mean = float(np.mean(differences))
    sd = float(np.std(differences, ddof=1))
    if sd == 0.0:
        return 1.0 if mean <= 0.0 else 0.0

    t = mean / (sd / math.sqrt(a.size))
    p = 1.0 - float(student_t_cdf(t, a.size - 1))
    return min(max(p, 0.0), 1.0)


def g_statistic(counts_a, counts_b):
    """
    2 x m contingency G statistic and its degrees of freedom

    Bins with zero total count are dropped before computing dof.
    """
    a = np.asarray(counts_a, dtype=np.float64).ravel()
    b = np.asarray(counts_b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ShapeError(f'histograms differ in bin count: {a.size} vs {b.size}')
    if np.any(a < 0.0) or np.any(b < 0.0):
        raise DomainError('histogram counts must be nonnegative')
    if a.sum() == 0.0 or b.sum() == 0.0:
        raise DomainError('G-test needs two nonempty histograms')

    kept = (a + b) > 0.0
    observed = np.vstack([a[kept], b[kept]])
    expected = observed.sum(axis=1, keepdims=True) * observed.sum(axis=0, keepdims=True) / observed.sum()
    nonzero = observed > 0.0
    statistic = 2.0 * float(np.sum(observed[nonzero] * np.log(observed[nonzero] / expected[nonzero])))
    return max(statistic, 0.0), int(kept.sum()) - 1


def g_test_histograms(counts_a, counts_b):
    statistic, dof = g_statistic(counts_a, counts_b)
    if dof == 0:
        return 1.0
    return min(max(chi2_sf(statistic, dof), 0.0), 1.0)


def ks_statistic_one_sided(ll_a, ll_b):
    """D+ = sup(F_A - F_B) over the pooled sample"""
    a = np.sort(np.asarray(ll_a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(ll_b, dtype=np.float64).ravel())
    if a.size == 0 or b.size == 0:
        raise DomainError('KS test needs two nonempty samples')
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side='right') / a.size
    cdf_b = np.searchsorted(b, pooled, side='right') / b.size
    return max(float(np.max(cdf_a - cdf_b)), 0.0)


def ks_test_one_sided(ll_a, ll_b):
    """Asymptotic p = exp(-2 D+^2 nm / (n + m)); small D+ means A is not worse"""
    n = np.asarray(ll_a).size
    m = np.asarray(ll_b).size
    d = ks_statistic_one_sided(ll_a, ll_b)
    return min(math.exp(-2.0 * d * d * n * m / (n + m)), 1.0)

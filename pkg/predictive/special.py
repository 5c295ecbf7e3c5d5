# FILE: predictive/special.py
# ============================================================
"""
Special functions behind the Normal, Student and chi-square CDFs

- regularized_lower_gamma(s, x): series for x < s + 1, continued fraction otherwise
- erf(x): sign(x) * P(1/2, x^2)
- regularized_incomplete_beta(a, b, x): continued fraction (modified Lentz),
  evaluated on whichever side of (a + 1) / (a + b + 2) converges fastest

All functions are vectorized over numpy arrays and return a float for
scalar input.
"""

import numpy as np
from scipy.special import gammaln

from HeteroLab.exceptions import DomainError

EPS = 1e-16
TINY = 1e-300
MAX_ITERATIONS = 1000


def _scalar_or_array(result, *inputs):
    if all(np.ndim(value) == 0 for value in inputs):
        return float(result)
    return result


def _gamma_series(s, x):
    term = 1.0 / s
    total = term.copy()
    shifted = s.copy()
    for _ in range(MAX_ITERATIONS):
        shifted = shifted + 1.0
        term = term * x / shifted
        total = total + term
        if np.all(np.abs(term) <= np.abs(total) * EPS):
            break
    with np.errstate(divide='ignore'):
        log_prefactor = -x + s * np.log(x) - gammaln(s)
    return total * np.exp(log_prefactor)


def _gamma_continued_fraction(s, x):
    # Upper regularized gamma Q(s, x)
    b = x + 1.0 - s
    c = np.full_like(x, 1.0 / TINY)
    d = 1.0 / b
    h = d.copy()
    for i in range(1, MAX_ITERATIONS):
        an = -i * (i - s)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < TINY, TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < TINY, TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= EPS):
            break
    return np.exp(-x + s * np.log(x) - gammaln(s)) * h


def regularized_lower_gamma(s, x):
    """P(s, x) = gamma(s, x) / Gamma(s), for s > 0 and x >= 0"""
    s_arr, x_arr = np.broadcast_arrays(np.asarray(s, dtype=np.float64), np.asarray(x, dtype=np.float64))
    if np.any(s_arr <= 0.0) or np.any(x_arr < 0.0) or not np.all(np.isfinite(s_arr)):
        raise DomainError('regularized_lower_gamma needs s > 0 and x >= 0')

    result = np.empty(s_arr.shape)
    infinite = np.isinf(x_arr)
    result[infinite] = 1.0
    series = (x_arr < s_arr + 1.0) & ~infinite
    fraction = ~series & ~infinite
    if np.any(series):
        result[series] = _gamma_series(s_arr[series], x_arr[series])
    if np.any(fraction):
        result[fraction] = 1.0 - _gamma_continued_fraction(s_arr[fraction], x_arr[fraction])
    return _scalar_or_array(np.clip(result, 0.0, 1.0), s, x)


def erf(x):
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(np.isnan(x_arr)):
        raise DomainError('erf of NaN')
    result = np.sign(x_arr) * np.asarray(regularized_lower_gamma(0.5, x_arr * x_arr))
    return _scalar_or_array(result, x)


def _beta_continued_fraction(a, b, x):
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < TINY, TINY, d)
    d = 1.0 / d
    h = d.copy()
    for m in range(1, MAX_ITERATIONS):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < TINY, TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < TINY, TINY, c)
        d = 1.0 / d
        h = h * d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = np.where(np.abs(d) < TINY, TINY, d)
        c = 1.0 + aa / c
        c = np.where(np.abs(c) < TINY, TINY, c)
        d = 1.0 / d
        delta = d * c
        h = h * delta
        if np.all(np.abs(delta - 1.0) <= EPS):
            break
    return h


def regularized_incomplete_beta(a, b, x):
    """I_x(a, b) for a, b > 0 and 0 <= x <= 1"""
    a_arr, b_arr, x_arr = np.broadcast_arrays(
        np.asarray(a, dtype=np.float64), np.asarray(b, dtype=np.float64), np.asarray(x, dtype=np.float64))
    if np.any(a_arr <= 0.0) or np.any(b_arr <= 0.0) or np.any(x_arr < 0.0) or np.any(x_arr > 1.0):
        raise DomainError('regularized_incomplete_beta needs a, b > 0 and 0 <= x <= 1')

    result = np.empty(x_arr.shape)
    result[x_arr == 0.0] = 0.0
    result[x_arr == 1.0] = 1.0
    interior = (x_arr > 0.0) & (x_arr < 1.0)
    if np.any(interior):
        a_in, b_in, x_in = a_arr[interior], b_arr[interior], x_arr[interior]
        log_front = (gammaln(a_in + b_in) - gammaln(a_in) - gammaln(b_in)
                     + a_in * np.log(x_in) + b_in * np.log1p(-x_in))
        front = np.exp(log_front)
        direct = x_in < (a_in + 1.0) / (a_in + b_in + 2.0)
        values = np.empty(x_in.shape)
        if np.any(direct):
            values[direct] = (front[direct]
                              * _beta_continued_fraction(a_in[direct], b_in[direct], x_in[direct])
                              / a_in[direct])
        flipped = ~direct
        if np.any(flipped):
            values[flipped] = 1.0 - (front[flipped]
                                     * _beta_continued_fraction(b_in[flipped], a_in[flipped], 1.0 - x_in[flipped])
                                     / b_in[flipped])
        result[interior] = values
    return _scalar_or_array(np.clip(result, 0.0, 1.0), a, b, x)


# ============================================================
# DISTRIBUTION FUNCTIONS
# ============================================================

def normal_cdf(z):
    """Standard Normal CDF"""
    return 0.5 * (1.0 + np.asarray(erf(np.asarray(z) / np.sqrt(2.0))))


def student_t_cdf(t, dof):
    """
    Standard Student-t CDF

    Split at the location: the incomplete-beta tail is mirrored for
    t > 0; t == 0 gives exactly 0.5.
    """
    t = np.asarray(t, dtype=np.float64)
    dof = np.asarray(dof, dtype=np.float64)
    t, dof = np.broadcast_arrays(t, dof)
    tail = 0.5 * np.asarray(regularized_incomplete_beta(dof / 2.0, 0.5, dof / (dof + t * t)))
    return np.where(t > 0.0, 1.0 - tail, tail)


def chi2_sf(statistic, dof):
    """Upper tail of the chi-square distribution"""
    if dof <= 0:
        return 1.0
    return 1.0 - float(regularized_lower_gamma(dof / 2.0, max(float(statistic), 0.0) / 2.0))

# FILE: experiments/judging.py
# ============================================================
"""
Strike-outs, win/tie flags and tallies

Pure functions of ModelScore vectors, so a serialized report can be
replayed without retraining.

Per dataset:
- struck: one-sided paired t-test of squared errors against the
  unit-variance baseline, p < alpha (failed models are struck too)
- competitors: every scored model except the baseline and struck models
- RMSE win/tie: best competitor RMSE, or not significantly worse than it
  (paired t-test)
- ECE win/tie: best competitor ECE or G-test p >= alpha against the best
  histogram
- LL win/tie: best competitor mean LL or one-sided KS p >= alpha against
  the best LL sample

The baseline is a reference, not a competitor: it wins nothing and has
no tally.
"""

import logging

from HeteroLab.constants import ROSTER_LABELS, UNIT_VARIANCE
from metrics.scores import ModelScore
from metrics.significance import g_test_histograms, ks_test_one_sided, paired_t_test_one_sided

logger = logging.getLogger(__name__)

METRICS = ('rmse', 'ece', 'll')


def judge_dataset(dataset, scores, alpha=0.05, errors=None, baseline=UNIT_VARIANCE, order=None):
    """
    scores: {model key: ModelScore}; errors: {model key: message} for failed models
    Returns one row per model, in `order` (default: scores then errors).
    """
    errors = errors or {}
    order = list(order) if order else [*scores, *[key for key in errors if key not in scores]]

    strike_p = {}
    if baseline in scores:
        for key, score in scores.items():
            strike_p[key] = paired_t_test_one_sided(score.squared_errors, scores[baseline].squared_errors)
    else:
        logger.warning('%s: no %s baseline, strike-outs skipped', dataset, baseline)
    struck = {key: key in errors or strike_p.get(key, 1.0) < alpha for key in order}
    for key in order:
        if struck[key] and key not in errors:
            logger.warning('%s: %s struck out (p=%.4g)', dataset, key, strike_p[key])

    wins = {key: dict.fromkeys(METRICS, False) for key in order}
    pool = {key: score for key, score in scores.items() if key != baseline and not struck[key]}
    if pool:
        best = min(pool, key=lambda key: pool[key].rmse)
        for key, score in pool.items():
            wins[key]['rmse'] = key == best or paired_t_test_one_sided(
                score.squared_errors, pool[best].squared_errors) >= alpha
        best = min(pool, key=lambda key: pool[key].ece)
        for key, score in pool.items():
            wins[key]['ece'] = key == best or g_test_histograms(score.histogram, pool[best].histogram) >= alpha
        best = max(pool, key=lambda key: pool[key].mean_ll)
        for key, score in pool.items():
            wins[key]['ll'] = key == best or ks_test_one_sided(score.ll, pool[best].ll) >= alpha

    rows = []
    for key in order:
        score = scores.get(key)
        rows.append({
            'dataset': dataset,
            'model': key,
            'label': ROSTER_LABELS.get(key, key),
            'rmse': None if score is None else score.rmse,
            'ece': None if score is None else score.ece,
            'll': None if score is None else score.mean_ll,
            'struck': bool(struck[key]),
            'strike_p': strike_p.get(key),
            'wins': wins[key],
            'error': errors.get(key),
        })
    return rows


def tally(rows, order=None, baseline=UNIT_VARIANCE):
    """Total wins or ties per competing model and metric; the baseline gets no entry"""
    tallies = {}
    for key in order or []:
        if key != baseline:
            tallies[key] = {**dict.fromkeys(METRICS, 0), 'total': 0}
    for row in rows:
        if row['model'] == baseline:
            continue
        counts = tallies.setdefault(row['model'], {**dict.fromkeys(METRICS, 0), 'total': 0})
        for metric in METRICS:
            if row['wins'][metric]:
                counts[metric] += 1
                counts['total'] += 1
    return tallies


def replay_report(results):
    """
    Recompute rows and tallies from a serialized report (results.json content)
    """
    alpha = results['config']['significance_level']
    models = results['config'].get('models') or None
    errors = {}
    for row in results['rows']:
        if row.get('error'):
            errors.setdefault(row['dataset'], {})[row['model']] = row['error']

    datasets = list(dict.fromkeys([row['dataset'] for row in results['rows']]))
    rows = []
    for dataset in datasets:
        scores = {
            key: ModelScore.from_dict(data)
            for key, data in results['scores'].get(dataset, {}).items()
        }
        order = [row['model'] for row in results['rows'] if row['dataset'] == dataset]
        rows.extend(judge_dataset(dataset, scores, alpha, errors.get(dataset), order=order))
    return {'rows': rows, 'tallies': tally(rows, models)}

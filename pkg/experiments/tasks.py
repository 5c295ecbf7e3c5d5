# FILE: experiments/tasks.py
# ============================================================
"""
Celery tasks

With CELERY_TASK_ALWAYS_EAGER (the default) every job runs in-process
in submission order; with a broker the jobs fan out to workers. Results
are keyed by (dataset, seed, fold, model), so merge order never matters.
"""

import logging

from celery import shared_task

from .jobs import run_fold_job

logger = logging.getLogger(__name__)


@shared_task(name='experiments.fit_fold')
def fit_fold(payload):
    return run_fold_job(payload)


def dispatch(payloads):
    """Submit every payload, then wait for all results"""
    pending = [fit_fold.delay(payload) for payload in payloads]
    logger.info('dispatched %d fold jobs', len(pending))
    return [result.get() for result in pending]

"""
Celery application for HeteroLab.

Jobs are (dataset, fold, model) training runs. With the default eager
settings they execute in-process; set CELERY_BROKER_URL to a Redis URL
and CELERY_TASK_ALWAYS_EAGER=False to fan them out to workers.
"""

import os

from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'HeteroLab.settings')

app = Celery('HeteroLab')

# Read CELERY_* keys from Django settings
app.config_from_object('django.conf:settings', namespace='CELERY')

app.autodiscover_tasks()

from django.db import models
from django.utils.translation import gettext_lazy as _

from HeteroLab.constants import EXPERIMENTS, FAMILIES


class ExperimentRunManager(models.Manager):
    """
    Manager for stored experiment runs
    """

    def record(self, report, output_dir=''):
        """Persist an ExperimentReport (its results.json content)"""
        results = report.to_dict()
        return self.create(
            experiment=report.experiment,
            family=report.config.get('family', 'normal'),
            seeds=','.join(str(seed) for seed in report.config.get('seeds', [])),
            passed=report.passed,
            output_dir=str(output_dir),
            results=results,
        )


class ExperimentRun(models.Model):
    """
    One finished experiment with its full report
    """

    EXPERIMENT_CHOICES = tuple((name, name.replace('-', ' ').title()) for name in EXPERIMENTS)
    FAMILY_CHOICES = tuple((name, name.replace('-', ' ').title()) for name in FAMILIES)

    experiment = models.CharField(
        max_length=32,
        choices=EXPERIMENT_CHOICES,
        help_text=_('Experiment kind')
    )

    family = models.CharField(
        max_length=32,
        choices=FAMILY_CHOICES,
        default='normal',
        help_text=_('Model family')
    )

    seeds = models.CharField(
        max_length=255,
        blank=True,
        help_text=_('Comma-separated experiment seeds')
    )

    passed = models.BooleanField(
        null=True,
        blank=True,
        help_text=_('Faithfulness verdict (verification runs only)')
    )

    output_dir = models.CharField(
        max_length=500,
        blank=True,
        help_text=_('Directory the report files were written to')
    )

    results = models.JSONField(
        default=dict,
        help_text=_('results.json content')
    )

    created_at = models.DateTimeField(auto_now_add=True)

    objects = ExperimentRunManager()

    class Meta:
        verbose_name = _('Experiment Run')
        verbose_name_plural = _('Experiment Runs')
        ordering = ['-created_at', '-id']
        indexes = [
            models.Index(fields=['experiment', 'created_at'], name='experiments_kind_created_idx'),
        ]

    def __str__(self):
        return f'{self.experiment} #{self.pk} ({self.family})'

    @property
    def tallies(self):
        return self.results.get('tallies', {})

    @property
    def row_count(self):
        return len(self.results.get('rows', []))

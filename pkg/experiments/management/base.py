# FILE: experiments/management/base.py
# ============================================================
"""
Shared command-line surface for the experiment commands

    python manage.py <convergence|tabular|decompose|verify|family> [flags]

Exit codes: 0 on success, 1 on errors, 2 when faithfulness verification fails.
"""

import logging

from decouple import Csv
from django.core.management.base import BaseCommand, CommandError

from HeteroLab.exceptions import HeteroLabError

from ..config import load_experiment_config
from ..models import ExperimentRun
from ..reporting import emit_report
from ..runners import run_experiment

logger = logging.getLogger(__name__)

VERIFICATION_FAILED = 2


class ExperimentCommand(BaseCommand):
    experiment = None

    def add_arguments(self, parser):
        parser.add_argument('--config', help='KEY=VALUE experiment config file')
        parser.add_argument('--data', nargs='+', help='CSV dataset paths')
        parser.add_argument('--targets', help='Comma-separated target columns')
        parser.add_argument('--group-column', help='Replicate-group id column')
        parser.add_argument('--out', help='Output directory')
        parser.add_argument('--seed', type=int, nargs='+', help='Experiment seed(s)')
        parser.add_argument('--folds', type=int, help='Cross-validation folds')
        parser.add_argument('--ece-bins', type=int, help='Equal-width ECE bins')
        parser.add_argument('--family', choices=('normal', 'student', 'deep-ensemble', 'mc-dropout'))
        parser.add_argument('--members', type=int, help='Ensemble members / dropout samples (M)')
        parser.add_argument('--dropout-rate', type=float)
        parser.add_argument('--models', help='Comma-separated roster keys')
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--record', action='store_true', help='Store the report as an ExperimentRun')

    def overrides(self, options):
        return {
            'experiment': self.experiment,
            'data': options['data'],
            'targets': Csv()(options['targets']) if options['targets'] else None,
            'group_column': options['group_column'],
            'output_dir': options['out'],
            'seeds': options['seed'],
            'folds': options['folds'],
            'ece_bins': options['ece_bins'],
            'family': options['family'],
            'members': options['members'],
            'dropout_rate': options['dropout_rate'],
            'models': Csv()(options['models']) if options['models'] else None,
            'epochs': options['epochs'],
        }

    def handle(self, *args, **options):
        try:
            config = load_experiment_config(options['config'], **self.overrides(options))
            report = run_experiment(config)
            written = emit_report(report, config.output_dir)
        except HeteroLabError as exc:
            logger.error('%s failed: %s', self.experiment, exc)
            raise CommandError(str(exc)) from exc

        if options['record']:
            run = ExperimentRun.objects.record(report, config.output_dir)
            self.stdout.write(f'Recorded run #{run.pk}')

        for failure in report.failures:
            self.stderr.write(self.style.WARNING(
                f"{failure['dataset']} / {failure['model']}: {failure['error']}"))
        self.stdout.write(self.style.SUCCESS(f'Wrote {len(written)} files to {config.output_dir}'))
        self.after_report(report)

    def after_report(self, report):
        pass

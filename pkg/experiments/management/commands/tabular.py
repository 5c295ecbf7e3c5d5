from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Cross-validate the roster on CSV (or synthetic) tables with strike-outs and win/tie tallies'
    experiment = 'tabular'

    def after_report(self, report):
        for model, counts in report.tallies.items():
            self.stdout.write(f"{model:>14}  rmse {counts['rmse']}  ece {counts['ece']}  ll {counts['ll']}")

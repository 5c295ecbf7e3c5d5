from django.core.management.base import CommandError

from HeteroLab.exceptions import VerificationError

from ...runners import require_passed
from ..base import VERIFICATION_FAILED, ExperimentCommand


class Command(ExperimentCommand):
    help = 'Certify that a model and its mean-only twin keep bitwise-identical (z, mu) parameters'
    experiment = 'verify-faithful'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--loss', help="Roster key or loss kind to verify, e.g. 'faithful' or 'beta-nll(1.0)'")

    def overrides(self, options):
        return {**super().overrides(options), 'verify_loss': options['loss']}

    def after_report(self, report):
        certificate = report.certificate
        try:
            require_passed(certificate)
        except VerificationError as exc:
            raise CommandError(f"{certificate['loss']}: {exc}", returncode=VERIFICATION_FAILED) from exc
        self.stdout.write(self.style.SUCCESS(
            f"{certificate['loss']}: bitwise identical over {certificate['epochs']} epochs"))

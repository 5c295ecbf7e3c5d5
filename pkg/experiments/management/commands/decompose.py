from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Recover the noise variance as the difference of noisy- and clean-trained faithful models'
    experiment = 'decompose'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--noise', choices=('sine', 'zero'), help='Noise law of the synthetic pair')

    def overrides(self, options):
        return {**super().overrides(options), 'decompose_noise': options['noise']}

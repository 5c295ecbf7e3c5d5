from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train deep-ensemble or MC-dropout wrappers (--family) and score their mixture predictions'
    experiment = 'family'

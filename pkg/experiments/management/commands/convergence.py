from ..base import ExperimentCommand


class Command(ExperimentCommand):
    help = 'Train the roster on the sine task and emit predictive curves at every snapshot'
    experiment = 'convergence'

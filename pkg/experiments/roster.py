# FILE: experiments/roster.py
# ============================================================
"""
Model roster

Each roster key names a (loss, architecture, predictive distribution)
triple. Deep ensembles and MC dropout wrap the Normal roster.
"""

from dataclasses import dataclass

from HeteroLab.constants import (
    BETA_NLL_HALF, BETA_NLL_ONE, CONVENTIONAL, FAITHFUL, NORMAL_ROSTER, PROPOSAL_1,
    PROPOSAL_2, ROSTER_LABELS, STUDENT_ROSTER, UNIT_VARIANCE,
)
from HeteroLab.exceptions import ConfigurationError
from losses.objectives import LossSpec
from predictive.distributions import NormalDiag, Student

NORMAL_LOSSES = {
    UNIT_VARIANCE: LossSpec('sse'),
    CONVENTIONAL: LossSpec('gaussian-nll'),
    BETA_NLL_HALF: LossSpec('beta-nll', 0.5),
    BETA_NLL_ONE: LossSpec('beta-nll', 1.0),
    PROPOSAL_1: LossSpec('proposal-1'),
    PROPOSAL_2: LossSpec('proposal-2'),
    FAITHFUL: LossSpec('faithful'),
}

STUDENT_LOSSES = {
    UNIT_VARIANCE: LossSpec('sse'),
    CONVENTIONAL: LossSpec('student-nll'),
    FAITHFUL: LossSpec('faithful-student'),
}


def likelihood_family(family):
    """'student' for Student models, 'normal' for everything else"""
    return 'student' if family == 'student' else 'normal'


def default_roster(family):
    return STUDENT_ROSTER if likelihood_family(family) == 'student' else NORMAL_ROSTER


@dataclass(frozen=True)
class ModelVariant:
    key: str
    loss: LossSpec
    likelihood: str = 'normal'

    @property
    def label(self):
        return ROSTER_LABELS[self.key]

    @property
    def mean_only(self):
        return self.loss.kind == 'sse'

    def architecture(self, spec):
        if self.mean_only:
            return spec.mean_only()
        if self.likelihood == 'student':
            return spec.with_dof_head()
        return spec

    def predictive(self, moments):
        """Wrap a Moments record from predict_moments() into a distribution"""
        if self.mean_only:
            if self.likelihood == 'student':
                return Student.unit_variance(moments.mean)
            return NormalDiag.unit_variance(moments.mean)
        if self.likelihood == 'student':
            return Student(moments.mean, moments.scale, moments.dof)
        return NormalDiag(moments.mean, moments.variance)


def roster_variant(key, family='normal'):
    likelihood = likelihood_family(family)
    losses = STUDENT_LOSSES if likelihood == 'student' else NORMAL_LOSSES
    if key not in losses:
        raise ConfigurationError(f'model {key!r} is not in the {family} roster ({", ".join(losses)})')
    return ModelVariant(key, losses[key], likelihood)


def resolve_loss(text, family='normal'):
    """A roster key ('conventional') or a loss kind ('beta-nll(1.0)') -> LossSpec"""
    losses = STUDENT_LOSSES if likelihood_family(family) == 'student' else NORMAL_LOSSES
    if text in losses:
        return losses[text]
    return LossSpec.parse(text)

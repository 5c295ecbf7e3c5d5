# FILE: losses/objectives.py
# ============================================================
"""
Training objectives

Every loss is a SUM over examples and output dimensions, never a mean.
Each builder appends nodes to a Graph and returns the scalar loss node.

Kinds:
- sse:              1/2 sum |y - mu|^2
- gaussian-nll:     conventional Normal NLL
- faithful:         sse + NLL(y; stop(mu), var(stop(z)))
- beta-nll:         stop(var^beta) * (1/2 log var + (y - mu)^2 / (2 var))
- student-nll:      conventional Student NLL
- faithful-student: sse + StudentNLL(y; stop(mu), sigma(stop(z)), nu(stop(z)))
- proposal-1:       sse + NLL(y; stop(mu), var(z))       (variance still reaches z)
- proposal-2:       NLL(y; mu, var(stop(z)))             (mean gradient unscaled)
"""

import logging
import math
from dataclasses import dataclass

from HeteroLab.constants import LOG_2PI
from HeteroLab.exceptions import ConfigurationError, WiringError

logger = logging.getLogger(__name__)

LOSS_KINDS = (
    'sse', 'gaussian-nll', 'faithful', 'beta-nll', 'student-nll',
    'faithful-student', 'proposal-1', 'proposal-2',
)
SHIELDED_KINDS = ('faithful', 'faithful-student', 'proposal-2')
AUDITED_KINDS = ('faithful', 'faithful-student')
STUDENT_KINDS = ('student-nll', 'faithful-student')


@dataclass(frozen=True)
class LossSpec:
    kind: str
    beta: float = None

    def __post_init__(self):
        if self.kind not in LOSS_KINDS:
            raise ConfigurationError(f'unknown loss kind {self.kind!r}')
        if self.kind == 'beta-nll':
            if self.beta is None or not 0.0 <= self.beta <= 1.0:
                raise ConfigurationError(f'beta-nll needs beta in [0, 1], got {self.beta}')
        elif self.beta is not None:
            raise ConfigurationError(f'{self.kind} takes no beta')

    @property
    def shields_trunk(self):
        """Scale / dof heads read stop_gradient(z)"""
        return self.kind in SHIELDED_KINDS

    @property
    def needs_scale(self):
        return self.kind != 'sse'

    @property
    def needs_dof(self):
        return self.kind in STUDENT_KINDS

    def __str__(self):
        return f'beta-nll({self.beta:g})' if self.kind == 'beta-nll' else self.kind

    @classmethod
    def parse(cls, text):
        """'faithful', 'beta-nll(0.5)' -> LossSpec"""
        text = text.strip()
        if text.startswith('beta-nll(') and text.endswith(')'):
            try:
                beta = float(text[len('beta-nll('):-1])
            except ValueError as exc:
                raise ConfigurationError(f'cannot parse beta in {text!r}') from exc
            return cls('beta-nll', beta)
        return cls(text)


# ============================================================
# WIRING AUDIT
# ============================================================

def audit_wiring(graph, likelihood_term, mean):
    """
    Fail fast when stop-gradients are misplaced

    The likelihood term must not share a differentiable ancestor with the
    live mean: no variance-branch path into the trunk, no live mean in
    the likelihood.
    """
    leaked = graph.live_ancestors(likelihood_term) & graph.live_ancestors(mean)
    if leaked:
        names = sorted(graph.nodes[i].name or f'{graph.nodes[i].op}#{i}' for i in leaked)
        raise WiringError(f'likelihood term reaches mean-path nodes {names}')


# ============================================================
# LOSSES
# ============================================================

def sse_loss(graph, y, mean):
    residual = graph.sub(mean, y, strict=True)
    return graph.reduce_sum(graph.scale(graph.square(residual), 0.5))


def _gaussian_terms(graph, y, mean, variance):
    # log var + (y - mu)^2 / var
    squared = graph.square(graph.sub(y, mean, strict=True))
    return graph.add(graph.log(variance), graph.div(squared, variance, strict=True), strict=True)


def gaussian_nll(graph, y, mean, variance):
    per_entry = graph.shift(_gaussian_terms(graph, y, mean, variance), LOG_2PI)
    return graph.reduce_sum(graph.scale(per_entry, 0.5))


def faithful_loss(graph, y, mean, variance):
    """
    Mean trained as by SSE, variance by the NLL

    `variance` must be computed from stop_gradient(z).
    """
    likelihood = gaussian_nll(graph, y, graph.stop_gradient(mean), variance)
    audit_wiring(graph, likelihood, mean)
    return graph.add(sse_loss(graph, y, mean), likelihood)


def beta_nll(graph, y, mean, variance, beta):
    """Per-example NLL weighted by stop(var^beta); the 1/2 log 2pi constant is omitted"""
    if not 0.0 <= beta <= 1.0:
        raise ConfigurationError(f'beta must lie in [0, 1], got {beta}')
    weight = graph.stop_gradient(graph.exp(graph.scale(graph.log(variance), beta)))
    per_entry = graph.scale(_gaussian_terms(graph, y, mean, variance), 0.5)
    return graph.reduce_sum(graph.mul(weight, per_entry, strict=True))


def student_nll(graph, y, mean, scale, dof):
    """
    Negative log Student-t density

    -lgamma((nu+1)/2) + lgamma(nu/2) + 1/2 log(nu pi) + log sigma
        + (nu+1)/2 log(1 + ((y - mu) / sigma)^2 / nu)
    """
    standardized = graph.square(graph.div(graph.sub(y, mean, strict=True), scale, strict=True))
    half_dof_plus = graph.scale(graph.shift(dof, 1.0), 0.5)
    normalizer = graph.add(
        graph.sub(graph.lgamma(graph.scale(dof, 0.5)), graph.lgamma(half_dof_plus)),
        graph.scale(graph.log(graph.scale(dof, math.pi)), 0.5),
    )
    tail = graph.mul(half_dof_plus, graph.log(graph.shift(graph.div(standardized, dof, strict=True), 1.0)))
    per_entry = graph.add(graph.add(normalizer, graph.log(scale)), tail)
    return graph.reduce_sum(per_entry)


def faithful_student_loss(graph, y, mean, scale, dof):
    """`scale` and `dof` must be computed from stop_gradient(z)"""
    likelihood = student_nll(graph, y, graph.stop_gradient(mean), scale, dof)
    audit_wiring(graph, likelihood, mean)
    return graph.add(sse_loss(graph, y, mean), likelihood)


def proposal_one_loss(graph, y, mean, variance):
    """Newton-scaled mean gradient only; variance gradients still reach z"""
    likelihood = gaussian_nll(graph, y, graph.stop_gradient(mean), variance)
    return graph.add(sse_loss(graph, y, mean), likelihood)


def proposal_two_loss(graph, y, mean, variance):
    """Conventional NLL with variance computed from stop_gradient(z)"""
    return gaussian_nll(graph, y, mean, variance)


# ============================================================
# OBJECTIVE ASSEMBLY
# ============================================================

def build_objective(graph, spec, y, nodes):
    """
    Wire `spec` onto the model nodes returned by PartitionedModel.build()
    """
    if spec.needs_scale and nodes.variance is None:
        raise WiringError(f'loss {spec} needs a scale head')
    if spec.needs_dof and nodes.dof is None:
        raise WiringError(f'loss {spec} needs a dof head')
    if spec.shields_trunk and nodes.head_input == nodes.z:
        raise WiringError(f'loss {spec} needs heads built on stop_gradient(z)')

    kind = spec.kind
    if kind == 'sse':
        return sse_loss(graph, y, nodes.mean)
    if kind == 'gaussian-nll':
        return gaussian_nll(graph, y, nodes.mean, nodes.variance)
    if kind == 'faithful':
        return faithful_loss(graph, y, nodes.mean, nodes.variance)
    if kind == 'beta-nll':
        return beta_nll(graph, y, nodes.mean, nodes.variance, spec.beta)
    if kind == 'student-nll':
        return student_nll(graph, y, nodes.mean, nodes.scale, nodes.dof)
    if kind == 'faithful-student':
        return faithful_student_loss(graph, y, nodes.mean, nodes.scale, nodes.dof)
    if kind == 'proposal-1':
        return proposal_one_loss(graph, y, nodes.mean, nodes.variance)
    return proposal_two_loss(graph, y, nodes.mean, nodes.variance)

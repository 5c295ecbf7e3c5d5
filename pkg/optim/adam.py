"""
Deterministic Adam

One AdamState holds moments for every parameter of a model (trunk and
all heads alike). Updates are written in place so arrays shared with a
mean-only projection stay shared.
"""

from dataclasses import dataclass, field

import numpy as np

from HeteroLab.exceptions import ShapeError


@dataclass(frozen=True)
class AdamHyperparameters:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7

    def to_dict(self):
        return {
            'learning_rate': self.learning_rate,
            'beta1': self.beta1,
            'beta2': self.beta2,
            'epsilon': self.epsilon,
        }


@dataclass
class AdamState:
    hyperparameters: AdamHyperparameters = field(default_factory=AdamHyperparameters)
    step: int = 0
    first_moments: dict = field(default_factory=dict)
    second_moments: dict = field(default_factory=dict)

    @classmethod
    def for_parameters(cls, params, hyperparameters=None):
        return cls(
            hyperparameters or AdamHyperparameters(),
            0,
            {name: np.zeros_like(array) for name, array in params.items()},
            {name: np.zeros_like(array) for name, array in params.items()},
        )

    def copy(self):
        return AdamState(
            self.hyperparameters,
            self.step,
            {name: array.copy() for name, array in self.first_moments.items()},
            {name: array.copy() for name, array in self.second_moments.items()},
        )


def adam_step(params, grads, state):
    """
    One bias-corrected Adam update, in place

    A parameter missing from `grads` is updated with a zero gradient.
    Returns (params, state) for chaining.
    """
    hp = state.hyperparameters
    state.step += 1
    correction1 = 1.0 - hp.beta1 ** state.step
    correction2 = 1.0 - hp.beta2 ** state.step

    for name, param in params.items():
        grad = grads.get(name)
        if grad is None:
            grad = np.zeros_like(param)
        elif grad.shape != param.shape:
            raise ShapeError(f'gradient for {name} has shape {grad.shape}, parameter has {param.shape}')
        if name not in state.first_moments:
            state.first_moments[name] = np.zeros_like(param)
            state.second_moments[name] = np.zeros_like(param)

        m = state.first_moments[name]
        v = state.second_moments[name]
        m *= hp.beta1
        m += (1.0 - hp.beta1) * grad
        v *= hp.beta2
        v += (1.0 - hp.beta2) * (grad * grad)

        m_hat = m / correction1
        v_hat = v / correction2
        param -= hp.learning_rate * m_hat / (np.sqrt(v_hat) + hp.epsilon)

    return params, state

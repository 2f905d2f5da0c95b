"""ADAM optimizer with bias correction, shared by classifier training and
saliency-map learning."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    """First/second moment estimates and step counter for one parameter tensor."""

    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros_like(cls, param):
        return cls(m=np.zeros_like(param), v=np.zeros_like(param))


def adam_update(param, grad, state, lr, beta1=0.9, beta2=0.999, eps=1e-8):
    """One bias-corrected ADAM step. Returns the new parameter; mutates state."""
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad * grad
    m_hat = state.m / (1.0 - beta1 ** state.t)
    v_hat = state.v / (1.0 - beta2 ** state.t)
    return param - lr * m_hat / (np.sqrt(v_hat) + eps)


@dataclass
class Adam:
    """Convenience wrapper applying adam_update to a list of parameter tensors."""

    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    states: list = field(default_factory=list)

    def step(self, params, grads):
        if not self.states:
            self.states = [AdamState.zeros_like(p) for p in params]
        return [
            adam_update(p, g, s, self.lr, self.beta1, self.beta2, self.eps)
            for p, g, s in zip(params, grads, self.states)
        ]

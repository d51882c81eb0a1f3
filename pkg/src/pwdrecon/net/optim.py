"""RMSprop: the only optimizer used for training the reconstruction net."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from .model import PwDRecNetParams


@dataclass
class RmspropState:
    """Per-parameter squared-gradient accumulator plus hyperparameters."""

    lr: float = 1e-3
    rho: float = 0.9
    eps: float = 1e-8
    v: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise ValueError("rho must be in (0, 1)")


def rmsprop_step(params: PwDRecNetParams, grads: dict,
                 state: RmspropState) -> tuple[PwDRecNetParams, RmspropState]:
    """v <- rho*v + (1-rho)*g^2;  p <- p - lr * g / (sqrt(v) + eps).

    Updates parameters and state in place; returns them for chaining.
    """
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            raise ShapeMismatch(f"missing gradient for {name}")
        if g.shape != p.shape:
            raise ShapeMismatch(
                f"gradient shape {g.shape} != parameter shape {p.shape}")
        v = state.v.get(name)
        if v is None:
            v = np.zeros_like(p)
            state.v[name] = v
        v *= state.rho
        v += (1.0 - state.rho) * g * g
        p -= state.lr * g / (np.sqrt(v) + state.eps)
    return params, state

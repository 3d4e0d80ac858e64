"""Adam updates over a model's parameter tensors.

Each tensor carries its own first/second moment estimates and step count,
so tensors that start training later (e.g. freshly attached heads) get
correct bias correction from their own step 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from comprel.errors import InputError, NumericError
from comprel.nn.params import ModelParams, ParamTensor


@dataclass(frozen=True)
class AdamConfig:
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def __post_init__(self) -> None:
        if self.eta <= 0.0:
            raise InputError(f"eta must be positive, got {self.eta}")
        if not 0.0 <= self.beta1 < 1.0:
            raise InputError(f"beta1 must lie in [0, 1), got {self.beta1}")
        if not 0.0 <= self.beta2 < 1.0:
            raise InputError(f"beta2 must lie in [0, 1), got {self.beta2}")
        if self.epsilon <= 0.0:
            raise InputError(f"epsilon must be positive, got {self.epsilon}")


def update_tensor(tensor: ParamTensor, config: AdamConfig) -> None:
    """One Adam step for a single tensor, consuming its accumulated grad."""
    g = tensor.grad
    if not np.all(np.isfinite(g)):
        raise NumericError(f"non-finite gradient in tensor {tensor.name!r}")
    tensor.step_count += 1
    t = tensor.step_count
    tensor.m = config.beta1 * tensor.m + (1.0 - config.beta1) * g
    tensor.v = config.beta2 * tensor.v + (1.0 - config.beta2) * (g * g)
    m_hat = tensor.m / (1.0 - config.beta1**t)
    v_hat = tensor.v / (1.0 - config.beta2**t)
    tensor.values -= config.eta * m_hat / (np.sqrt(v_hat) + config.epsilon)
    if not np.all(np.isfinite(tensor.values)):
        raise NumericError(f"non-finite values in tensor {tensor.name!r} after update")


def adam_step(params: ModelParams, config: AdamConfig) -> None:
    """Apply one Adam step to every distinct tensor, then clear gradients.

    Shared tensors (aliased into several heads) are updated exactly once.
    """
    for tensor in params.tensors():
        update_tensor(tensor, config)
        tensor.clear_grad()

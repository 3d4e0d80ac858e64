"""Finite-difference verification of the analytic gradients.

Central differences on the summed cross-entropy, one coordinate at a
time. The headline error is computed per tensor: the max-abs difference
between analytic and numeric gradients, normalised by the larger of the
two gradient max-norms (floored at 1e-8). This keeps coordinates whose
true gradient is near zero from drowning the signal in truncation noise
while still catching any systematic backprop defect, which perturbs
coordinates of every magnitude.

Exhaustive by default; pass max_coords_per_tensor to spot-check large
tensors on a seeded sample of coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from comprel.nn import network
from comprel.nn.params import ModelParams
from comprel.rng import stream


@dataclass
class GradCheckReport:
    epsilon: float
    coords_checked: int = 0
    max_rel_error: float = 0.0
    worst_tensor: str = ""
    per_tensor: dict[str, float] = field(default_factory=dict)

    def passed(self, tolerance: float) -> bool:
        return self.max_rel_error < tolerance


def _total_loss(params: ModelParams, batch: np.ndarray, gold: np.ndarray, head: str) -> float:
    trace = network.forward(params, batch, head)
    return network.loss(trace, gold) * trace.batch_size


def gradient_check(
    params: ModelParams,
    batch: np.ndarray,
    gold: np.ndarray,
    head: str,
    epsilon: float = 1e-3,
    max_coords_per_tensor: int | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Compare backward() against central differences for one batch."""
    for tensor in params.tensors():
        tensor.clear_grad()
    trace = network.forward(params, batch, head)
    network.backward(params, trace, gold, head)

    report = GradCheckReport(epsilon=epsilon)
    rng = stream(seed, "gradcheck")
    for tensor in params.task_tensors(head):
        flat_values = tensor.values.reshape(-1)
        flat_grad = tensor.grad.reshape(-1)
        n = flat_values.size
        if max_coords_per_tensor is not None and n > max_coords_per_tensor:
            coords = rng.choice(n, size=max_coords_per_tensor, replace=False)
        else:
            coords = np.arange(n)
        analytic = flat_grad[coords]
        numeric = np.empty(len(coords))
        for k, i in enumerate(coords):
            original = flat_values[i]
            flat_values[i] = original + epsilon
            up = _total_loss(params, batch, gold, head)
            flat_values[i] = original - epsilon
            down = _total_loss(params, batch, gold, head)
            flat_values[i] = original
            numeric[k] = (up - down) / (2.0 * epsilon)
            report.coords_checked += 1
        scale = max(np.abs(analytic).max(initial=0.0), np.abs(numeric).max(initial=0.0), 1e-8)
        rel = float(np.abs(analytic - numeric).max(initial=0.0) / scale)
        report.per_tensor[tensor.name] = rel
        if rel > report.max_rel_error:
            report.max_rel_error = rel
            report.worst_tensor = tensor.name
    return report

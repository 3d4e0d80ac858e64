"""Trainable tensors and the parameter container for the classifier stack.

The model is: embedding lookup for the two constituent words, concatenation
(2d), a dense sigmoid hidden layer of size d, and one softmax output head
per task. Multi-task variants share the embedding and optionally the hidden
layer; sharing is expressed by aliasing, i.e. both task slots hold the very
same ParamTensor object (one set of Adam moments, one step count).

All arithmetic is float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from comprel import rng
from comprel.errors import InputError


@dataclass
class ParamTensor:
    """One trainable array with its gradient and Adam moment state."""

    name: str
    values: np.ndarray
    grad: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    m: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    v: np.ndarray = field(repr=False, default=None)  # type: ignore[assignment]
    step_count: int = 0

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.grad is None:
            self.grad = np.zeros_like(self.values)
        if self.m is None:
            self.m = np.zeros_like(self.values)
        if self.v is None:
            self.v = np.zeros_like(self.values)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.values.shape

    def clear_grad(self) -> None:
        self.grad[...] = 0.0

    def reset_optimizer_state(self) -> None:
        self.m[...] = 0.0
        self.v[...] = 0.0
        self.step_count = 0


def glorot_uniform(rows: int, cols: int, generator: np.random.Generator) -> np.ndarray:
    """Uniform init in ±sqrt(6 / (fan_in + fan_out))."""
    limit = np.sqrt(6.0 / (rows + cols))
    return generator.uniform(-limit, limit, size=(rows, cols))


@dataclass
class ModelParams:
    """Embedding plus per-task hidden and output tensors.

    The dicts are keyed by task id. Shared layers are represented by the
    same ParamTensor object appearing under several keys; `tensors()`
    deduplicates by identity so each physical tensor is visited once.
    """

    embedding: ParamTensor
    hidden_w: dict[str, ParamTensor]
    hidden_b: dict[str, ParamTensor]
    out_w: dict[str, ParamTensor]
    out_b: dict[str, ParamTensor]

    @property
    def dim(self) -> int:
        return self.embedding.values.shape[1]

    @property
    def vocab_size(self) -> int:
        return self.embedding.values.shape[0]

    def tasks(self) -> list[str]:
        return list(self.out_w.keys())

    def n_classes(self, task: str) -> int:
        return self.out_w[task].values.shape[1]

    def has_task(self, task: str) -> bool:
        return task in self.out_w

    def tensors(self) -> list[ParamTensor]:
        """All physical tensors, deduplicated, in a stable order."""
        seen: dict[int, ParamTensor] = {}
        for tensor in self._all_slots():
            seen.setdefault(id(tensor), tensor)
        return list(seen.values())

    def _all_slots(self) -> list[ParamTensor]:
        slots = [self.embedding]
        for group in (self.hidden_w, self.hidden_b, self.out_w, self.out_b):
            slots.extend(group[task] for task in sorted(group))
        return slots

    def task_tensors(self, task: str) -> list[ParamTensor]:
        """Tensors touched by a forward/backward pass through `task`'s head."""
        return [
            self.embedding,
            self.hidden_w[task],
            self.hidden_b[task],
            self.out_w[task],
            self.out_b[task],
        ]

    def snapshot(self) -> dict[str, np.ndarray]:
        return {t.name: t.values.copy() for t in self.tensors()}

    def restore(self, snap: dict[str, np.ndarray]) -> None:
        for tensor in self.tensors():
            tensor.values[...] = snap[tensor.name]

    def clone(self) -> "ModelParams":
        """Deep copy preserving the aliasing structure of shared layers."""
        copies: dict[int, ParamTensor] = {}

        def dup(t: ParamTensor) -> ParamTensor:
            if id(t) not in copies:
                copies[id(t)] = ParamTensor(
                    name=t.name,
                    values=t.values.copy(),
                    grad=t.grad.copy(),
                    m=t.m.copy(),
                    v=t.v.copy(),
                    step_count=t.step_count,
                )
            return copies[id(t)]

        return ModelParams(
            embedding=dup(self.embedding),
            hidden_w={k: dup(t) for k, t in self.hidden_w.items()},
            hidden_b={k: dup(t) for k, t in self.hidden_b.items()},
            out_w={k: dup(t) for k, t in self.out_w.items()},
            out_b={k: dup(t) for k, t in self.out_b.items()},
        )


def _head_tensors(dim: int, n_classes: int, task: str, seed: int) -> tuple[ParamTensor, ParamTensor]:
    w = ParamTensor(
        name=f"out_w.{task}",
        values=glorot_uniform(dim, n_classes, rng.stream(seed, "out_w", task)),
    )
    b = ParamTensor(name=f"out_b.{task}", values=np.zeros(n_classes))
    return w, b


def _hidden_tensors(dim: int, stream_task: str, label: str, seed: int) -> tuple[ParamTensor, ParamTensor]:
    w = ParamTensor(
        name=f"hidden_w.{label}",
        values=glorot_uniform(2 * dim, dim, rng.stream(seed, "hidden_w", stream_task)),
    )
    b = ParamTensor(name=f"hidden_b.{label}", values=np.zeros(dim))
    return w, b


def build_single(vocab_matrix: np.ndarray, n_classes: int, task: str, seed: int) -> ModelParams:
    """Single-head model: pretrained embedding rows, seeded dense layers."""
    if n_classes < 1:
        raise InputError("model needs at least one output class")
    matrix = np.asarray(vocab_matrix, dtype=np.float64)
    dim = matrix.shape[1]
    emb = ParamTensor(name="embedding", values=matrix.copy())
    hw, hb = _hidden_tensors(dim, stream_task=task, label=task, seed=seed)
    ow, ob = _head_tensors(dim, n_classes, task, seed)
    return ModelParams(
        embedding=emb,
        hidden_w={task: hw},
        hidden_b={task: hb},
        out_w={task: ow},
        out_b={task: ob},
    )


def build_dual(
    vocab_matrix: np.ndarray,
    n_classes_by_task: dict[str, int],
    sharing: str,
    main_task: str,
    seed: int,
) -> ModelParams:
    """Two-head model with a shared embedding.

    sharing "E": task-specific hidden layers. sharing "F": one hidden layer
    aliased into both task slots. The shared hidden layer draws its init
    from the main task's stream, so a fully shared model starts from the
    same weights as the main task's single-head model under the same seed.
    """
    if sharing not in ("E", "F"):
        raise InputError(f"unknown sharing mode {sharing!r} (expected 'E' or 'F')")
    if main_task not in n_classes_by_task:
        raise InputError(f"main task {main_task!r} missing from head sizes")
    matrix = np.asarray(vocab_matrix, dtype=np.float64)
    dim = matrix.shape[1]
    emb = ParamTensor(name="embedding", values=matrix.copy())
    tasks = sorted(n_classes_by_task)

    hidden_w: dict[str, ParamTensor] = {}
    hidden_b: dict[str, ParamTensor] = {}
    if sharing == "F":
        hw, hb = _hidden_tensors(dim, stream_task=main_task, label="shared", seed=seed)
        for task in tasks:
            hidden_w[task] = hw
            hidden_b[task] = hb
    else:
        for task in tasks:
            hw, hb = _hidden_tensors(dim, stream_task=task, label=task, seed=seed)
            hidden_w[task] = hw
            hidden_b[task] = hb

    out_w: dict[str, ParamTensor] = {}
    out_b: dict[str, ParamTensor] = {}
    for task in tasks:
        ow, ob = _head_tensors(dim, n_classes_by_task[task], task, seed)
        out_w[task] = ow
        out_b[task] = ob

    return ModelParams(
        embedding=emb, hidden_w=hidden_w, hidden_b=hidden_b, out_w=out_w, out_b=out_b
    )

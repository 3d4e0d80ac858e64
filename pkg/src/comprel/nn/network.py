"""Forward and backward passes for the two-word classifier stack.

Forward: look up the two constituent rows, concatenate, dense + sigmoid,
dense + softmax. Backward accumulates the gradient of the *summed*
per-item cross-entropy into each tensor's `grad` field; sums from
successive calls add up, so backprop over two half batches equals backprop
over their union. `loss` reports the batch mean for logging.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from comprel.errors import InputError, NumericError
from comprel.nn.params import ModelParams

PROB_FLOOR = 1e-12


@dataclass
class ForwardTrace:
    """Intermediate activations kept for the backward pass."""

    head: str
    input_indices: np.ndarray
    concat_embed: np.ndarray
    hidden_pre: np.ndarray
    hidden_act: np.ndarray
    logits: np.ndarray
    probs: np.ndarray

    @property
    def batch_size(self) -> int:
        return self.logits.shape[0]

    @property
    def left(self) -> np.ndarray:
        return self.input_indices[:, 0]

    @property
    def right(self) -> np.ndarray:
        return self.input_indices[:, 1]


def sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax, stabilised by max subtraction."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    ex = np.exp(shifted)
    return ex / ex.sum(axis=1, keepdims=True)


def _as_index_pairs(batch: np.ndarray) -> np.ndarray:
    pairs = np.asarray(batch, dtype=np.int64)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise InputError(f"expected an (n, 2) array of index pairs, got shape {pairs.shape}")
    return pairs


def forward(params: ModelParams, batch: np.ndarray, head: str) -> ForwardTrace:
    """Run the stack for one head over a batch of (left, right) index pairs."""
    if not params.has_task(head):
        raise InputError(f"model has no head {head!r} (heads: {params.tasks()})")
    pairs = _as_index_pairs(batch)
    vocab = params.vocab_size
    if pairs.size and (pairs.min() < 0 or pairs.max() >= vocab):
        raise InputError(f"constituent index out of range for embedding with {vocab} rows")

    emb = params.embedding.values
    concat_embed = np.concatenate([emb[pairs[:, 0]], emb[pairs[:, 1]]], axis=1)
    hidden_pre = concat_embed @ params.hidden_w[head].values + params.hidden_b[head].values
    hidden_act = sigmoid(hidden_pre)
    logits = hidden_act @ params.out_w[head].values + params.out_b[head].values
    probs = softmax(logits)
    return ForwardTrace(
        head=head,
        input_indices=pairs,
        concat_embed=concat_embed,
        hidden_pre=hidden_pre,
        hidden_act=hidden_act,
        logits=logits,
        probs=probs,
    )


def _check_gold(trace: ForwardTrace, gold: np.ndarray) -> np.ndarray:
    gold = np.asarray(gold, dtype=np.int64)
    if gold.shape != (trace.batch_size,):
        raise InputError(
            f"gold labels have shape {gold.shape}, expected ({trace.batch_size},)"
        )
    n_classes = trace.probs.shape[1]
    if gold.size and (gold.min() < 0 or gold.max() >= n_classes):
        raise InputError(f"gold label index out of range for {n_classes} classes")
    return gold


def loss(trace: ForwardTrace, gold: np.ndarray) -> float:
    """Mean negative log probability of the gold classes over the batch."""
    gold = _check_gold(trace, gold)
    p = trace.probs[np.arange(trace.batch_size), gold]
    return float(-np.log(np.maximum(p, PROB_FLOOR)).mean())


def backward(
    params: ModelParams,
    trace: ForwardTrace,
    gold: np.ndarray,
    head: str,
    scale: float = 1.0,
) -> None:
    """Accumulate gradients of `scale` * summed cross-entropy into params.

    The trace must come from `forward` on the same params and head;
    embedding rows not in the batch receive no gradient.
    """
    if trace.head != head:
        raise NumericError(f"trace was computed for head {trace.head!r}, not {head!r}")
    if not params.has_task(head):
        raise InputError(f"model has no head {head!r}")
    w_out = params.out_w[head]
    w_hid = params.hidden_w[head]
    if trace.hidden_act.shape[1] != w_out.values.shape[0] or trace.concat_embed.shape[1] != w_hid.values.shape[0]:
        raise NumericError("trace does not match parameter shapes; was it produced by these params?")
    gold = _check_gold(trace, gold)

    d_logits = trace.probs.copy()
    d_logits[np.arange(trace.batch_size), gold] -= 1.0
    if scale != 1.0:
        d_logits *= scale

    w_out.grad += trace.hidden_act.T @ d_logits
    params.out_b[head].grad += d_logits.sum(axis=0)

    d_hidden_act = d_logits @ w_out.values.T
    d_hidden_pre = d_hidden_act * trace.hidden_act * (1.0 - trace.hidden_act)

    w_hid.grad += trace.concat_embed.T @ d_hidden_pre
    params.hidden_b[head].grad += d_hidden_pre.sum(axis=0)

    d_concat = d_hidden_pre @ w_hid.values.T
    dim = params.dim
    np.add.at(params.embedding.grad, trace.left, d_concat[:, :dim])
    np.add.at(params.embedding.grad, trace.right, d_concat[:, dim:])


def clear_grads(params: ModelParams) -> None:
    for tensor in params.tensors():
        tensor.clear_grad()

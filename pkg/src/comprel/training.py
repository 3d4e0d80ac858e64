"""Single-task training: epoch shuffling, mini-batches, Adam, and
early stopping on dev accuracy with best-checkpoint restore."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from comprel.corpus import LabelSpace, Split
from comprel.embeddings import ResolvedVocab
from comprel.errors import InputError
from comprel.nn import AdamConfig, adam_step, backward, forward, loss
from comprel.nn.network import clear_grads
from comprel.nn.params import ModelParams
from comprel.rng import stream

STOP_EARLY = "early-stop"
STOP_MAX_EPOCHS = "max-epochs"


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 5
    max_epochs: int = 50
    patience: int = 5
    adam: AdamConfig = field(default_factory=AdamConfig)
    seed: int = 0

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise InputError(f"batch_size must be positive, got {self.batch_size}")
        if self.max_epochs < 1:
            raise InputError(f"max_epochs must be positive, got {self.max_epochs}")
        if self.patience < 1:
            raise InputError(f"patience must be positive, got {self.patience}")
        if self.patience > self.max_epochs:
            raise InputError(
                f"patience ({self.patience}) must not exceed max_epochs ({self.max_epochs})"
            )


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    dev_accuracy: float
    aux_dev_accuracy: float | None = None


@dataclass
class TrainLog:
    epochs: list[EpochStats]
    best_epoch: int
    stopped_epoch: int
    stop_reason: str

    def best_dev_accuracy(self) -> float:
        return self.epochs[self.best_epoch - 1].dev_accuracy

    def to_json_dict(self) -> dict:
        return {
            "best_epoch": self.best_epoch,
            "stopped_epoch": self.stopped_epoch,
            "stop_reason": self.stop_reason,
            "epochs": [
                {
                    "epoch": e.epoch,
                    "train_loss": e.train_loss,
                    "dev_accuracy": e.dev_accuracy,
                    **(
                        {"aux_dev_accuracy": e.aux_dev_accuracy}
                        if e.aux_dev_accuracy is not None
                        else {}
                    ),
                }
                for e in self.epochs
            ],
        }


class EarlyStopper:
    """Patience counter over a metric where only strict improvement resets."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = -math.inf
        self.best_epoch = 0
        self.failures = 0

    def update(self, epoch: int, value: float) -> bool:
        if value > self.best:
            self.best = value
            self.best_epoch = epoch
            self.failures = 0
            return True
        self.failures += 1
        return False

    @property
    def should_stop(self) -> bool:
        return self.failures >= self.patience


def batch_slices(order: np.ndarray, batch_size: int):
    for start in range(0, len(order), batch_size):
        yield order[start : start + batch_size]


def _dev_accuracy(params: ModelParams, pairs: np.ndarray, gold: np.ndarray, head: str) -> float:
    trace = forward(params, pairs, head)
    return float(np.mean(trace.probs.argmax(axis=1) == gold))


def _encode(split: Split, space: LabelSpace, vocab: ResolvedVocab) -> tuple[np.ndarray, np.ndarray]:
    return vocab.encode_pairs(split), space.encode(split)


def train_stl(
    params: ModelParams,
    train: Split,
    dev: Split,
    space: LabelSpace,
    cfg: TrainConfig,
    vocab: ResolvedVocab,
    on_epoch_end=None,
) -> tuple[ModelParams, TrainLog]:
    """Train one head to convergence; returns the best-dev-epoch weights.

    Bit-deterministic: the epoch-e shuffle comes from the (seed, "shuffle",
    e) stream, so two runs with equal inputs agree exactly. The optional
    on_epoch_end(epoch, params) callback observes the post-update state of
    each epoch, before any best-checkpoint restore.
    """
    if not train.records:
        raise InputError("training split is empty")
    if not dev.records:
        raise InputError("dev split is empty")
    head = space.taxonomy
    train_pairs, train_gold = _encode(train, space, vocab)
    if train_gold.min() < 0:
        raise InputError("training split contains labels outside the label space")
    dev_pairs, dev_gold = _encode(dev, space, vocab)

    n = len(train.records)
    stopper = EarlyStopper(cfg.patience)
    best_snapshot = None
    epochs: list[EpochStats] = []
    stop_reason = STOP_MAX_EPOCHS
    stopped_epoch = cfg.max_epochs

    for epoch in range(1, cfg.max_epochs + 1):
        order = stream(cfg.seed, "shuffle", epoch).permutation(n)
        loss_sum = 0.0
        for chunk in batch_slices(order, cfg.batch_size):
            clear_grads(params)
            trace = forward(params, train_pairs[chunk], head)
            loss_sum += loss(trace, train_gold[chunk]) * len(chunk)
            backward(params, trace, train_gold[chunk], head)
            adam_step(params, cfg.adam)
        dev_acc = _dev_accuracy(params, dev_pairs, dev_gold, head)
        epochs.append(EpochStats(epoch=epoch, train_loss=loss_sum / n, dev_accuracy=dev_acc))
        if on_epoch_end is not None:
            on_epoch_end(epoch, params)
        if stopper.update(epoch, dev_acc):
            best_snapshot = params.snapshot()
        if stopper.should_stop:
            stop_reason = STOP_EARLY
            stopped_epoch = epoch
            break

    params.restore(best_snapshot)
    log = TrainLog(
        epochs=epochs,
        best_epoch=stopper.best_epoch,
        stopped_epoch=stopped_epoch,
        stop_reason=stop_reason,
    )
    return params, log


def evaluate_accuracy(
    params: ModelParams, split: Split, space: LabelSpace, vocab: ResolvedVocab
) -> float:
    """Fraction of records whose argmax class equals gold.

    Ties go to the lowest class index; gold labels outside the label
    space can never match and count as errors.
    """
    if not split.records:
        raise InputError(f"cannot evaluate on empty split {split.name!r}")
    pairs, gold = _encode(split, space, vocab)
    return _dev_accuracy(params, pairs, gold, space.taxonomy)


def predict(
    params: ModelParams, split: Split, space: LabelSpace, vocab: ResolvedVocab
) -> tuple[list[str], np.ndarray]:
    """Predicted label per record (split order) plus the prob matrix."""
    pairs = vocab.encode_pairs(split)
    trace = forward(params, pairs, space.taxonomy)
    labels = [space.label_of(i) for i in trace.probs.argmax(axis=1)]
    return labels, trace.probs

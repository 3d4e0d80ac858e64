"""Cross-taxonomy transfer and joint two-task training.

Transfer copies trained weight values of designated layers (embedding,
hidden, or both) from a donor-task model into a freshly initialized
recipient model; output heads and optimizer state never cross. Joint
training shares the embedding (and optionally the hidden layer, as one
aliased tensor) between two heads fed identical record batches, summing
the two cross-entropies; early stopping watches the main task alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from comprel.corpus import LabelSpace, Split
from comprel.embeddings import ResolvedVocab
from comprel.errors import InputError
from comprel.nn import adam_step, backward, build_dual, build_single, forward, loss
from comprel.nn.network import clear_grads
from comprel.nn.params import ModelParams
from comprel.rng import stream
from comprel import training
from comprel.training import (
    STOP_EARLY,
    STOP_MAX_EPOCHS,
    EarlyStopper,
    EpochStats,
    TrainConfig,
    TrainLog,
    batch_slices,
    train_stl,
)

TL_LAYERS = ("E", "H", "EH", "")
DIRECTIONS = ("A2B", "B2A")
SHARINGS = ("E", "F")


@dataclass(frozen=True)
class TransferMode:
    """Which layers move donor -> recipient; "" is the no-transfer control."""

    layers: str
    direction: str

    def __post_init__(self) -> None:
        if self.layers not in TL_LAYERS:
            raise InputError(f"layers must be one of {TL_LAYERS}, got {self.layers!r}")
        if self.direction not in DIRECTIONS:
            raise InputError(f"direction must be one of {DIRECTIONS}, got {self.direction!r}")

    @property
    def donor_task(self) -> str:
        return self.direction[0]

    @property
    def recipient_task(self) -> str:
        return self.direction[2]


@dataclass(frozen=True)
class MtlMode:
    """sharing "E": shared embedding only; "F": embedding and hidden."""

    sharing: str
    main_task: str

    def __post_init__(self) -> None:
        if self.sharing not in SHARINGS:
            raise InputError(f"sharing must be one of {SHARINGS}, got {self.sharing!r}")
        if self.main_task not in ("A", "B"):
            raise InputError(f"main_task must be A or B, got {self.main_task!r}")

    @property
    def aux_task(self) -> str:
        return "B" if self.main_task == "A" else "A"


def build_tl(
    donor: ModelParams,
    mode: TransferMode,
    recipient_space: LabelSpace,
    seed: int,
    vocab_matrix: np.ndarray,
) -> ModelParams:
    """Fresh recipient model with the designated donor layers copied in.

    Copies are by value, bit-exact; the fresh tensors carry zero Adam
    moments and step counts, so the recipient optimizes from scratch.
    """
    donor_task = mode.donor_task
    if recipient_space.taxonomy != mode.recipient_task:
        raise InputError(
            f"recipient space is for taxonomy {recipient_space.taxonomy}, mode expects {mode.recipient_task}"
        )
    recipient = build_single(vocab_matrix, len(recipient_space), recipient_space.taxonomy, seed)
    if donor.embedding.values.shape != recipient.embedding.values.shape:
        raise InputError(
            f"donor embedding shape {donor.embedding.values.shape} does not match "
            f"recipient {recipient.embedding.values.shape}"
        )
    if "E" in mode.layers:
        recipient.embedding.values[:] = donor.embedding.values
    if "H" in mode.layers:
        recipient.hidden_w[recipient_space.taxonomy].values[:] = donor.hidden_w[donor_task].values
        recipient.hidden_b[recipient_space.taxonomy].values[:] = donor.hidden_b[donor_task].values
    return recipient


def train_tl(
    train: Split,
    dev: Split,
    vocab: ResolvedVocab,
    spaces: dict[str, LabelSpace],
    mode: TransferMode,
    cfg: TrainConfig,
    on_epoch_end=None,
) -> tuple[TrainLog, ModelParams, TrainLog]:
    """Donor STL run, weight hand-off, recipient STL run."""
    donor_space = spaces[mode.donor_task]
    recipient_space = spaces[mode.recipient_task]
    donor = build_single(vocab.matrix, len(donor_space), donor_space.taxonomy, cfg.seed)
    donor, donor_log = train_stl(donor, train, dev, donor_space, cfg, vocab)
    recipient = build_tl(donor, mode, recipient_space, cfg.seed, vocab.matrix)
    recipient, recipient_log = train_stl(
        recipient, train, dev, recipient_space, cfg, vocab, on_epoch_end=on_epoch_end
    )
    return recipient_log, recipient, donor_log


def train_mtl(
    train: Split,
    dev: Split,
    vocab: ResolvedVocab,
    spaces: dict[str, LabelSpace],
    mode: MtlMode,
    cfg: TrainConfig,
    aux_weight: float = 1.0,
    on_epoch_end=None,
) -> tuple[ModelParams, TrainLog]:
    """Joint training of both heads over identical record batches.

    Per batch: one forward per head, combined loss main + aux_weight * aux,
    gradients accumulated into shared and task-specific tensors, one Adam
    step. aux_weight is a diagnostic switch; at 0 the loop performs exactly
    the main task's STL updates (aux tensors receive zero-gradient steps).
    """
    if not train.records:
        raise InputError("training split is empty")
    if not dev.records:
        raise InputError("dev split is empty")
    if aux_weight < 0.0:
        raise InputError(f"aux_weight must be non-negative, got {aux_weight}")
    main, aux = mode.main_task, mode.aux_task
    params = build_dual(
        vocab.matrix,
        {task: len(spaces[task]) for task in (main, aux)},
        sharing=mode.sharing,
        main_task=main,
        seed=cfg.seed,
    )
    pairs = vocab.encode_pairs(train)
    gold = {task: spaces[task].encode(train) for task in (main, aux)}
    for task in (main, aux):
        if gold[task].min() < 0:
            raise InputError(f"training split contains labels outside the {task} label space")
    dev_pairs = vocab.encode_pairs(dev)
    dev_gold = {task: spaces[task].encode(dev) for task in (main, aux)}

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
            trace_main = forward(params, pairs[chunk], main)
            loss_sum += loss(trace_main, gold[main][chunk]) * len(chunk)
            backward(params, trace_main, gold[main][chunk], main)
            if aux_weight != 0.0:
                trace_aux = forward(params, pairs[chunk], aux)
                loss_sum += aux_weight * loss(trace_aux, gold[aux][chunk]) * len(chunk)
                backward(params, trace_aux, gold[aux][chunk], aux, scale=aux_weight)
            adam_step(params, cfg.adam)
        main_acc = training._dev_accuracy(params, dev_pairs, dev_gold[main], main)
        aux_acc = training._dev_accuracy(params, dev_pairs, dev_gold[aux], aux)
        epochs.append(
            EpochStats(
                epoch=epoch,
                train_loss=loss_sum / n,
                dev_accuracy=main_acc,
                aux_dev_accuracy=aux_acc,
            )
        )
        if on_epoch_end is not None:
            on_epoch_end(epoch, params)
        if stopper.update(epoch, main_acc):
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

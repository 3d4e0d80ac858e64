"""Experiment orchestration: configs, hashed result bundles, checkpoints.

A run is fully described by an ExperimentConfig. Its semantic fields (data,
model kind, training hyperparameters, seed) hash to a 12-hex bundle id; the
bundle directory under out_dir is named by that id, so identical configs
land in the same place and reruns must reproduce the same bytes.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from comprel.corpus import (
    TAXONOMIES,
    LabelSpace,
    Split,
    build_label_space,
    load_split,
)
from comprel.embeddings import ResolvedVocab, build_vocab, infer_dim, load_embeddings
from comprel.errors import InputError
from comprel.metrics import Prediction, PredictionSet, score, write_predictions
from comprel.nn import ModelParams, ParamTensor, build_single
from comprel.training import TrainConfig, TrainLog, predict, train_stl
from comprel.transfer import DIRECTIONS, MtlMode, TransferMode, train_mtl, train_tl

MODEL_KINDS = ("stl", "tl-e", "tl-h", "tl-eh", "mtl-e", "mtl-f")
SPLIT_NAMES = ("train", "dev", "test")

CONFIG_FILE = "config.json"
TRAIN_LOG_FILE = "train_log.json"
DONOR_LOG_FILE = "donor_log.json"
CHECKPOINT_FILE = "checkpoint.npz"
SCORES_FILE = "scores.json"

# Fields that pick the output location or gate extra reporting but do not
# influence the trained model; they stay out of the bundle id.
UNHASHED_FIELDS = ("out_dir", "include_test")


@dataclass(frozen=True)
class TrainParams:
    """TrainConfig minus the seed, which lives on the experiment."""

    batch_size: int = 5
    max_epochs: int = 50
    patience: int = 5
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    def to_dict(self) -> dict:
        return {
            "batch_size": self.batch_size,
            "max_epochs": self.max_epochs,
            "patience": self.patience,
            "eta": self.eta,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class ExperimentConfig:
    data_dir: str
    embeddings: str
    out_dir: str = "runs"
    task: str = "A"
    model: str = "stl"
    direction: str = "A2B"
    main_task: str = "A"
    aux_weight: float = 1.0
    include_test: bool = False
    seed: int = 0
    train: TrainParams = field(default_factory=TrainParams)

    def __post_init__(self) -> None:
        if self.model not in MODEL_KINDS:
            raise InputError(f"model must be one of {MODEL_KINDS}, got {self.model!r}")
        if self.task not in TAXONOMIES:
            raise InputError(f"task must be one of {TAXONOMIES}, got {self.task!r}")
        if self.main_task not in TAXONOMIES:
            raise InputError(
                f"main_task must be one of {TAXONOMIES}, got {self.main_task!r}"
            )
        if self.direction not in DIRECTIONS:
            raise InputError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )
        if not 0 <= self.seed < 2**64:
            raise InputError(f"seed must fit in 64 unsigned bits, got {self.seed}")
        if self.aux_weight < 0.0:
            raise InputError(f"aux_weight must be non-negative, got {self.aux_weight}")

    def to_dict(self) -> dict:
        return {
            "data_dir": self.data_dir,
            "embeddings": self.embeddings,
            "out_dir": self.out_dir,
            "task": self.task,
            "model": self.model,
            "direction": self.direction,
            "main_task": self.main_task,
            "aux_weight": self.aux_weight,
            "include_test": self.include_test,
            "seed": self.seed,
            "train": self.train.to_dict(),
        }

    def train_config(self) -> TrainConfig:
        from comprel.nn import AdamConfig

        t = self.train
        return TrainConfig(
            batch_size=t.batch_size,
            max_epochs=t.max_epochs,
            patience=t.patience,
            adam=AdamConfig(
                eta=t.eta, beta1=t.beta1, beta2=t.beta2, epsilon=t.epsilon
            ),
            seed=self.seed,
        )

    def tasks(self) -> list[str]:
        """Taxonomies this run trains a head for, main first."""
        if self.model.startswith("mtl"):
            aux = "B" if self.main_task == "A" else "A"
            return [self.main_task, aux]
        if self.model.startswith("tl"):
            return [self.direction[-1]]
        return [self.task]


def config_from_dict(raw: dict) -> ExperimentConfig:
    raw = dict(raw)
    known = {
        "data_dir", "embeddings", "out_dir", "task", "model", "direction",
        "main_task", "aux_weight", "include_test", "seed", "train",
    }
    unknown = set(raw) - known
    if unknown:
        raise InputError(f"unknown config keys: {sorted(unknown)}")
    for key in ("data_dir", "embeddings"):
        if key not in raw:
            raise InputError(f"config is missing required key {key!r}")
    train_raw = raw.pop("train", {})
    if not isinstance(train_raw, dict):
        raise InputError("config key 'train' must be an object")
    train_known = {f for f in TrainParams.__dataclass_fields__}
    train_unknown = set(train_raw) - train_known
    if train_unknown:
        raise InputError(f"unknown train keys: {sorted(train_unknown)}")
    try:
        return ExperimentConfig(train=TrainParams(**train_raw), **raw)
    except TypeError as exc:
        raise InputError(f"bad config: {exc}") from exc


def load_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    if not path.exists():
        raise InputError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InputError(f"{path}: config must be a JSON object")
    return config_from_dict(raw)


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: ExperimentConfig) -> str:
    payload = cfg.to_dict()
    for key in UNHASHED_FIELDS:
        payload.pop(key)
    digest = hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()
    return digest[:12]


def bundle_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.out_dir) / config_hash(cfg)


def save_checkpoint(path: str | Path, params: ModelParams) -> None:
    """All tensor values plus enough structure to rebuild aliasing."""
    arrays = {f"tensor/{t.name}": t.values for t in params.tensors()}
    meta = {
        "version": 1,
        "tasks": params.tasks(),
        "hidden": {task: params.hidden_w[task].name for task in params.tasks()},
    }
    arrays["meta"] = np.array(json.dumps(meta, sort_keys=True))
    with open(path, "wb") as handle:
        np.savez(handle, **arrays)


def load_checkpoint(path: str | Path) -> ModelParams:
    path = Path(path)
    if not path.exists():
        raise InputError(f"checkpoint not found: {path}")
    with np.load(path) as archive:
        if "meta" not in archive:
            raise InputError(f"{path}: not a model checkpoint (no meta entry)")
        meta = json.loads(str(archive["meta"]))
        arrays = {
            key.removeprefix("tensor/"): archive[key]
            for key in archive.files
            if key.startswith("tensor/")
        }
    if meta.get("version") != 1:
        raise InputError(f"{path}: unsupported checkpoint version {meta.get('version')}")
    cache: dict[str, ParamTensor] = {}

    def tensor(name: str) -> ParamTensor:
        if name not in cache:
            if name not in arrays:
                raise InputError(f"{path}: checkpoint is missing tensor {name!r}")
            cache[name] = ParamTensor(name, arrays[name])
        return cache[name]

    hidden_names = meta["hidden"]
    return ModelParams(
        embedding=tensor("embedding"),
        hidden_w={task: tensor(hidden_names[task]) for task in meta["tasks"]},
        hidden_b={
            task: tensor(hidden_names[task].replace("hidden_w", "hidden_b"))
            for task in meta["tasks"]
        },
        out_w={task: tensor(f"out_w.{task}") for task in meta["tasks"]},
        out_b={task: tensor(f"out_b.{task}") for task in meta["tasks"]},
    )


@dataclass
class LoadedData:
    splits: dict[str, Split]
    spaces: dict[str, LabelSpace]
    vocab: ResolvedVocab
    embedding_report: dict


def load_data(data_dir: str | Path, embeddings_path: str | Path) -> LoadedData:
    """Load all three splits, both label spaces, and the resolved vocab.

    The vocabulary always covers every split so that later test scoring
    cannot disturb training; label spaces come from train alone.
    """
    data_dir = Path(data_dir)
    splits = {
        name: load_split(data_dir / f"{name}.tsv", name) for name in SPLIT_NAMES
    }
    table, report = load_embeddings(embeddings_path, infer_dim(embeddings_path))
    vocab = build_vocab(splits, table)
    spaces = {t: build_label_space(splits["train"], t) for t in TAXONOMIES}
    return LoadedData(
        splits=splits,
        spaces=spaces,
        vocab=vocab,
        embedding_report=report.to_json_dict(),
    )


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    bundle: Path
    bundle_id: str
    train_log: TrainLog
    donor_log: TrainLog | None
    params: ModelParams
    scores: dict

    def summary(self) -> dict:
        out = {
            "bundle": str(self.bundle),
            "bundle_id": self.bundle_id,
            "model": self.config.model,
            "tasks": self.config.tasks(),
            "best_epoch": self.train_log.best_epoch,
            "stopped_epoch": self.train_log.stopped_epoch,
            "stop_reason": self.train_log.stop_reason,
            "scores": self.scores,
        }
        return out


def _predictions(
    params: ModelParams, split: Split, space: LabelSpace, vocab: ResolvedVocab
) -> PredictionSet:
    labels, probs = predict(params, split, space, vocab)
    top = probs.max(axis=1)
    rows = [
        Prediction(
            left=r.left,
            right=r.right,
            gold=r.label(space.taxonomy),
            predicted=labels[i],
            prob=float(top[i]),
        )
        for i, r in enumerate(split.records)
    ]
    return PredictionSet(taxonomy=space.taxonomy, rows=rows)


def _train_model(
    cfg: ExperimentConfig, data: LoadedData
) -> tuple[ModelParams, TrainLog, TrainLog | None]:
    tcfg = cfg.train_config()
    train, dev = data.splits["train"], data.splits["dev"]
    if cfg.model == "stl":
        space = data.spaces[cfg.task]
        params = build_single(data.vocab.matrix, len(space), cfg.task, cfg.seed)
        params, log = train_stl(params, train, dev, space, tcfg, data.vocab)
        return params, log, None
    if cfg.model.startswith("tl-"):
        mode = TransferMode(layers=cfg.model[3:].upper(), direction=cfg.direction)
        log, params, donor_log = train_tl(
            train, dev, data.vocab, data.spaces, mode, tcfg
        )
        return params, log, donor_log
    mode = MtlMode(sharing=cfg.model[4:].upper(), main_task=cfg.main_task)
    params, log = train_mtl(
        train, dev, data.vocab, data.spaces, mode, tcfg, aux_weight=cfg.aux_weight
    )
    return params, log, None


def run_experiment(cfg: ExperimentConfig, data: LoadedData | None = None) -> ExperimentResult:
    """Train per config, then write the reproducible bundle."""
    if data is None:
        data = load_data(cfg.data_dir, cfg.embeddings)
    params, log, donor_log = _train_model(cfg, data)

    bundle = bundle_dir(cfg)
    bundle.mkdir(parents=True, exist_ok=True)
    bundle_id = config_hash(cfg)

    eval_splits = ["dev", "test"] if cfg.include_test else ["dev"]
    scores: dict = {task: {} for task in cfg.tasks()}
    for task in cfg.tasks():
        space = data.spaces[task]
        for split_name in eval_splits:
            split = data.splits[split_name]
            pset = _predictions(params, split, space, data.vocab)
            write_predictions(
                bundle / f"predictions.{task}.{split_name}.tsv", pset
            )
            gold = [r.label(task) for r in split.records]
            label_scores, _ = score([p.predicted for p in pset.rows], gold, space)
            scores[task][split_name] = label_scores.to_json_dict()

    _write_json(bundle / CONFIG_FILE, cfg.to_dict())
    _write_json(bundle / TRAIN_LOG_FILE, log.to_json_dict())
    if donor_log is not None:
        _write_json(bundle / DONOR_LOG_FILE, donor_log.to_json_dict())
    save_checkpoint(bundle / CHECKPOINT_FILE, params)
    _write_json(
        bundle / SCORES_FILE,
        {
            "bundle_id": bundle_id,
            "model": cfg.model,
            "tasks": cfg.tasks(),
            "scores": scores,
            "embedding_report": data.embedding_report,
        },
    )
    return ExperimentResult(
        config=cfg,
        bundle=bundle,
        bundle_id=bundle_id,
        train_log=log,
        donor_log=donor_log,
        params=params,
        scores=scores,
    )


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_bundle_config(bundle: str | Path) -> ExperimentConfig:
    bundle = Path(bundle)
    if not (bundle / CONFIG_FILE).exists():
        raise InputError(f"not a result bundle (no {CONFIG_FILE}): {bundle}")
    return load_config(bundle / CONFIG_FILE)


def rerun_from_bundle(bundle: str | Path) -> ExperimentResult:
    """Replay a bundle from its stored config; bytes must not change."""
    return run_experiment(read_bundle_config(bundle))

"""Scoring: accuracy, per-label precision/recall/F1, macro-average F1
over an explicit label subset, and prediction-file handling.

The macro subset matters: labels a model never predicts would contribute
zero F1, so cross-model comparisons average only over the union of labels
actually predicted by at least one of the compared models (see
predicted_label_union).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from comprel.corpus import LabelSpace
from comprel.errors import InputError


@dataclass(frozen=True)
class Prediction:
    left: str
    right: str
    gold: str
    predicted: str
    prob: float


@dataclass
class PredictionSet:
    taxonomy: str
    rows: list[Prediction]

    def __len__(self) -> int:
        return len(self.rows)

    def predicted_labels(self) -> set[str]:
        return {r.predicted for r in self.rows}

    def gold_labels(self) -> set[str]:
        return {r.gold for r in self.rows}


def write_predictions(path: str | Path, pset: PredictionSet) -> None:
    lines = [
        f"{r.left}\t{r.right}\t{r.gold}\t{r.predicted}\t{r.prob:.17g}" for r in pset.rows
    ]
    Path(path).write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def read_predictions(path: str | Path, taxonomy: str) -> PredictionSet:
    path = Path(path)
    if not path.exists():
        raise InputError(f"prediction file not found: {path}")
    rows = []
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise InputError(f"{path}:{line_no}: expected 5 columns, got {len(cols)}")
            try:
                prob = float(cols[4])
            except ValueError:
                raise InputError(f"{path}:{line_no}: bad probability {cols[4]!r}") from None
            rows.append(Prediction(cols[0], cols[1], cols[2], cols[3], prob))
    return PredictionSet(taxonomy=taxonomy, rows=rows)


@dataclass(frozen=True)
class LabelScore:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float


def _label_score(tp: int, fp: int, fn: int) -> LabelScore:
    precision = tp / (tp + fp) if tp + fp > 0 else 0.0
    recall = tp / (tp + fn) if tp + fn > 0 else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return LabelScore(tp=tp, fp=fp, fn=fn, precision=precision, recall=recall, f1=f1)


@dataclass
class ConfusionTable:
    taxonomy: str
    counts: dict[tuple[str, str], int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    def gold_labels(self) -> set[str]:
        return {g for g, _ in self.counts}

    def predicted_labels(self) -> set[str]:
        return {p for _, p in self.counts}


@dataclass
class LabelScores:
    taxonomy: str
    per_label: dict[str, LabelScore]
    accuracy: float
    macro_f1: float
    macro_subset: list[str]

    def to_json_dict(self) -> dict:
        return {
            "taxonomy": self.taxonomy,
            "accuracy": self.accuracy,
            "macro_f1": self.macro_f1,
            "macro_subset": self.macro_subset,
            "per_label": {
                name: {
                    "tp": s.tp,
                    "fp": s.fp,
                    "fn": s.fn,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                }
                for name, s in self.per_label.items()
            },
        }


def score(
    predicted: Sequence[str], gold: Sequence[str], space: LabelSpace
) -> tuple[LabelScores, ConfusionTable]:
    """Exact integer confusion counts plus derived per-label scores.

    Gold labels outside the space still occupy confusion rows and the
    accuracy denominator; they carry no per-label score because the model
    can never emit them. The stored macro_f1 averages over the labels
    observed in this evaluation (gold or predicted, in-space); use
    macro_f1() for any other subset.
    """
    if len(predicted) != len(gold):
        raise InputError(
            f"predicted and gold lengths differ: {len(predicted)} vs {len(gold)}"
        )
    if not predicted:
        raise InputError("cannot score an empty prediction list")
    for label in predicted:
        if label not in space:
            raise InputError(
                f"predicted label {label!r} is not in the {space.taxonomy} label space"
            )
    table = ConfusionTable(taxonomy=space.taxonomy)
    for g, p in zip(gold, predicted):
        key = (g, p)
        table.counts[key] = table.counts.get(key, 0) + 1

    per_label = {}
    correct = 0
    for label in space.labels:
        tp = table.counts.get((label, label), 0)
        fp = sum(n for (g, p), n in table.counts.items() if p == label and g != label)
        fn = sum(n for (g, p), n in table.counts.items() if g == label and p != label)
        per_label[label] = _label_score(tp, fp, fn)
        correct += tp
    accuracy = correct / len(gold)
    observed = [
        label
        for label in space.labels
        if per_label[label].tp + per_label[label].fp + per_label[label].fn > 0
    ]
    scores = LabelScores(
        taxonomy=space.taxonomy,
        per_label=per_label,
        accuracy=accuracy,
        macro_f1=0.0,
        macro_subset=observed,
    )
    if observed:
        scores.macro_f1 = macro_f1(scores, observed)
    return scores, table


def macro_f1(scores: LabelScores, label_subset: Iterable[str]) -> float:
    """Unweighted mean F1 over the given labels."""
    subset = list(label_subset)
    if not subset:
        raise InputError("macro-F1 requires a non-empty label subset")
    missing = [label for label in subset if label not in scores.per_label]
    if missing:
        raise InputError(f"labels not in the scored space: {missing}")
    return sum(scores.per_label[label].f1 for label in subset) / len(subset)


def predicted_label_union(sets: Sequence[PredictionSet]) -> list[str]:
    """Sorted union of labels predicted by at least one model."""
    if not sets:
        raise InputError("need at least one prediction set")
    taxonomy = sets[0].taxonomy
    for pset in sets[1:]:
        if pset.taxonomy != taxonomy:
            raise InputError(
                f"mixed taxonomies in prediction sets: {taxonomy} vs {pset.taxonomy}"
            )
    union: set[str] = set()
    for pset in sets:
        union |= pset.predicted_labels()
    return sorted(union)

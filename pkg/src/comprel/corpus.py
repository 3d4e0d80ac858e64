"""Dual-annotated two-word compound corpus: loading, validation, stats.

Corpus files are 4-column TSV without header: left constituent, right
constituent, taxonomy-A label, taxonomy-B label. Every record carries
both labels; a split never repeats a (left, right) pair.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from comprel.errors import InputError

TAXONOMIES = ("A", "B")

# reserved index for gold labels absent from the training label space
OUT_OF_SPACE = -1


@dataclass(frozen=True)
class CompoundRecord:
    left: str
    right: str
    label_a: str
    label_b: str

    def label(self, taxonomy: str) -> str:
        if taxonomy == "A":
            return self.label_a
        if taxonomy == "B":
            return self.label_b
        raise InputError(f"unknown taxonomy {taxonomy!r}, expected one of {TAXONOMIES}")


@dataclass
class Split:
    name: str
    records: list[CompoundRecord]

    def __len__(self) -> int:
        return len(self.records)

    def pairs(self) -> list[tuple[str, str]]:
        return [(r.left, r.right) for r in self.records]

    def constituents(self) -> set[str]:
        out = set()
        for r in self.records:
            out.add(r.left)
            out.add(r.right)
        return out


def _check_field(value: str, what: str, path: str, line_no: int) -> str:
    if not value:
        raise InputError(f"{path}:{line_no}: empty {what}")
    if any(c.isspace() for c in value):
        raise InputError(f"{path}:{line_no}: {what} contains whitespace: {value!r}")
    return value


def load_split(path: str | Path, name: str) -> Split:
    """Read and validate one split file. Any malformed line is fatal."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"split file not found: {path}")
    records: list[CompoundRecord] = []
    seen: dict[tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 4:
                raise InputError(f"{path}:{line_no}: expected 4 tab-separated columns, got {len(cols)}")
            left = _check_field(cols[0], "left constituent", str(path), line_no)
            right = _check_field(cols[1], "right constituent", str(path), line_no)
            label_a = _check_field(cols[2], "taxonomy-A label", str(path), line_no)
            label_b = _check_field(cols[3], "taxonomy-B label", str(path), line_no)
            key = (left, right)
            if key in seen:
                raise InputError(
                    f"{path}:{line_no}: duplicate compound {left!r} {right!r}, first seen on line {seen[key]}"
                )
            seen[key] = line_no
            records.append(CompoundRecord(left, right, label_a, label_b))
    return Split(name=name, records=records)


def serialize_split(split: Split) -> str:
    lines = [f"{r.left}\t{r.right}\t{r.label_a}\t{r.label_b}" for r in split.records]
    return "".join(line + "\n" for line in lines)


def write_split(path: str | Path, split: Split) -> None:
    Path(path).write_text(serialize_split(split), encoding="utf-8")


@dataclass(frozen=True)
class SplitStats:
    compounds: int
    vocab_size: int
    right_types: int
    left_types: int


def vocab_stats(splits: dict[str, Split]) -> dict[str, SplitStats]:
    """Distinct-type counts per split: compounds, vocabulary, right, left."""
    out = {}
    for name, split in splits.items():
        lefts = {r.left for r in split.records}
        rights = {r.right for r in split.records}
        out[name] = SplitStats(
            compounds=len(split.records),
            vocab_size=len(lefts | rights),
            right_types=len(rights),
            left_types=len(lefts),
        )
    return out


def label_distribution(split: Split, taxonomy: str) -> dict[str, tuple[int, float]]:
    """Label -> (count, fraction), in descending count order (ties: name)."""
    counts = collections.Counter(r.label(taxonomy) for r in split.records)
    total = sum(counts.values())
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {label: (count, count / total) for label, count in ordered}


@dataclass
class LabelSpace:
    """Softmax classes for one taxonomy, fixed by the training split.

    Label order is descending train frequency, ties broken
    lexicographically, so class indices are stable across runs. Labels
    never seen in training map to OUT_OF_SPACE: they are gold-only,
    never predictable.
    """

    taxonomy: str
    labels: list[str]
    index_of: dict[str, int] = field(init=False)

    def __post_init__(self) -> None:
        if len(set(self.labels)) != len(self.labels):
            raise InputError(f"duplicate labels in taxonomy {self.taxonomy} space")
        self.index_of = {label: i for i, label in enumerate(self.labels)}

    def __len__(self) -> int:
        return len(self.labels)

    def __contains__(self, label: str) -> bool:
        return label in self.index_of

    def index(self, label: str) -> int:
        return self.index_of.get(label, OUT_OF_SPACE)

    def label_of(self, index: int) -> str:
        return self.labels[index]

    def encode(self, split: Split) -> np.ndarray:
        """Gold label indices for a split; OUT_OF_SPACE where unknown."""
        return np.array([self.index(r.label(self.taxonomy)) for r in split.records], dtype=np.int64)


def build_label_space(train: Split, taxonomy: str) -> LabelSpace:
    if not train.records:
        raise InputError(f"cannot build a label space from an empty {train.name} split")
    ordered = label_distribution(train, taxonomy)
    return LabelSpace(taxonomy=taxonomy, labels=list(ordered))

"""Synthetic corpora with controllable class structure.

Two generators: a linearly separable set where the left constituent's
embedding cluster determines the label, and a skewed set where the rare
labels are lexically indistinguishable from the majority label, so a
trained classifier leaves them unpredicted while overall accuracy stays
high. Both emit real Split/EmbeddingTable objects and can be written to
disk in the standard file formats.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from comprel.corpus import CompoundRecord, Split, write_split
from comprel.embeddings import EmbeddingTable
from comprel.errors import InputError
from comprel.rng import stream


@dataclass
class SynthData:
    splits: dict[str, Split]
    table: EmbeddingTable
    dim: int

    def write(self, directory: str | Path) -> None:
        write_dataset(directory, self)


def _format_vector(vector: np.ndarray) -> str:
    return " ".join(f"{x:.17g}" for x in vector)


def write_dataset(directory: str | Path, data: SynthData) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name, split in data.splits.items():
        write_split(directory / f"{name}.tsv", split)
    lines = [f"{word} {_format_vector(vec)}" for word, vec in sorted(data.table.entries.items())]
    (directory / "embeddings.txt").write_text("".join(l + "\n" for l in lines), encoding="utf-8")


def _draw_pair(rng, lefts, rights, used: set) -> tuple[str, str]:
    for _ in range(10000):
        pair = (lefts[rng.integers(len(lefts))], rights[rng.integers(len(rights))])
        if pair not in used:
            used.add(pair)
            return pair
    raise InputError("pair pool exhausted; enlarge the synthetic vocabulary")


def _cluster_words(rng, prefix: str, count: int, center: np.ndarray, spread: float):
    words = {}
    for j in range(count):
        words[f"{prefix}{j}"] = center + rng.normal(scale=spread, size=center.shape)
    return words


def separable_dataset(
    seed: int = 0,
    n_train: int = 200,
    n_dev: int = 50,
    n_test: int = 50,
    n_classes: int = 2,
    dim: int = 8,
) -> SynthData:
    """Label = embedding cluster of the left constituent; margin is wide."""
    if n_classes > dim:
        raise InputError("need dim >= n_classes for separated cluster centers")
    rng = stream(seed, "synth-separable")
    entries: dict[str, np.ndarray] = {}
    left_pools: list[list[str]] = []
    per_class = 14
    for c in range(n_classes):
        center = np.zeros(dim)
        center[c] = 2.0
        words = _cluster_words(rng, f"l{c}w", per_class, center, spread=0.08)
        entries.update(words)
        left_pools.append(sorted(words))
    right_words = _cluster_words(rng, "rw", 30, np.zeros(dim), spread=0.15)
    entries.update(right_words)
    rights = sorted(right_words)

    used: set[tuple[str, str]] = set()

    def make_records(count: int) -> list[CompoundRecord]:
        records = []
        for i in range(count):
            c = i % n_classes
            left, right = _draw_pair(rng, left_pools[c], rights, used)
            records.append(CompoundRecord(left, right, f"A{c}", f"B{c}"))
        return records

    splits = {
        "train": Split("train", make_records(n_train)),
        "dev": Split("dev", make_records(n_dev)),
        "test": Split("test", make_records(n_test)),
    }
    unk = stream(seed, "synth-separable", "unk").uniform(-0.25, 0.25, size=dim)
    return SynthData(splits=splits, table=EmbeddingTable(dim=dim, entries=entries, unk_vector=unk), dim=dim)


def skewed_dataset(
    seed: int = 0,
    n_train: int = 400,
    n_dev: int = 100,
    n_test: int = 100,
    fractions: tuple[float, ...] = (0.70, 0.20, 0.05, 0.05),
    dim: int = 8,
) -> SynthData:
    """Skewed labels where the rare classes ride on the majority's vocabulary.

    Class 0 and class 1 live on separated left-word clusters. Every rarer
    class draws its left words from class 0's cluster, so nothing in the
    input distinguishes its records from class-0 records and a trained
    model starves it of predictions, while classes 0 and 1 stay easy.
    """
    if abs(sum(fractions) - 1.0) > 1e-9:
        raise InputError("fractions must sum to 1")
    if len(fractions) < 3:
        raise InputError("need at least 3 classes for a skew fixture")
    rng = stream(seed, "synth-skewed")
    entries: dict[str, np.ndarray] = {}
    center0 = np.zeros(dim)
    center0[0] = 2.0
    center1 = np.zeros(dim)
    center1[1] = 2.0
    pool0 = _cluster_words(rng, "l0w", 20, center0, spread=0.08)
    pool1 = _cluster_words(rng, "l1w", 20, center1, spread=0.08)
    entries.update(pool0)
    entries.update(pool1)
    right_words = _cluster_words(rng, "rw", 40, np.zeros(dim), spread=0.15)
    entries.update(right_words)
    rights = sorted(right_words)
    lefts_by_class = [sorted(pool0), sorted(pool1)] + [sorted(pool0)] * (len(fractions) - 2)

    used: set[tuple[str, str]] = set()

    def make_records(count: int) -> list[CompoundRecord]:
        quota = [int(round(count * f)) for f in fractions]
        quota[0] += count - sum(quota)
        records = []
        for c, q in enumerate(quota):
            for _ in range(q):
                left, right = _draw_pair(rng, lefts_by_class[c], rights, used)
                records.append(CompoundRecord(left, right, f"A{c}", f"B{c}"))
        order = stream(seed, "synth-skewed", "order", len(records)).permutation(len(records))
        return [records[i] for i in order]

    splits = {
        "train": Split("train", make_records(n_train)),
        "dev": Split("dev", make_records(n_dev)),
        "test": Split("test", make_records(n_test)),
    }
    unk = stream(seed, "synth-skewed", "unk").uniform(-0.25, 0.25, size=dim)
    return SynthData(splits=splits, table=EmbeddingTable(dim=dim, entries=entries, unk_vector=unk), dim=dim)

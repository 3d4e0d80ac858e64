"""Error-analysis computations over the dual-labeled corpus.

Everything here works on constituent types, not record tokens, matching
the type-based dataset: label-to-label correspondence, unseen-compound
partitions of a test split, generalization error on those partitions,
per-label constituent exclusivity, and pairwise lexical overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from comprel.corpus import Split, label_distribution
from comprel.errors import InputError
from comprel.metrics import PredictionSet

SIDES = ("left", "right")


def _constituent(record, side: str) -> str:
    if side == "left":
        return record.left
    if side == "right":
        return record.right
    raise InputError(f"side must be one of {SIDES}, got {side!r}")


@dataclass
class CorrespondenceMatrix:
    """cells[col][row] = P(row-taxonomy label | column-taxonomy label)."""

    row_taxonomy: str
    col_taxonomy: str
    column_counts: dict[str, int]
    cells: dict[str, dict[str, float]]

    def cell(self, row: str, col: str) -> float:
        return self.cells.get(col, {}).get(row, 0.0)

    def columns(self) -> list[str]:
        return list(self.cells)

    def rows(self) -> list[str]:
        seen = []
        for by_row in self.cells.values():
            for row in by_row:
                if row not in seen:
                    seen.append(row)
        return sorted(seen)


def correspondence(train: Split, from_taxonomy: str, to_taxonomy: str) -> CorrespondenceMatrix:
    """How labels of one taxonomy distribute over the other, in training.

    Columns are from-taxonomy labels present in the split (zero-count
    columns cannot occur); each nonzero column's fractions sum to 1.
    """
    counts: dict[str, dict[str, int]] = {}
    column_counts: dict[str, int] = {}
    for record in train.records:
        col = record.label(from_taxonomy)
        row = record.label(to_taxonomy)
        column_counts[col] = column_counts.get(col, 0) + 1
        counts.setdefault(col, {})
        counts[col][row] = counts[col].get(row, 0) + 1
    order = list(label_distribution(train, from_taxonomy))
    cells = {
        col: {row: n / column_counts[col] for row, n in sorted(counts[col].items())}
        for col in order
    }
    return CorrespondenceMatrix(
        row_taxonomy=to_taxonomy,
        col_taxonomy=from_taxonomy,
        column_counts={col: column_counts[col] for col in order},
        cells=cells,
    )


@dataclass
class UnseenPartition:
    """Test-record index sets by constituent novelty relative to training.

    Positional reading: a left constituent is unseen if it never occurs
    in the training split's *left* position (and right analogously), the
    same way the per-position vocabulary counts are kept. The
    any-position reading accepts either position as evidence of being
    seen.
    """

    n_records: int
    positional: bool
    unseen_left: list[int]
    unseen_right: list[int]
    unseen_both: list[int] = field(init=False)

    def __post_init__(self) -> None:
        left = set(self.unseen_left)
        right = set(self.unseen_right)
        self.unseen_both = sorted(left & right)

    def counts(self) -> dict[str, int]:
        return {
            "left": len(self.unseen_left),
            "right": len(self.unseen_right),
            "both": len(self.unseen_both),
        }

    def subsets(self) -> dict[str, list[int]]:
        return {
            "left": self.unseen_left,
            "right": self.unseen_right,
            "both": self.unseen_both,
        }


def partition_unseen(test: Split, train: Split, positional: bool = True) -> UnseenPartition:
    if positional:
        left_vocab = {r.left for r in train.records}
        right_vocab = {r.right for r in train.records}
    else:
        left_vocab = right_vocab = train.constituents()
    unseen_left = [i for i, r in enumerate(test.records) if r.left not in left_vocab]
    unseen_right = [i for i, r in enumerate(test.records) if r.right not in right_vocab]
    partition = UnseenPartition(
        n_records=len(test.records),
        positional=positional,
        unseen_left=unseen_left,
        unseen_right=unseen_right,
    )
    both = set(partition.unseen_both)
    assert both <= set(unseen_left) & set(unseen_right)
    return partition


def generalization_error(pset: PredictionSet, partition: UnseenPartition) -> dict[str, float]:
    """Percent misclassified within each unseen subset (empty ones omitted)."""
    if len(pset.rows) != partition.n_records:
        raise InputError(
            f"predictions cover {len(pset.rows)} records, partition expects {partition.n_records}"
        )
    wrong = [r.predicted != r.gold for r in pset.rows]
    out = {}
    for name, indices in partition.subsets().items():
        if indices:
            out[name] = 100.0 * sum(wrong[i] for i in indices) / len(indices)
    return out


def _constituents_by_label(train: Split, taxonomy: str, side: str) -> dict[str, set[str]]:
    by_label: dict[str, set[str]] = {}
    for record in train.records:
        by_label.setdefault(record.label(taxonomy), set()).add(_constituent(record, side))
    return by_label


def relation_specific_ratio(train: Split, taxonomy: str, side: str) -> dict[str, float]:
    """Per label: fraction of its distinct side constituents that occur
    with no other label. Ordered by descending label frequency."""
    by_label = _constituents_by_label(train, taxonomy, side)
    label_of: dict[str, set[str]] = {}
    for label, words in by_label.items():
        for word in words:
            label_of.setdefault(word, set()).add(label)
    out = {}
    for label in label_distribution(train, taxonomy):
        words = by_label[label]
        exclusive = sum(1 for w in words if label_of[w] == {label})
        out[label] = exclusive / len(words)
    return out


def lexical_overlap(train: Split, taxonomy: str, label_a: str, label_b: str, side: str) -> float:
    """Fraction of label_a's distinct side constituents that also occur
    in compounds labeled label_b. 1.0 when a label is compared to itself."""
    by_label = _constituents_by_label(train, taxonomy, side)
    if label_a not in by_label:
        raise InputError(f"label {label_a!r} does not occur in the {train.name} split")
    a_words = by_label[label_a]
    b_words = by_label.get(label_b, set())
    return len(a_words & b_words) / len(a_words)

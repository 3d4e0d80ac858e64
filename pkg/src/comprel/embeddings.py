"""Pretrained word-vector ingestion and constituent resolution.

The text format is one entry per line: the word, then exactly `dim`
space-separated float components. Constituents missing from the table
fall back, in order, to a lowercased lookup, to averaging resolvable
hyphen parts, and finally to a shared trainable unknown vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from comprel.errors import InputError
from comprel.corpus import Split
from comprel.rng import stream

RULE_EXACT = "exact"
RULE_LOWER = "lower"
RULE_HYPHEN = "hyphen"
RULE_UNK = "unk"
RULES = (RULE_EXACT, RULE_LOWER, RULE_HYPHEN, RULE_UNK)


@dataclass
class EmbeddingTable:
    dim: int
    entries: dict[str, np.ndarray]
    unk_vector: np.ndarray


@dataclass
class LoadReport:
    path: str
    dim: int
    loaded: int = 0
    skipped: int = 0
    duplicates: int = 0

    def to_json_dict(self) -> dict:
        return {
            "path": self.path,
            "dim": self.dim,
            "loaded": self.loaded,
            "skipped": self.skipped,
            "duplicates": self.duplicates,
        }


def infer_dim(path: str | Path) -> int:
    """Dimensionality implied by the first non-blank line of the file."""
    path = Path(path)
    if not path.exists():
        raise InputError(f"embedding file not found: {path}")
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line:
                continue
            dim = len(line.split(" ")) - 1
            if dim < 1:
                raise InputError(f"{path}: first line has no vector components")
            return dim
    raise InputError(f"{path}: no usable lines")


def load_embeddings(
    path: str | Path, expected_dim: int, unk_seed: int = 0
) -> tuple[EmbeddingTable, LoadReport]:
    """Parse a text embedding file; malformed lines are skipped and counted.

    The unknown-word vector is drawn once here, uniform in [-0.25, 0.25],
    from the dedicated unk stream of `unk_seed`, so a table is fully
    determined by (file, expected_dim, unk_seed).
    """
    path = Path(path)
    if not path.exists():
        raise InputError(f"embedding file not found: {path}")
    if expected_dim <= 0:
        raise InputError(f"expected_dim must be positive, got {expected_dim}")
    report = LoadReport(path=str(path), dim=expected_dim)
    entries: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as handle:
        for raw in handle:
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split(" ")
            if len(parts) != expected_dim + 1 or not parts[0]:
                report.skipped += 1
                continue
            word = parts[0]
            try:
                vector = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError:
                report.skipped += 1
                continue
            if not np.all(np.isfinite(vector)):
                report.skipped += 1
                continue
            if word in entries:
                report.duplicates += 1
                continue
            entries[word] = vector
            report.loaded += 1
    if not entries:
        raise InputError(f"no usable embedding lines in {path}")
    unk = stream(unk_seed, "unk").uniform(-0.25, 0.25, size=expected_dim)
    return EmbeddingTable(dim=expected_dim, entries=entries, unk_vector=unk), report


def _resolve_cased(word: str, table: EmbeddingTable) -> tuple[np.ndarray, str] | None:
    """Rules 1-2 only: exact match, then lowercase if the word has any
    uppercase character."""
    hit = table.entries.get(word)
    if hit is not None:
        return hit, RULE_EXACT
    if any(c.isupper() for c in word):
        hit = table.entries.get(word.lower())
        if hit is not None:
            return hit, RULE_LOWER
    return None


def resolve(word: str, table: EmbeddingTable) -> tuple[np.ndarray, str]:
    """Map a constituent to a vector; always succeeds, tagging the rule used."""
    if not word:
        raise InputError("cannot resolve an empty word")
    cased = _resolve_cased(word, table)
    if cased is not None:
        return cased
    if "-" in word:
        found = []
        for part in word.split("-"):
            if not part:
                continue
            hit = _resolve_cased(part, table)
            if hit is not None:
                found.append(hit[0])
        if found:
            return np.mean(found, axis=0), RULE_HYPHEN
    return table.unk_vector, RULE_UNK


@dataclass
class ResolvedVocab:
    """Corpus constituents mapped to rows of a trainable embedding matrix.

    One row per distinct constituent across all splits, in sorted word
    order, plus a final unknown row. The matrix is the initial state of
    the embedding layer; training mutates a copy, never this object.
    """

    index_of: dict[str, int]
    matrix: np.ndarray
    unk_index: int
    resolution_log: dict[str, str] = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def encode_pairs(self, split: Split) -> np.ndarray:
        """(n, 2) array of (left, right) row indices for a split."""
        rows = np.empty((len(split.records), 2), dtype=np.int64)
        for i, record in enumerate(split.records):
            try:
                rows[i, 0] = self.index_of[record.left]
                rows[i, 1] = self.index_of[record.right]
            except KeyError as missing:
                raise InputError(f"constituent {missing.args[0]!r} not in the resolved vocabulary") from None
        return rows

    def rule_counts(self) -> dict[str, int]:
        counts = {rule: 0 for rule in RULES}
        for rule in self.resolution_log.values():
            counts[rule] += 1
        return counts


def build_vocab(splits: dict[str, Split], table: EmbeddingTable) -> ResolvedVocab:
    """Resolve every distinct constituent across all splits to a matrix row.

    Dev and test constituents are included: the embedding layer covers the
    full corpus vocabulary so compounds unseen in training still map to
    pretrained rows. Deterministic given (splits, table); all randomness
    lives in the table's unknown vector.
    """
    words = sorted(set().union(*(split.constituents() for split in splits.values())))
    matrix = np.empty((len(words) + 1, table.dim), dtype=np.float64)
    index_of = {}
    log = {}
    for i, word in enumerate(words):
        vector, rule = resolve(word, table)
        matrix[i] = vector
        index_of[word] = i
        log[word] = rule
    matrix[len(words)] = table.unk_vector
    return ResolvedVocab(index_of=index_of, matrix=matrix, unk_index=len(words), resolution_log=log)

import itertools

import numpy as np
import pytest

from comprel.analysis import (
    correspondence,
    generalization_error,
    lexical_overlap,
    partition_unseen,
    relation_specific_ratio,
)
from comprel.corpus import CompoundRecord, LabelSpace, Split
from comprel.errors import InputError
from comprel.metrics import Prediction, PredictionSet, score
from comprel.rng import stream


def rec(left, right, a, b):
    return CompoundRecord(left=left, right=right, label_a=a, label_b=b)


# Hand-worked 12-record training fixture. Label A counts: X=4, Y=3, Z=3,
# W=2; label B counts: P=6, Q=6.
TRAIN = Split(
    name="train",
    records=[
        rec("a", "m", "X", "P"),
        rec("a", "n", "X", "P"),
        rec("b", "m", "X", "Q"),
        rec("b", "o", "Y", "P"),
        rec("c", "n", "Y", "Q"),
        rec("d", "p", "Z", "P"),
        rec("d", "q", "Z", "Q"),
        rec("e", "q", "Z", "P"),
        rec("f", "r", "W", "Q"),
        rec("f", "s", "W", "Q"),
        rec("g", "m", "X", "P"),
        rec("c", "o", "Y", "Q"),
    ],
)

# Test split exercising every novelty case. Train left vocab is a..g,
# train right vocab is m..s; "m" appears in training only on the right
# and "a" only on the left, so rows 4 and 5 split the positional and
# any-position readings apart.
TEST = Split(
    name="test",
    records=[
        rec("a", "m", "X", "P"),
        rec("h", "m", "X", "Q"),
        rec("a", "z", "Y", "P"),
        rec("i", "y", "Z", "Q"),
        rec("m", "n", "W", "P"),
        rec("b", "a", "X", "Q"),
    ],
)


def prediction_set(predicted):
    rows = [
        Prediction(r.left, r.right, gold=r.label_a, predicted=p, prob=0.5)
        for r, p in zip(TEST.records, predicted)
    ]
    return PredictionSet(taxonomy="A", rows=rows)


class TestCorrespondence:
    def test_hand_values_b_to_a(self):
        mat = correspondence(TRAIN, from_taxonomy="B", to_taxonomy="A")
        assert mat.col_taxonomy == "B"
        assert mat.row_taxonomy == "A"
        assert mat.column_counts == {"P": 6, "Q": 6}
        assert mat.cells["P"] == {"X": 0.5, "Y": 1 / 6, "Z": 1 / 3}
        assert mat.cells["Q"] == {"X": 1 / 6, "Y": 1 / 3, "Z": 1 / 6, "W": 1 / 3}
        assert mat.cell("W", "P") == 0.0
        assert mat.cell("X", "P") == 0.5

    def test_hand_values_a_to_b(self):
        mat = correspondence(TRAIN, from_taxonomy="A", to_taxonomy="B")
        assert mat.columns() == ["X", "Y", "Z", "W"]
        assert mat.column_counts == {"X": 4, "Y": 3, "Z": 3, "W": 2}
        assert mat.cells["X"] == {"P": 0.75, "Q": 0.25}
        assert mat.cells["Y"] == {"P": 1 / 3, "Q": 2 / 3}
        assert mat.cells["Z"] == {"P": 2 / 3, "Q": 1 / 3}
        assert mat.cells["W"] == {"Q": 1.0}
        assert mat.rows() == ["P", "Q"]

    def test_directions_are_transposes(self):
        ab = correspondence(TRAIN, "A", "B")
        ba = correspondence(TRAIN, "B", "A")
        for col in ab.columns():
            for row in ab.rows():
                joint = ab.cell(row, col) * ab.column_counts[col]
                back = ba.cell(col, row) * ba.column_counts[row]
                assert joint == pytest.approx(back, abs=1e-9)

    def test_columns_sum_to_one(self):
        words = [f"w{i}" for i in range(10)]
        gen = stream(5, "corr")
        records = []
        for left, right in itertools.product(words, words):
            records.append(
                rec(left, right, f"A{gen.integers(4)}", f"B{gen.integers(3)}")
            )
        split = Split(name="train", records=records)
        for frm, to in [("A", "B"), ("B", "A")]:
            mat = correspondence(split, frm, to)
            assert sum(mat.column_counts.values()) == len(records)
            for col in mat.columns():
                assert sum(mat.cells[col].values()) == pytest.approx(1.0, abs=1e-9)

    def test_self_correspondence_is_identity(self):
        mat = correspondence(TRAIN, "A", "A")
        for col in mat.columns():
            assert mat.cells[col] == {col: 1.0}


class TestPartitionUnseen:
    def test_positional(self):
        part = partition_unseen(TEST, TRAIN)
        assert part.positional
        assert part.n_records == 6
        assert part.unseen_left == [1, 3, 4]
        assert part.unseen_right == [2, 3, 5]
        assert part.unseen_both == [3]
        assert part.counts() == {"left": 3, "right": 3, "both": 1}

    def test_any_position(self):
        part = partition_unseen(TEST, TRAIN, positional=False)
        assert part.unseen_left == [1, 3]
        assert part.unseen_right == [2, 3]
        assert part.unseen_both == [3]

    def test_both_subset_of_intersection(self):
        gen = stream(9, "part")
        words = [f"w{i}" for i in range(30)]
        for _ in range(20):
            train_recs = [
                rec(words[gen.integers(20)], words[gen.integers(20)], "X", "P")
                for _ in range(15)
            ]
            test_recs = [
                rec(words[gen.integers(30)], words[gen.integers(30)], "X", "P")
                for _ in range(10)
            ]
            part = partition_unseen(
                Split("test", test_recs), Split("train", train_recs)
            )
            both = set(part.unseen_both)
            assert both == set(part.unseen_left) & set(part.unseen_right)

    def test_disjoint_test_split_is_fully_unseen(self):
        other = Split("test", [rec("q1", "q2", "X", "P"), rec("q3", "q4", "Y", "Q")])
        part = partition_unseen(other, TRAIN)
        assert part.unseen_left == [0, 1]
        assert part.unseen_right == [0, 1]
        assert part.unseen_both == [0, 1]


class TestGeneralizationError:
    def test_hand_values(self):
        pset = prediction_set(["X", "X", "Y", "W", "X", "Y"])
        part = partition_unseen(TEST, TRAIN)
        err = generalization_error(pset, part)
        assert err["left"] == pytest.approx(200 / 3, abs=1e-9)
        assert err["right"] == pytest.approx(200 / 3, abs=1e-9)
        assert err["both"] == 100.0

    def test_all_correct_is_zero(self):
        pset = prediction_set([r.label_a for r in TEST.records])
        err = generalization_error(pset, partition_unseen(TEST, TRAIN))
        assert err == {"left": 0.0, "right": 0.0, "both": 0.0}

    def test_empty_subsets_omitted(self):
        seen_only = Split("test", [rec("a", "m", "X", "P"), rec("b", "o", "Y", "Q")])
        rows = [
            Prediction(r.left, r.right, gold=r.label_a, predicted="X", prob=0.5)
            for r in seen_only.records
        ]
        err = generalization_error(
            PredictionSet("A", rows), partition_unseen(seen_only, TRAIN)
        )
        assert err == {}

    def test_length_mismatch_fatal(self):
        pset = prediction_set(["X"] * 6)
        short = PredictionSet("A", pset.rows[:4])
        with pytest.raises(InputError):
            generalization_error(short, partition_unseen(TEST, TRAIN))

    def test_matches_subset_accuracy_from_scoring(self):
        gen = stream(3, "generror")
        labels = ["X", "Y", "Z", "W"]
        space = LabelSpace(taxonomy="A", labels=sorted(labels))
        for _ in range(10):
            predicted = [labels[gen.integers(4)] for _ in TEST.records]
            pset = prediction_set(predicted)
            part = partition_unseen(TEST, TRAIN)
            err = generalization_error(pset, part)
            for name, indices in part.subsets().items():
                sub_pred = [predicted[i] for i in indices]
                sub_gold = [TEST.records[i].label_a for i in indices]
                scores, _ = score(sub_pred, sub_gold, space)
                assert err[name] == pytest.approx(
                    100.0 * (1.0 - scores.accuracy), abs=1e-9
                )


class TestRelationSpecificRatio:
    def test_hand_values_left(self):
        ratios = relation_specific_ratio(TRAIN, "A", "left")
        assert list(ratios) == ["X", "Y", "Z", "W"]
        assert ratios["X"] == pytest.approx(2 / 3)
        assert ratios["Y"] == pytest.approx(0.5)
        assert ratios["Z"] == 1.0
        assert ratios["W"] == 1.0

    def test_hand_values_right(self):
        ratios = relation_specific_ratio(TRAIN, "A", "right")
        assert ratios["X"] == pytest.approx(0.5)
        assert ratios["Y"] == pytest.approx(0.5)
        assert ratios["Z"] == 1.0
        assert ratios["W"] == 1.0

    def test_single_label_is_fully_exclusive(self):
        split = Split("train", [rec("a", "m", "X", "P"), rec("b", "n", "X", "Q")])
        assert relation_specific_ratio(split, "A", "left") == {"X": 1.0}

    def test_bad_side_fatal(self):
        with pytest.raises(InputError):
            relation_specific_ratio(TRAIN, "A", "middle")


class TestLexicalOverlap:
    def test_hand_values(self):
        assert lexical_overlap(TRAIN, "A", "X", "Y", "left") == pytest.approx(1 / 3)
        assert lexical_overlap(TRAIN, "A", "Y", "X", "left") == pytest.approx(0.5)
        assert lexical_overlap(TRAIN, "B", "P", "Q", "right") == pytest.approx(0.8)

    def test_self_overlap_is_one(self):
        for label in ["X", "Y", "Z", "W"]:
            assert lexical_overlap(TRAIN, "A", label, label, "left") == 1.0

    def test_disjoint_labels_overlap_zero(self):
        assert lexical_overlap(TRAIN, "A", "Z", "W", "left") == 0.0

    def test_subset_overlaps_fully(self):
        split = Split(
            "train",
            [rec("a", "m", "X", "P"), rec("a", "n", "Y", "P"), rec("b", "o", "Y", "P")],
        )
        assert lexical_overlap(split, "A", "X", "Y", "left") == 1.0

    def test_missing_label_a_fatal(self):
        with pytest.raises(InputError):
            lexical_overlap(TRAIN, "A", "NOPE", "X", "left")

    def test_missing_label_b_is_zero(self):
        assert lexical_overlap(TRAIN, "A", "X", "NOPE", "left") == 0.0

    def test_asymmetry(self):
        ab = lexical_overlap(TRAIN, "A", "X", "Y", "left")
        ba = lexical_overlap(TRAIN, "A", "Y", "X", "left")
        assert ab != ba

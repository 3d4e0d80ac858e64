import json

import pytest

from comprel.analysis import partition_unseen
from comprel.corpus import CompoundRecord, Split, load_split
from comprel.errors import InputError
from comprel.experiments import ExperimentConfig, TrainParams, run_experiment
from comprel.metrics import macro_f1, predicted_label_union, read_predictions, score
from comprel.reporting import (
    align_table,
    fmt_pct,
    report_files,
    report_payload,
    report_text,
    stats_files,
    stats_payload,
    stats_text,
    tsv,
)
from comprel.synth import separable_dataset

FAST = TrainParams(batch_size=5, max_epochs=4, patience=2)


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """Corpus with novel test constituents plus three trained bundles."""
    root = tmp_path_factory.mktemp("report")
    data = root / "data"
    separable_dataset(seed=5).write(data)
    rows = [
        line.split("\t")
        for line in (data / "test.tsv").read_text().strip().split("\n")
    ]
    rows[0][0] = "novelleft"
    rows[1][1] = "novelright"
    rows[2][0] = "novelboth1"
    rows[2][1] = "novelboth2"
    (data / "test.tsv").write_text(
        "\n".join("\t".join(r) for r in rows) + "\n"
    )
    bundles = []
    for kw in (
        {"model": "stl", "task": "A", "seed": 0},
        {"model": "stl", "task": "A", "seed": 1},
        {"model": "mtl-f", "main_task": "B", "seed": 0},
    ):
        cfg = ExperimentConfig(
            data_dir=str(data),
            embeddings=str(data / "embeddings.txt"),
            out_dir=str(root / "runs"),
            include_test=True,
            train=FAST,
            **kw,
        )
        bundles.append(run_experiment(cfg).bundle)
    return data, bundles


class TestRenderHelpers:
    def test_fmt_pct(self):
        assert fmt_pct(0.5) == "50.00"
        assert fmt_pct(1.0) == "100.00"
        assert fmt_pct(1 / 3) == "33.33"

    def test_align_table(self):
        text = align_table(["name", "n"], [["ab", "1"], ["c", "250"]])
        assert text.split("\n") == ["name    n", "ab      1", "c     250"]

    def test_tsv(self):
        assert tsv(["a", "b"], [["1", "2"]]) == "a\tb\n1\t2\n"


def tiny_splits():
    def rec(left, right, a, b):
        return CompoundRecord(left=left, right=right, label_a=a, label_b=b)

    train = Split(
        "train",
        [
            rec("a", "m", "X", "P"),
            rec("a", "n", "X", "P"),
            rec("b", "m", "Y", "Q"),
        ],
    )
    dev = Split("dev", [rec("a", "m", "X", "P")])
    test = Split("test", [rec("q", "z", "X", "Q")])
    return {"train": train, "dev": dev, "test": test}


class TestStats:
    def test_payload_matches_modules(self):
        payload = stats_payload(tiny_splits())
        assert payload["splits"]["train"] == {
            "compounds": 3,
            "vocab_size": 4,
            "right_types": 2,
            "left_types": 2,
        }
        dist = payload["distributions"]["train"]["A"]
        assert dist[0] == {"label": "X", "count": 2, "fraction": 2 / 3}
        assert payload["correspondence"]["A_to_B"]["cells"]["X"] == {"P": 1.0}
        assert payload["ratios"]["A"]["left"] == {"X": 1.0, "Y": 1.0}
        assert payload["ratios"]["A"]["right"] == {"X": 0.5, "Y": 0.0}

    def test_text_has_all_sections(self):
        text = stats_text(stats_payload(tiny_splits()))
        for marker in (
            "corpus characteristics",
            "train label distribution, taxonomy A",
            "correspondence A -> B",
            "correspondence B -> A",
            "relation-specific constituent ratios",
        ):
            assert marker in text

    def test_distribution_tsv_rows_sum_to_split_size(self):
        splits = tiny_splits()
        files = stats_files(stats_payload(splits))
        lines = files["distributions.tsv"].strip().split("\n")[1:]
        totals: dict[tuple[str, str], int] = {}
        for line in lines:
            split_name, tax, _, count, _ = line.split("\t")
            key = (split_name, tax)
            totals[key] = totals.get(key, 0) + int(count)
        for (split_name, _), total in totals.items():
            assert total == len(splits[split_name])

    def test_file_set(self):
        files = stats_files(stats_payload(tiny_splits()))
        assert set(files) == {
            "stats.json",
            "stats.txt",
            "distributions.tsv",
            "correspondence.A_to_B.tsv",
            "correspondence.B_to_A.tsv",
            "ratios.tsv",
        }
        assert json.loads(files["stats.json"])["splits"]["dev"]["compounds"] == 1


class TestReportPayload:
    def test_macro_uses_cross_model_union(self, trained):
        data, bundles = trained
        payload = report_payload(bundles)
        block = payload["taxonomies"]["A"]["test"]
        psets = [
            read_predictions(b / "predictions.A.test.tsv", "A")
            for b in bundles
            if (b / "predictions.A.test.tsv").exists()
        ]
        assert block["union"] == predicted_label_union(psets)
        train = load_split(data / "train.tsv", "train")
        from comprel.corpus import build_label_space

        space = build_label_space(train, "A")
        pset = psets[0]
        scores, _ = score(
            [p.predicted for p in pset.rows], [p.gold for p in pset.rows], space
        )
        first_model = next(iter(block["models"].values()))
        assert first_model["macro_f1_union"] == macro_f1(scores, block["union"])
        assert first_model["accuracy"] == scores.accuracy

    def test_single_bundle_reproduces_own_scores(self, trained):
        _, bundles = trained
        stored = json.loads((bundles[0] / "scores.json").read_text())
        payload = report_payload([bundles[0]])
        model = next(iter(payload["taxonomies"]["A"]["dev"]["models"].values()))
        assert model["accuracy"] == stored["scores"]["A"]["dev"]["accuracy"]

    def test_generalization_sections(self, trained):
        data, bundles = trained
        payload = report_payload(bundles)
        train = load_split(data / "train.tsv", "train")
        test = load_split(data / "test.tsv", "test")
        part = partition_unseen(test, train)
        assert payload["partition_counts"]["positional"] == part.counts()
        assert part.counts()["both"] >= 1
        for entry in payload["taxonomies"]["A"]["test"]["models"].values():
            assert set(entry["generalization"]) <= {"left", "right", "both"}
            assert "both" in entry["generalization"]
            any_pos = entry["generalization_any_position"]
            assert set(any_pos) <= {"left", "right", "both"}

    def test_taxonomy_b_covered_by_mtl_only(self, trained):
        _, bundles = trained
        payload = report_payload(bundles)
        assert len(payload["taxonomies"]["B"]["dev"]["models"]) == 1
        assert len(payload["taxonomies"]["A"]["dev"]["models"]) == 3

    def test_duplicate_labels_disambiguated(self, trained):
        _, bundles = trained
        payload = report_payload([bundles[0], bundles[0]])
        labels = [b["label"] for b in payload["bundles"]]
        assert len(set(labels)) == 2

    def test_empty_bundle_list_fatal(self):
        with pytest.raises(InputError, match="at least one"):
            report_payload([])

    def test_not_a_bundle_fatal(self, tmp_path):
        with pytest.raises(InputError, match="config.json"):
            report_payload([tmp_path])

    def test_mixed_corpora_fatal(self, trained, tmp_path_factory):
        _, bundles = trained
        other_root = tmp_path_factory.mktemp("other")
        other_data = other_root / "data"
        separable_dataset(seed=8).write(other_data)
        cfg = ExperimentConfig(
            data_dir=str(other_data),
            embeddings=str(other_data / "embeddings.txt"),
            out_dir=str(other_root / "runs"),
            train=FAST,
        )
        foreign = run_experiment(cfg).bundle
        with pytest.raises(InputError, match="different corpora"):
            report_payload([bundles[0], foreign])


class TestReportRendering:
    def test_text_sections(self, trained):
        _, bundles = trained
        payload = report_payload(bundles)
        text = report_text(payload)
        assert "== models ==" in text
        assert "taxonomy A, dev split" in text
        assert "generalization error" in text
        assert "stl:A:s0" in text and "stl:A:s1" in text and "mtl-f:B:s0" in text

    def test_files(self, trained):
        _, bundles = trained
        files = report_files(report_payload(bundles))
        assert set(files) == {
            "report.json",
            "report.txt",
            "accuracy.tsv",
            "macro_f1.tsv",
            "per_label_f1.tsv",
            "generalization.tsv",
        }
        gen_lines = files["generalization.tsv"].strip().split("\n")
        assert len(gen_lines) > 1
        acc_lines = files["accuracy.tsv"].strip().split("\n")[1:]
        assert all(len(line.split("\t")) == 4 for line in acc_lines)

import json

import numpy as np
import pytest

from comprel.cli import build_parser, main
from comprel.nn import network


def run(argv):
    return main(argv)


def fast_config(corpus_dir, out_dir, **kw):
    cfg = {
        "data_dir": str(corpus_dir),
        "embeddings": str(corpus_dir / "embeddings.txt"),
        "out_dir": str(out_dir),
        "train": {"max_epochs": 3, "patience": 2},
    }
    cfg.update(kw)
    return cfg


def write_config(path, cfg):
    path.write_text(json.dumps(cfg))
    return str(path)


class TestStatsCommand:
    def test_writes_reports_and_prints(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "reports"
        assert run(["stats", "--data-dir", str(corpus_dir), "--out", str(out)]) == 0
        assert (out / "stats.json").exists()
        assert (out / "stats.txt").exists()
        assert (out / "distributions.tsv").exists()
        printed = capsys.readouterr().out
        assert "corpus characteristics" in printed
        assert "200" in printed

    def test_missing_test_file_exits_2(self, corpus_dir, tmp_path, capsys):
        partial = tmp_path / "partial"
        partial.mkdir()
        for name in ("train.tsv", "dev.tsv"):
            (partial / name).write_bytes((corpus_dir / name).read_bytes())
        assert run(["stats", "--data-dir", str(partial), "--out", str(tmp_path)]) == 2
        assert "test.tsv" in capsys.readouterr().err


class TestTrainCommand:
    def test_separable_reaches_99_percent(self, corpus_dir, tmp_path, capsys):
        rc = run(
            [
                "train",
                "--data-dir",
                str(corpus_dir),
                "--embeddings",
                str(corpus_dir / "embeddings.txt"),
                "--out",
                str(tmp_path / "runs"),
                "--model",
                "stl",
                "--task",
                "A",
                "--seed",
                "0",
                "--include-test",
            ]
        )
        assert rc == 0
        printed = capsys.readouterr().out
        bundle = printed.split("bundle: ", 1)[1].split("\n", 1)[0]
        scores = json.loads((tmp_path / "runs").joinpath(
            bundle.rsplit("/", 1)[1], "scores.json"
        ).read_text())
        assert scores["scores"]["A"]["test"]["accuracy"] >= 0.99

    def test_config_file_with_flag_override(self, corpus_dir, tmp_path, capsys):
        cfg_path = write_config(
            tmp_path / "cfg.json",
            fast_config(corpus_dir, tmp_path / "runs", task="A", seed=0),
        )
        assert run(["train", "--config", cfg_path, "--seed", "3"]) == 0
        printed = capsys.readouterr().out
        bundle = printed.split("bundle: ", 1)[1].split("\n", 1)[0]
        stored = json.loads((tmp_path / "runs").joinpath(
            bundle.rsplit("/", 1)[1], "config.json"
        ).read_text())
        assert stored["seed"] == 3

    def test_repeat_run_byte_identical_checkpoint(self, corpus_dir, tmp_path):
        cfg_path = write_config(
            tmp_path / "cfg.json",
            fast_config(corpus_dir, tmp_path / "runs", task="B", seed=5),
        )
        assert run(["train", "--config", cfg_path]) == 0
        runs = list((tmp_path / "runs").iterdir())
        assert len(runs) == 1
        first = (runs[0] / "checkpoint.npz").read_bytes()
        first_preds = (runs[0] / "predictions.B.dev.tsv").read_bytes()
        first_log = (runs[0] / "train_log.json").read_bytes()
        assert run(["train", "--config", cfg_path]) == 0
        assert (runs[0] / "checkpoint.npz").read_bytes() == first
        assert (runs[0] / "predictions.B.dev.tsv").read_bytes() == first_preds
        assert (runs[0] / "train_log.json").read_bytes() == first_log

    def test_mtl_f_emits_two_prediction_files(self, corpus_dir, tmp_path):
        cfg_path = write_config(
            tmp_path / "cfg.json",
            fast_config(
                corpus_dir, tmp_path / "runs", model="mtl-f", main_task="A"
            ),
        )
        assert run(["train", "--config", cfg_path]) == 0
        bundle = next((tmp_path / "runs").iterdir())
        names = {p.name for p in bundle.iterdir()}
        assert "predictions.A.dev.tsv" in names
        assert "predictions.B.dev.tsv" in names

    def test_missing_inputs_exit_2(self, tmp_path, capsys):
        assert run(["train", "--model", "stl"]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_unknown_config_key_exit_2(self, corpus_dir, tmp_path, capsys):
        cfg = fast_config(corpus_dir, tmp_path / "runs")
        cfg["sead"] = 4
        cfg_path = write_config(tmp_path / "cfg.json", cfg)
        assert run(["train", "--config", cfg_path]) == 2

    def test_config_file_not_found_exit_2(self, tmp_path, capsys):
        assert run(["train", "--config", str(tmp_path / "none.json")]) == 2
        assert "not found" in capsys.readouterr().err

    def test_invalid_model_flag_rejected_by_parser(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["train", "--model", "cnn"])
        assert exc.value.code == 2


class TestReportCommand:
    @pytest.fixture()
    def two_bundles(self, corpus_dir, tmp_path):
        paths = []
        for seed in (0, 1):
            cfg_path = write_config(
                tmp_path / f"cfg{seed}.json",
                fast_config(
                    corpus_dir,
                    tmp_path / "runs",
                    task="A",
                    seed=seed,
                    include_test=True,
                ),
            )
            assert run(["train", "--config", cfg_path]) == 0
        paths = sorted(str(p) for p in (tmp_path / "runs").iterdir())
        assert len(paths) == 2
        return paths

    def test_comparison_written(self, two_bundles, tmp_path, capsys):
        out = tmp_path / "cmp"
        assert run(["report", *two_bundles, "--out", str(out)]) == 0
        assert (out / "report.json").exists()
        assert (out / "macro_f1.tsv").exists()
        printed = capsys.readouterr().out
        assert "== models ==" in printed
        assert "macro over" in printed

    def test_report_reproduces_bundle_scores(self, two_bundles, tmp_path, capsys):
        out = tmp_path / "solo"
        assert run(["report", two_bundles[0], "--out", str(out)]) == 0
        payload = json.loads((out / "report.json").read_text())
        stored = json.loads(
            (tmp_path / "runs")
            .joinpath(two_bundles[0].rsplit("/", 1)[1], "scores.json")
            .read_text()
        )
        model = next(iter(payload["taxonomies"]["A"]["dev"]["models"].values()))
        assert model["accuracy"] == stored["scores"]["A"]["dev"]["accuracy"]

    def test_non_bundle_exit_2(self, tmp_path, capsys):
        assert run(["report", str(tmp_path), "--out", str(tmp_path / "o")]) == 2
        assert "config.json" in capsys.readouterr().err


class TestSelfcheckCommand:
    def test_pristine_build_exits_0(self, capsys):
        assert run(["selfcheck"]) == 0
        printed = capsys.readouterr().out
        assert "selfcheck: PASS" in printed
        assert printed.count("[ok  ]") == 6

    def test_mutated_backward_exits_1(self, monkeypatch, capsys):
        real_backward = network.backward

        def sign_flipped(params, trace, gold, head, scale=1.0):
            real_backward(params, trace, gold, head, scale)
            for tensor in params.tensors():
                tensor.grad *= -1.0

        monkeypatch.setattr(network, "backward", sign_flipped)
        assert run(["selfcheck"]) == 1
        printed = capsys.readouterr().out
        assert "selfcheck: FAIL" in printed
        assert "[FAIL]" in printed


class TestParser:
    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_version_flag(self, capsys):
        with pytest.raises(SystemExit) as exc:
            build_parser().parse_args(["--version"])
        assert exc.value.code == 0

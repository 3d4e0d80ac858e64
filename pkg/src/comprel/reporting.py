"""Report construction and rendering.

Payload builders return plain JSON-ready dicts (what the service emits);
the text and TSV renderers are pure functions over those payloads so the
CLI can format a remote response exactly like a local one. Percentages are
rounded to 2 decimals in text output only; JSON and TSV keep full
precision.
"""

from __future__ import annotations

import json
from pathlib import Path

from comprel.analysis import (
    correspondence,
    generalization_error,
    partition_unseen,
    relation_specific_ratio,
)
from comprel.corpus import TAXONOMIES, Split, build_label_space, label_distribution, vocab_stats
from comprel.errors import InputError
from comprel.experiments import TRAIN_LOG_FILE, read_bundle_config
from comprel.metrics import macro_f1, predicted_label_union, read_predictions, score

SUBSET_ORDER = ("left", "right", "both")


def fmt_pct(fraction: float) -> str:
    return f"{100.0 * fraction:.2f}"


def fmt_num(value: float) -> str:
    return f"{value:.17g}"


def align_table(header: list[str], rows: list[list[str]]) -> str:
    """First column left-aligned, the rest right-aligned."""
    table = [header] + rows
    widths = [max(len(row[i]) for row in table) for i in range(len(header))]
    lines = []
    for row in table:
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(row))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines)


def tsv(header: list[str], rows: list[list[str]]) -> str:
    lines = ["\t".join(header)]
    lines += ["\t".join(row) for row in rows]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- stats


def stats_payload(splits: dict[str, Split]) -> dict:
    """Corpus characteristics plus train-split label analyses."""
    stats = vocab_stats(splits)
    train = splits["train"]
    distributions = {
        name: {
            tax: [
                {"label": label, "count": count, "fraction": fraction}
                for label, (count, fraction) in label_distribution(split, tax).items()
            ]
            for tax in TAXONOMIES
        }
        for name, split in splits.items()
    }
    corr = {}
    for frm, to in (("A", "B"), ("B", "A")):
        mat = correspondence(train, frm, to)
        corr[f"{frm}_to_{to}"] = {
            "row_taxonomy": mat.row_taxonomy,
            "col_taxonomy": mat.col_taxonomy,
            "column_counts": mat.column_counts,
            "cells": mat.cells,
        }
    ratios = {
        tax: {
            side: relation_specific_ratio(train, tax, side)
            for side in ("left", "right")
        }
        for tax in TAXONOMIES
    }
    return {
        "splits": {
            name: {
                "compounds": s.compounds,
                "vocab_size": s.vocab_size,
                "right_types": s.right_types,
                "left_types": s.left_types,
            }
            for name, s in stats.items()
        },
        "distributions": distributions,
        "correspondence": corr,
        "ratios": ratios,
    }


def stats_text(payload: dict) -> str:
    sections = []
    split_names = list(payload["splits"])
    rows = []
    for key in ("compounds", "vocab_size", "right_types", "left_types"):
        label = key.replace("_", " ")
        rows.append([label] + [str(payload["splits"][n][key]) for n in split_names])
    sections.append(
        "== corpus characteristics ==\n"
        + align_table(["", *split_names], rows)
    )
    for tax in TAXONOMIES:
        entries = payload["distributions"]["train"][tax]
        rows = [
            [e["label"], str(e["count"]), fmt_pct(e["fraction"])] for e in entries
        ]
        sections.append(
            f"== train label distribution, taxonomy {tax} ==\n"
            + align_table(["label", "count", "%"], rows)
        )
    for key, mat in payload["correspondence"].items():
        cols = list(mat["column_counts"])
        row_labels = sorted({r for cell in mat["cells"].values() for r in cell})
        rows = [
            ["count"] + [str(mat["column_counts"][c]) for c in cols]
        ]
        for row_label in row_labels:
            rows.append(
                [row_label]
                + [f"{mat['cells'][c].get(row_label, 0.0):.2f}" for c in cols]
            )
        sections.append(
            f"== correspondence {mat['col_taxonomy']} -> {mat['row_taxonomy']} ==\n"
            + align_table([f"{key}", *cols], rows)
        )
    ratio_rows = []
    for tax in TAXONOMIES:
        for side in ("left", "right"):
            for label, ratio in payload["ratios"][tax][side].items():
                ratio_rows.append([f"{tax}/{side}", label, fmt_pct(ratio)])
    sections.append(
        "== relation-specific constituent ratios ==\n"
        + align_table(["taxonomy/side", "label", "% exclusive"], ratio_rows)
    )
    return "\n\n".join(sections) + "\n"


def stats_files(payload: dict) -> dict[str, str]:
    files = {
        "stats.json": json.dumps(payload, indent=2, sort_keys=True) + "\n",
        "stats.txt": stats_text(payload),
    }
    dist_rows = [
        [name, tax, e["label"], str(e["count"]), fmt_num(e["fraction"])]
        for name, by_tax in payload["distributions"].items()
        for tax, entries in by_tax.items()
        for e in entries
    ]
    files["distributions.tsv"] = tsv(
        ["split", "taxonomy", "label", "count", "fraction"], dist_rows
    )
    for key, mat in payload["correspondence"].items():
        rows = [
            [col, row, fmt_num(fraction), str(mat["column_counts"][col])]
            for col, cells in mat["cells"].items()
            for row, fraction in cells.items()
        ]
        files[f"correspondence.{key}.tsv"] = tsv(
            ["from", "to", "fraction", "from_count"], rows
        )
    ratio_rows = [
        [tax, side, label, fmt_num(ratio)]
        for tax, by_side in payload["ratios"].items()
        for side, by_label in by_side.items()
        for label, ratio in by_label.items()
    ]
    files["ratios.tsv"] = tsv(["taxonomy", "side", "label", "ratio"], ratio_rows)
    return files


# ---------------------------------------------------------------- report


def _bundle_label(cfg, bundle_id: str, taken: set[str]) -> str:
    if cfg.model == "stl":
        detail = cfg.task
    elif cfg.model.startswith("tl-"):
        detail = cfg.direction
    else:
        detail = cfg.main_task
    label = f"{cfg.model}:{detail}:s{cfg.seed}"
    if label in taken:
        label = f"{label}@{bundle_id}"
    taken.add(label)
    return label


def report_payload(bundle_dirs: list[str | Path]) -> dict:
    """Cross-model comparison over result bundles sharing one corpus."""
    if not bundle_dirs:
        raise InputError("report needs at least one bundle directory")
    from comprel.corpus import load_split

    bundles = []
    taken: set[str] = set()
    for raw in bundle_dirs:
        path = Path(raw)
        cfg = read_bundle_config(path)
        log = json.loads((path / TRAIN_LOG_FILE).read_text(encoding="utf-8"))
        bundles.append(
            {
                "dir": path,
                "config": cfg,
                "id": path.name,
                "label": _bundle_label(cfg, path.name, taken),
                "log": log,
            }
        )
    data_dirs = {b["config"].data_dir for b in bundles}
    if len(data_dirs) > 1:
        raise InputError(
            f"bundles were trained on different corpora: {sorted(data_dirs)}"
        )
    data_dir = Path(bundles[0]["config"].data_dir)
    splits = {
        name: load_split(data_dir / f"{name}.tsv", name)
        for name in ("train", "dev", "test")
    }
    spaces = {t: build_label_space(splits["train"], t) for t in TAXONOMIES}
    partition = partition_unseen(splits["test"], splits["train"])
    any_pos = partition_unseen(splits["test"], splits["train"], positional=False)

    payload: dict = {
        "data_dir": str(data_dir),
        "bundles": [
            {
                "label": b["label"],
                "id": b["id"],
                "dir": str(b["dir"]),
                "model": b["config"].model,
                "tasks": b["config"].tasks(),
                "seed": b["config"].seed,
                "best_epoch": b["log"]["best_epoch"],
                "stopped_epoch": b["log"]["stopped_epoch"],
                "stop_reason": b["log"]["stop_reason"],
            }
            for b in bundles
        ],
        "partition_counts": {
            "positional": partition.counts(),
            "any_position": any_pos.counts(),
            "test_records": partition.n_records,
        },
        "taxonomies": {},
    }

    for tax in TAXONOMIES:
        covering = [
            b
            for b in bundles
            if (b["dir"] / f"predictions.{tax}.dev.tsv").exists()
        ]
        if not covering:
            continue
        section: dict = {}
        split_names = ["dev"]
        if all(
            (b["dir"] / f"predictions.{tax}.test.tsv").exists() for b in covering
        ):
            split_names.append("test")
        for split_name in split_names:
            psets = {
                b["label"]: read_predictions(
                    b["dir"] / f"predictions.{tax}.{split_name}.tsv", tax
                )
                for b in covering
            }
            union = predicted_label_union(list(psets.values()))
            models = {}
            for label, pset in psets.items():
                scores, _ = score(
                    [p.predicted for p in pset.rows],
                    [p.gold for p in pset.rows],
                    spaces[tax],
                )
                entry = {
                    "accuracy": scores.accuracy,
                    "macro_f1_union": macro_f1(scores, union),
                    "per_label_f1": {
                        lab: scores.per_label[lab].f1 for lab in union
                    },
                }
                if split_name == "test":
                    entry["generalization"] = generalization_error(pset, partition)
                    entry["generalization_any_position"] = generalization_error(
                        pset, any_pos
                    )
                models[label] = entry
            section[split_name] = {"union": union, "models": models}
        payload["taxonomies"][tax] = section
    if not payload["taxonomies"]:
        raise InputError("no prediction files found in the given bundles")
    return payload


def report_text(payload: dict) -> str:
    sections = []
    rows = [
        [
            b["label"],
            b["model"],
            "+".join(b["tasks"]),
            str(b["best_epoch"]),
            str(b["stopped_epoch"]),
            b["stop_reason"],
        ]
        for b in payload["bundles"]
    ]
    sections.append(
        "== models ==\n"
        + align_table(
            ["model", "kind", "tasks", "best", "stopped", "reason"], rows
        )
    )
    for tax, section in payload["taxonomies"].items():
        for split_name, block in section.items():
            union = block["union"]
            rows = [
                [
                    label,
                    fmt_pct(entry["accuracy"]),
                    fmt_pct(entry["macro_f1_union"]),
                ]
                for label, entry in block["models"].items()
            ]
            sections.append(
                f"== taxonomy {tax}, {split_name} split "
                f"(macro over {len(union)} predicted labels) ==\n"
                + align_table(["model", "accuracy %", "macro-F1 %"], rows)
            )
            f1_rows = [
                [lab]
                + [
                    fmt_pct(entry["per_label_f1"][lab])
                    for entry in block["models"].values()
                ]
                for lab in union
            ]
            sections.append(
                f"== taxonomy {tax}, {split_name} split, per-label F1 % ==\n"
                + align_table(["label", *block["models"].keys()], f1_rows)
            )
        test_block = section.get("test")
        if test_block:
            counts = payload["partition_counts"]["positional"]
            rows = []
            for label, entry in test_block["models"].items():
                err = entry["generalization"]
                rows.append(
                    [label]
                    + [
                        f"{err[s]:.2f}" if s in err else "-"
                        for s in SUBSET_ORDER
                    ]
                )
            head = [
                "model",
                *[f"{s} (n={counts[s]})" for s in SUBSET_ORDER],
            ]
            sections.append(
                f"== taxonomy {tax}, generalization error % on unseen test "
                "compounds (positional) ==\n" + align_table(head, rows)
            )
    return "\n\n".join(sections) + "\n"


def report_files(payload: dict) -> dict[str, str]:
    files = {
        "report.json": json.dumps(payload, indent=2, sort_keys=True) + "\n",
        "report.txt": report_text(payload),
    }
    acc_rows, macro_rows, f1_rows, gen_rows = [], [], [], []
    for tax, section in payload["taxonomies"].items():
        for split_name, block in section.items():
            for label, entry in block["models"].items():
                acc_rows.append(
                    [tax, split_name, label, fmt_num(entry["accuracy"])]
                )
                macro_rows.append(
                    [
                        tax,
                        split_name,
                        label,
                        fmt_num(entry["macro_f1_union"]),
                        str(len(block["union"])),
                    ]
                )
                for lab, f1 in entry["per_label_f1"].items():
                    f1_rows.append([tax, split_name, label, lab, fmt_num(f1)])
                for subset, err in entry.get("generalization", {}).items():
                    gen_rows.append([tax, label, subset, fmt_num(err)])
    files["accuracy.tsv"] = tsv(["taxonomy", "split", "model", "accuracy"], acc_rows)
    files["macro_f1.tsv"] = tsv(
        ["taxonomy", "split", "model", "macro_f1", "union_size"], macro_rows
    )
    files["per_label_f1.tsv"] = tsv(
        ["taxonomy", "split", "model", "label", "f1"], f1_rows
    )
    files["generalization.tsv"] = tsv(
        ["taxonomy", "model", "subset", "error_pct"], gen_rows
    )
    return files


def write_files(out_dir: str | Path, files: dict[str, str]) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, content in files.items():
        path = out / name
        path.write_text(content, encoding="utf-8")
        written.append(path)
    return written

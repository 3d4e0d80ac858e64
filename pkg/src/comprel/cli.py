"""Command-line interface.

The CLI is a thin client over the HTTP service: by default it mounts the
FastAPI app in-process (no socket), and with --server it talks to a
running instance instead. All computation happens behind the service
routes; the CLI renders payloads and writes report files.

Exit codes: 0 success, 1 check or numeric failure, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import httpx

from comprel import __version__
from comprel.errors import InputError, NumericError
from comprel.experiments import MODEL_KINDS
from comprel.reporting import (
    fmt_pct,
    report_files,
    report_text,
    stats_files,
    stats_text,
    write_files,
)


class ServiceClient:
    """POSTs to a remote server or to the in-process app."""

    def __init__(self, server: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from comprel.service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> tuple[int, dict]:
        response = self._client.post(path, json=payload)
        return response.status_code, response.json()


def _fail(status: int, body: dict) -> int:
    detail = body.get("detail", body)
    print(f"error: {detail}", file=sys.stderr)
    return 2 if status in (400, 422) else 1


def cmd_stats(args: argparse.Namespace) -> int:
    status, body = ServiceClient(args.server).post(
        "/stats", {"data_dir": args.data_dir}
    )
    if status != 200:
        return _fail(status, body)
    payload = body["payload"]
    write_files(args.out, stats_files(payload))
    print(stats_text(payload), end="")
    return 0


def _train_payload(args: argparse.Namespace) -> dict:
    payload: dict = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise InputError(f"config file not found: {path}")
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: invalid JSON: {exc}") from exc
        if not isinstance(payload, dict):
            raise InputError(f"{path}: config must be a JSON object")
    overrides = {
        "data_dir": args.data_dir,
        "embeddings": args.embeddings,
        "out_dir": args.out,
        "seed": args.seed,
        "task": args.task,
        "model": args.model,
        "direction": args.direction,
        "main_task": args.main_task,
        "include_test": args.include_test,
    }
    for key, value in overrides.items():
        if value is not None:
            payload[key] = value
    return payload


def cmd_train(args: argparse.Namespace) -> int:
    status, body = ServiceClient(args.server).post("/train", _train_payload(args))
    if status != 200:
        return _fail(status, body)
    print(f"bundle: {body['bundle']}")
    print(
        f"model {body['model']}, tasks {'+'.join(body['tasks'])}, "
        f"best epoch {body['best_epoch']}, stopped after "
        f"{body['stopped_epoch']} ({body['stop_reason']})"
    )
    for task, by_split in body["scores"].items():
        for split_name, sc in by_split.items():
            print(
                f"  {task}/{split_name}: accuracy {fmt_pct(sc['accuracy'])}%, "
                f"macro-F1 {fmt_pct(sc['macro_f1'])}% "
                f"over {len(sc['macro_subset'])} labels"
            )
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    status, body = ServiceClient(args.server).post(
        "/report", {"bundles": args.bundles}
    )
    if status != 200:
        return _fail(status, body)
    payload = body["payload"]
    write_files(args.out, report_files(payload))
    print(report_text(payload), end="")
    return 0


def cmd_selfcheck(args: argparse.Namespace) -> int:
    status, body = ServiceClient(args.server).post("/selfcheck", {})
    if status != 200:
        return _fail(status, body)
    for check in body["checks"]:
        flag = "ok" if check["passed"] else "FAIL"
        print(f"[{flag:4s}] {check['name']}: {check['detail']}")
    if body["passed"]:
        print("selfcheck: PASS")
        return 0
    print("selfcheck: FAIL")
    return 1


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    uvicorn.run("comprel.service.app:app", host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="comprel",
        description="Train and analyze compound relation classifiers.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument(
        "--server",
        default=None,
        help="base URL of a running service; default runs in-process",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    stats = sub.add_parser("stats", help="corpus characteristics and analyses")
    stats.add_argument("--data-dir", required=True, dest="data_dir")
    stats.add_argument("--out", default="reports")
    stats.set_defaults(func=cmd_stats)

    train = sub.add_parser("train", help="train one model, write its bundle")
    train.add_argument("--config", help="JSON config file; flags override it")
    train.add_argument("--data-dir", dest="data_dir")
    train.add_argument("--embeddings")
    train.add_argument("--out", help="bundle root directory")
    train.add_argument("--seed", type=int)
    train.add_argument("--task", choices=("A", "B"))
    train.add_argument("--model", choices=MODEL_KINDS)
    train.add_argument("--direction", choices=("A2B", "B2A"))
    train.add_argument("--main-task", choices=("A", "B"), dest="main_task")
    train.add_argument(
        "--include-test",
        action="store_true",
        default=None,
        dest="include_test",
        help="also score and emit test-split predictions",
    )
    train.set_defaults(func=cmd_train)

    report = sub.add_parser("report", help="compare result bundles")
    report.add_argument("bundles", nargs="+")
    report.add_argument("--out", default="reports")
    report.set_defaults(func=cmd_report)

    selfcheck = sub.add_parser("selfcheck", help="verify numerics and metrics")
    selfcheck.set_defaults(func=cmd_selfcheck)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: cannot reach server: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

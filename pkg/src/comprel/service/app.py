"""FastAPI application exposing stats, train, report, and selfcheck."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from comprel import __version__, selfcheck
from comprel.corpus import load_split
from comprel.errors import InputError, NumericError
from comprel.experiments import SPLIT_NAMES, config_from_dict, run_experiment
from comprel.reporting import report_payload, stats_payload
from comprel.service import schemas


def create_app() -> FastAPI:
    app = FastAPI(title="comprel", version=__version__)

    @app.exception_handler(InputError)
    async def input_error(request: Request, exc: InputError) -> JSONResponse:
        return JSONResponse(status_code=400, content={"detail": str(exc)})

    @app.exception_handler(NumericError)
    async def numeric_error(request: Request, exc: NumericError) -> JSONResponse:
        return JSONResponse(status_code=500, content={"detail": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health() -> schemas.HealthResponse:
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/stats", response_model=schemas.StatsResponse)
    def stats(request: schemas.StatsRequest) -> schemas.StatsResponse:
        data_dir = Path(request.data_dir)
        splits = {
            name: load_split(data_dir / f"{name}.tsv", name) for name in SPLIT_NAMES
        }
        return schemas.StatsResponse(payload=stats_payload(splits))

    @app.post("/train", response_model=schemas.TrainResponse)
    def train(request: schemas.TrainRequest) -> schemas.TrainResponse:
        cfg = config_from_dict(request.model_dump())
        result = run_experiment(cfg)
        return schemas.TrainResponse(
            bundle=str(result.bundle),
            bundle_id=result.bundle_id,
            model=cfg.model,
            tasks=cfg.tasks(),
            best_epoch=result.train_log.best_epoch,
            stopped_epoch=result.train_log.stopped_epoch,
            stop_reason=result.train_log.stop_reason,
            scores=result.scores,
        )

    @app.post("/report", response_model=schemas.ReportResponse)
    def report(request: schemas.ReportRequest) -> schemas.ReportResponse:
        return schemas.ReportResponse(payload=report_payload(request.bundles))

    @app.post("/selfcheck", response_model=schemas.SelfcheckResponse)
    def run_selfcheck() -> schemas.SelfcheckResponse:
        checks = selfcheck.run_all()
        return schemas.SelfcheckResponse(
            passed=all(c.passed for c in checks),
            checks=[
                schemas.CheckBody(name=c.name, passed=c.passed, detail=c.detail)
                for c in checks
            ],
        )

    return app


app = create_app()

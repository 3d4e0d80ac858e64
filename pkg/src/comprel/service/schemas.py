"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class StrictModel(BaseModel):
    """Unknown request fields are input errors, not silent no-ops."""

    model_config = ConfigDict(extra="forbid")


class HealthResponse(BaseModel):
    status: str
    version: str


class StatsRequest(StrictModel):
    data_dir: str


class StatsResponse(BaseModel):
    payload: dict


class TrainParamsBody(StrictModel):
    batch_size: int = 5
    max_epochs: int = 50
    patience: int = 5
    eta: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8


class TrainRequest(StrictModel):
    data_dir: str
    embeddings: str
    out_dir: str = "runs"
    task: str = "A"
    model: str = "stl"
    direction: str = "A2B"
    main_task: str = "A"
    aux_weight: float = 1.0
    include_test: bool = False
    seed: int = 0
    train: TrainParamsBody = Field(default_factory=TrainParamsBody)


class TrainResponse(BaseModel):
    bundle: str
    bundle_id: str
    model: str
    tasks: list[str]
    best_epoch: int
    stopped_epoch: int
    stop_reason: str
    scores: dict


class ReportRequest(StrictModel):
    bundles: list[str]


class ReportResponse(BaseModel):
    payload: dict


class CheckBody(BaseModel):
    name: str
    passed: bool
    detail: str


class SelfcheckResponse(BaseModel):
    passed: bool
    checks: list[CheckBody]

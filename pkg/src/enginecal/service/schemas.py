"""Request and response models of the calibration service."""
from __future__ import annotations

from typing import Any, Literal, Optional

from pydantic import BaseModel, Field


class Health(BaseModel):
    status: Literal["ok"] = "ok"
    version: str


class CampaignRequest(BaseModel):
    config: str | dict[str, Any] = Field(description="bundled config name, file path, or inline document")
    mode: Literal["adaptive", "baseline"] = "adaptive"
    seed: Optional[int] = None
    budget: Optional[int] = Field(None, ge=0)
    out_dir: Optional[str] = None


class ResumeRequest(BaseModel):
    out_dir: str
    budget: Optional[int] = Field(None, ge=0)
    seed: Optional[int] = None


class CampaignResponse(BaseModel):
    id: str
    status: Literal["success", "budget_exhausted", "infeasible"]
    exit_code: int
    evaluations: int
    out_dir: Optional[str]
    report: dict[str, Any]


class SolutionResponse(BaseModel):
    id: str
    solution: Optional[dict[str, Any]]


class ExportRequest(BaseModel):
    run_dir: str
    out_dir: str
    against: Optional[str] = None


class ExportResponse(BaseModel):
    files: list[str]


class VerifyRequest(BaseModel):
    run_dir: str


class VerifyResponse(BaseModel):
    ok: bool
    reason: Optional[str]
    complete: Optional[bool] = None
    ilp: Optional[dict[str, Any]]
    map: Optional[dict[str, Any]]


class EvaluateRequest(BaseModel):
    actuators: dict[str, float] = Field(description="physical actuator values by name; missing ones sit mid-interval")
    engine: str = "engine_default.yaml"


class EvaluateResponse(BaseModel):
    actuators: dict[str, float]
    measurands: dict[str, float]
    noncritical: bool


class LimitsResponse(BaseModel):
    norm: str
    limits_mg_per_km: dict[str, Optional[float]]
    units: dict[str, str]

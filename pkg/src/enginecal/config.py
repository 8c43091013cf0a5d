"""Campaign configuration document (YAML or JSON), versioned."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from enginecal.engine import ACTUATOR_NAMES, MEASURAND_NAMES
from enginecal.resources import resolve

CAMPAIGN_SCHEMA_VERSION = 1

Interval = Union[float, tuple[float, float]]


class PhaseConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    # actuator intervals for this run; a scalar pins the actuator (static)
    intervals: dict[str, Interval] = Field(default_factory=dict)
    budget: Optional[int] = Field(None, ge=0)  # oracle evaluations for this phase
    emissions: bool = True  # enforce emission rows in this phase's solves
    stop_on_solution: bool = True

    @field_validator("intervals")
    @classmethod
    def _names(cls, v):
        bad = [k for k in v if k not in ACTUATOR_NAMES]
        if bad:
            raise ValueError(f"unknown actuator(s) {bad}")
        return v


class CampaignConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    schema_version: Literal[1] = CAMPAIGN_SCHEMA_VERSION
    name: str = "campaign"
    engine: str = "engine_default.yaml"
    phases: list[PhaseConfig] = Field(default_factory=lambda: [PhaseConfig(name="full")])

    k: int = Field(8, ge=2)
    ell: int = Field(12, ge=2)
    freq_range: tuple[float, float] = (1000.0, 2600.0)
    torq_range: tuple[float, float] = (0.0, 250.0)

    divisions: int = Field(2, ge=1)
    min_edge: float = Field(2.0 ** -10, gt=0, le=1)
    relevance_fraction: float = Field(0.01, ge=0)
    refinement_fraction: float = Field(0.05, gt=0)
    refinement_measurands: Optional[list[str]] = None  # None: all
    compressor_c: float = Field(0.5, ge=0)
    min_gap: int = Field(4, ge=1)
    safety_margin: float = Field(0.05, ge=0, lt=0.5)
    horizon: int = Field(3, ge=1)
    cross_delta: float = Field(0.02, gt=0, lt=0.5)

    delta: dict[str, float] = Field(default_factory=dict)  # drivability bounds, physical units
    norm: str = "E5a"
    limit_scale: float = Field(1.0, gt=0)
    limits: Optional[dict[str, float]] = None  # mg/km by table pollutant; overrides the norm
    pollutants: dict[str, str] = Field(default_factory=lambda: {"CO": "co", "HC": "hc", "NOx": "nox"})
    cycle: str = "nedc_style.csv"
    vehicle: dict[str, Union[float, list[float]]] = Field(default_factory=dict)

    budget: int = Field(100_000, ge=0)  # total oracle evaluations
    solve_every: int = Field(10, ge=1)  # plans between cleaning + selection rounds
    ilp_max_nodes: int = Field(3000, ge=1)
    ilp_time_limit: Optional[float] = Field(None, gt=0)
    seed: int = 0

    @field_validator("delta")
    @classmethod
    def _delta(cls, v):
        bad = [k for k in v if k not in ACTUATOR_NAMES]
        if bad:
            raise ValueError(f"unknown actuator(s) in delta: {bad}")
        if any(d <= 0 for d in v.values()):
            raise ValueError("drivability bounds must be positive")
        return v

    @field_validator("pollutants")
    @classmethod
    def _pollutants(cls, v):
        bad = [m for m in v.values() if m not in MEASURAND_NAMES]
        if bad:
            raise ValueError(f"unknown measurand(s) {bad}")
        return v

    @field_validator("refinement_measurands")
    @classmethod
    def _refine(cls, v):
        if v is not None and any(m not in MEASURAND_NAMES for m in v):
            raise ValueError("unknown measurand in refinement_measurands")
        return v

    @model_validator(mode="after")
    def _ranges(self):
        for r in (self.freq_range, self.torq_range):
            if not r[0] < r[1]:
                raise ValueError("operation field ranges need lo < hi")
        if not self.phases:
            raise ValueError("at least one phase is required")
        return self

    def dump(self) -> dict:
        return self.model_dump(mode="json")


def load_campaign_config(path: str | Path, **overrides) -> CampaignConfig:
    path = resolve(path, "configs")
    text = Path(path).read_text()
    data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
    data.update({k: v for k, v in overrides.items() if v is not None})
    return CampaignConfig.model_validate(data)

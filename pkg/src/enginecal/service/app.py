"""HTTP front end of the calibration package."""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import FastAPI, HTTPException

from enginecal import __version__
from enginecal.campaign import CampaignResult
from enginecal.engine import ACTUATOR_NAMES, MEASURAND_NAMES, DomainError, EngineOracle, load_engine_config
from enginecal.ilp.limits import load_limit_table
from enginecal.resources import resolve
from enginecal.runs import export_run, verify_run
from enginecal.service import schemas as s
from enginecal.service.jobs import JobStore, make_config


def _plain(obj):
    """JSON-safe copy (numpy scalars and arrays become Python values)."""
    def default(o):
        if isinstance(o, np.generic):
            return o.item()
        if isinstance(o, np.ndarray):
            return o.tolist()
        raise TypeError(f"not serialisable: {type(o).__name__}")
    return json.loads(json.dumps(obj, default=default))


def _response(job: str, res: CampaignResult, out_dir: Optional[str]) -> s.CampaignResponse:
    return s.CampaignResponse(id=job, status=res.status, exit_code=res.exit_code,
                              evaluations=res.report["evaluations"], out_dir=out_dir,
                              report=_plain(res.report))


def create_app(store: Optional[JobStore] = None) -> FastAPI:
    app = FastAPI(title="enginecal", version=__version__)
    jobs = store or JobStore()

    @app.get("/health", response_model=s.Health)
    def health():
        return s.Health(version=__version__)

    @app.get("/limits/{norm}", response_model=s.LimitsResponse)
    def limits(norm: str):
        table = load_limit_table()
        if norm not in table or norm == "_units":
            raise HTTPException(404, f"unknown norm {norm!r}")
        return s.LimitsResponse(norm=norm, limits_mg_per_km=table[norm], units=table["_units"])

    @app.post("/evaluate", response_model=s.EvaluateResponse)
    def evaluate(req: s.EvaluateRequest):
        try:
            oracle = EngineOracle(load_engine_config(resolve(req.engine, "configs")))
        except FileNotFoundError as e:
            raise HTTPException(404, str(e))
        unknown = sorted(set(req.actuators) - set(ACTUATOR_NAMES))
        if unknown:
            raise HTTPException(422, f"unknown actuators {unknown}")
        u = oracle.center()
        for name, val in req.actuators.items():
            u[ACTUATOR_NAMES.index(name)] = val
        try:
            y = oracle.evaluate(u)
        except DomainError as e:
            raise HTTPException(422, str(e))
        return s.EvaluateResponse(actuators=dict(zip(ACTUATOR_NAMES, map(float, u))),
                                  measurands=dict(zip(MEASURAND_NAMES, map(float, y))),
                                  noncritical=oracle.in_range(y))

    @app.post("/campaigns", response_model=s.CampaignResponse)
    def campaigns(req: s.CampaignRequest):
        try:
            cfg = make_config(req.config, req.seed, req.budget)
        except FileNotFoundError as e:
            raise HTTPException(404, str(e))
        except ValueError as e:
            raise HTTPException(422, str(e))
        job, res = jobs.run(cfg, req.mode, req.out_dir)
        return _response(job, res, req.out_dir)

    @app.post("/campaigns/resume", response_model=s.CampaignResponse)
    def resume(req: s.ResumeRequest):
        try:
            if req.seed is not None:
                stored = json.loads((Path(req.out_dir) / "config.json").read_text())["seed"]
                if stored != req.seed:
                    raise HTTPException(409, f"run was started with seed {stored}, not {req.seed}")
            job, res = jobs.resume(req.out_dir, req.budget)
        except FileNotFoundError as e:
            raise HTTPException(404, str(e))
        except ValueError as e:
            raise HTTPException(422, str(e))
        return _response(job, res, req.out_dir)

    @app.get("/campaigns/{job}", response_model=s.CampaignResponse)
    def campaign(job: str):
        try:
            res, out_dir = jobs.get(job)
        except KeyError:
            raise HTTPException(404, f"no campaign {job!r}")
        return _response(job, res, out_dir)

    @app.get("/campaigns/{job}/solution", response_model=s.SolutionResponse)
    def solution(job: str):
        try:
            res, _ = jobs.get(job)
        except KeyError:
            raise HTTPException(404, f"no campaign {job!r}")
        return s.SolutionResponse(id=job, solution=None if res.solution is None else res.solution.to_dict())

    @app.post("/export", response_model=s.ExportResponse)
    def export(req: s.ExportRequest):
        try:
            return s.ExportResponse(files=export_run(req.run_dir, req.out_dir, req.against))
        except FileNotFoundError as e:
            raise HTTPException(404, str(e))
        except ValueError as e:
            raise HTTPException(422, str(e))

    @app.post("/verify", response_model=s.VerifyResponse)
    def verify(req: s.VerifyRequest):
        try:
            return s.VerifyResponse(**_plain(verify_run(req.run_dir)))
        except FileNotFoundError as e:
            raise HTTPException(404, str(e))

    return app


app = create_app()

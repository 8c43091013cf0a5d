"""Operations on persisted run directories (verify, export)."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from enginecal.config import CampaignConfig
from enginecal.engine import MEASURAND_NAMES
from enginecal.export import export_maps, export_ratios
from enginecal.ilp.model import Assignment, IlpInstance, verify_map, verify_solution
from enginecal.opfield import DrivingCycleWeights, KOperationField, VehicleParams, cycle_weights, load_profile
from enginecal.resources import resolve
from enginecal.solution import SolutionMap


@dataclass
class RunFiles:
    config: CampaignConfig
    report: dict
    instance: Optional[IlpInstance]
    assignment: Optional[Assignment]
    solution: Optional[SolutionMap]

    def field(self) -> KOperationField:
        c = self.config
        return KOperationField(c.k, tuple(c.freq_range), tuple(c.torq_range))

    def weights(self) -> DrivingCycleWeights:
        vp = dict(self.config.vehicle)
        if "gear_ratios" in vp:
            vp["gear_ratios"] = tuple(vp["gear_ratios"])
        return cycle_weights(load_profile(resolve(self.config.cycle, "profiles")), self.field(),
                             VehicleParams(**vp))


def _read(path: Path) -> Optional[dict]:
    return json.loads(path.read_text()) if path.exists() else None


def load_run(run_dir: str | Path) -> RunFiles:
    d = Path(run_dir)
    cfg = _read(d / "config.json")
    if cfg is None:
        raise FileNotFoundError(f"{d} is not a run directory (no config.json)")
    inst = _read(d / "instance.json")
    res = _read(d / "ilp_result.json")
    sol = _read(d / "solution.json")
    assignment = None
    if res is not None and res.get("assignment") is not None:
        a = res["assignment"]
        assignment = Assignment(np.array(a["points"], dtype=np.int64), np.array(a["cells"], dtype=np.int64))
    return RunFiles(CampaignConfig.model_validate(cfg), _read(d / "report.json") or {},
                    IlpInstance.from_dict(inst) if inst is not None else None, assignment,
                    SolutionMap.from_dict(sol) if sol is not None else None)


def verify_run(run_dir: str | Path) -> dict:
    """Re-check the stored ILP assignment and the stored (gap-filled) map."""
    run = load_run(run_dir)
    if run.instance is None or run.assignment is None:
        return {"ok": False, "reason": "run has no ILP solution", "ilp": None, "map": None}
    ilp = verify_solution(run.assignment, run.instance)
    out = {"ok": ilp.ok, "reason": None, "ilp": ilp.to_dict(), "map": None, "complete": None}
    if run.solution is not None:
        cols = [MEASURAND_NAMES.index(p) for p in run.instance.pollutants]
        mp = verify_map(run.solution, run.instance, cols)
        out["map"] = mp.to_dict()
        out["complete"] = run.solution.complete
        out["ok"] = out["ok"] and mp.ok
    if not out["ok"]:
        out["reason"] = "constraint violation"
    return out


def export_run(run_dir: str | Path, out_dir: str | Path, against: str | Path | None = None) -> list[str]:
    run = load_run(run_dir)
    if run.solution is None:
        raise ValueError(f"{run_dir} has no solution map to export")
    fld = run.field()
    files = export_maps(run.solution, fld, run.weights(), out_dir)
    if against is not None:
        other = load_run(against)
        if other.solution is None:
            raise ValueError(f"{against} has no solution map to compare with")
        files += export_ratios(run.solution, other.solution, fld, out_dir,
                               label=f"{Path(run_dir).name}/{Path(against).name}")
    return [str(p) for p in files]

"""Calibration campaign: measure, clean, select, fill gaps, repeat.

Each round executes ``solve_every`` measurement plans. Asymmetric refinement
happens during measurement whenever a stored point undercuts the smallest
pollutant value of its operation stack; afterwards the data set is
compressed, newly kept points are checked against a local quadratic fit
(symmetric refinement), and the selection ILP is solved and gap-filled. The
campaign ends when a complete, verified map exists or the budget runs out.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from enginecal.cleaning import compress
from enginecal.config import CampaignConfig
from enginecal.domain import ActuatorDomain
from enginecal.engine import ACTUATOR_NAMES, MEASURAND_NAMES, EngineOracle, load_engine_config
from enginecal.grid import AdaptiveGrid
from enginecal.ilp import build_instance, norm_limits, solve, to_solution_map, verify_solution
from enginecal.ilp.bnb import IlpResult
from enginecal.ilp.limits import cycle_budget
from enginecal.ilp.model import IlpInstance, VerificationReport, verify_map
from enginecal.interpolation import (cross_measure_and_refine, fill_gaps, fit_at,
                                     n_interpolation_points)
from enginecal.measurement import Dataset, MeasurementParams, execute_plan
from enginecal.opfield import (DrivingCycleWeights, KOperationField, VehicleParams, assign_stacks,
                               cycle_weights, load_profile)
from enginecal.planner import MeasurementPlan, build_ramp, dwell_plan, make_plan
from enginecal.resources import resolve
from enginecal.solution import SolutionMap

log = logging.getLogger(__name__)

SUCCESS, BUDGET, INFEASIBLE = "success", "budget_exhausted", "infeasible"
SNAPSHOT_VERSION = 1
FREQ = ACTUATOR_NAMES.index("RF")
TORQ = MEASURAND_NAMES.index("torque")
FUEL = MEASURAND_NAMES.index("fuel_mass_flow")


@dataclass
class Selection:
    instance: IlpInstance
    result: IlpResult
    solution: Optional[SolutionMap]  # gap-filled
    ilp_check: Optional[VerificationReport]
    map_check: Optional[VerificationReport]
    left_empty: list[tuple[int, int]]
    reduced_size: int

    @property
    def done(self) -> bool:
        return (self.result.solved and self.solution is not None and not self.left_empty
                and self.ilp_check is not None and self.ilp_check.ok
                and self.map_check is not None and self.map_check.ok)

    def summary(self) -> dict:
        chk = self.map_check or self.ilp_check
        return {
            "ilp_status": self.result.status,
            "objective": self.result.objective,
            "bound": None if not np.isfinite(self.result.bound) else self.result.bound,
            "nodes": self.result.nodes,
            "candidates": self.instance.n_points,
            "conflicts": int(len(self.instance.conflicts)),
            "pruned": len(self.instance.pruned),
            "reduced_points": self.reduced_size,
            "violating": self.result.violating,
            "complete": self.done,
            "empty_cells": [list(c) for c in self.left_empty],
            "synthetic_cells": [] if self.solution is None else [list(c) for c in self.solution.synthetic_cells],
            "slack": None if chk is None else chk.slack,
            "cycle_mg_per_km": None if chk is None else chk.cycle_mg_per_km,
            "violated_rows": None if chk is None else chk.violated_rows,
        }


@dataclass
class CampaignResult:
    status: str
    solution: Optional[SolutionMap]
    dataset: Dataset
    report: dict
    selection: Optional[Selection] = None
    weights: Optional[DrivingCycleWeights] = None
    field: Optional[KOperationField] = None
    grid: Optional[AdaptiveGrid] = None
    domain: Optional[ActuatorDomain] = None

    @property
    def exit_code(self) -> int:
        return {SUCCESS: 0, BUDGET: 2, INFEASIBLE: 3}[self.status]


def solution_checksum(solution: Optional[SolutionMap]) -> Optional[str]:
    if solution is None:
        return None
    return hashlib.sha256(json.dumps(solution.to_dict(), sort_keys=True).encode()).hexdigest()


class Campaign:
    def __init__(self, config: CampaignConfig, out_dir: str | Path | None = None,
                 dataset: Optional[Dataset] = None):
        self.config = config
        self.engine_config = load_engine_config(resolve(config.engine, "configs"))
        self.profile = load_profile(resolve(config.cycle, "profiles"))
        vp = dict(config.vehicle)
        if "gear_ratios" in vp:
            vp["gear_ratios"] = tuple(vp["gear_ratios"])
        self.vehicle = VehicleParams(**vp)
        self.field0 = KOperationField(config.k, tuple(config.freq_range), tuple(config.torq_range))
        self.weights = cycle_weights(self.profile, self.field0, self.vehicle)
        self.meas = list(self.engine_config.measurands)
        self.y_lo = np.array([ms.noncritical[0] for ms in self.meas])
        self.y_hi = np.array([ms.noncritical[1] for ms in self.meas])
        widths = self.y_hi - self.y_lo
        self.relevance = config.relevance_fraction * widths
        refine = config.refinement_fraction * widths
        if config.refinement_measurands is not None:
            mask = np.array([m in config.refinement_measurands for m in MEASURAND_NAMES])
            refine = np.where(mask, refine, np.inf)
        self.refine_thresholds = refine
        self.latency = np.array([ms.latency for ms in self.meas])
        self.delta = np.array([config.delta.get(a, np.inf) for a in ACTUATOR_NAMES], dtype=float)

        table = config.limits if config.limits is not None else norm_limits(config.norm)
        self.limits: dict[str, float] = {}
        for pol, meas in config.pollutants.items():
            if pol not in table:
                raise ValueError(f"norm {config.norm} has no limit for {pol}")
            self.limits[meas] = float(table[pol]) * config.limit_scale
        self.pcols = {meas: MEASURAND_NAMES.index(meas) for meas in self.limits}
        self.e_bar = {meas: float(self.y_hi[c]) for meas, c in self.pcols.items()}

        self.dataset = dataset if dataset is not None else Dataset(len(ACTUATOR_NAMES), len(MEASURAND_NAMES))
        self.seeded_points = len(self.dataset)
        self.rng = np.random.default_rng(config.seed)
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.counters = {"plans": 0, "aborted_plans": 0, "rerouted_plans": 0, "cross_measurements": 0,
                         "cross_evaluations": 0, "splits_symmetric": 0, "splits_asymmetric": 0,
                         "compressor_removals": 0, "selections": 0}
        self.reduced: set[int] = set(range(len(self.dataset)))
        self.pending: list[int] = []
        self.phase_records: list[dict] = []
        self.evals_done = 0
        self.phase_index = 0
        self.selection: Optional[Selection] = None
        self._stack_min: dict[tuple[int, int], np.ndarray] = {}
        self._logged = 0
        for i in range(len(self.dataset)):
            self._update_stack_min(i)

    # phase state ------------------------------------------------------------------
    def _enter_phase(self, i: int) -> None:
        self.phase_index = i
        phase = self.config.phases[i]
        self.oracle = EngineOracle(self.engine_config.with_intervals(phase.intervals))
        self.domain = ActuatorDomain.from_oracle(self.oracle)
        if self.domain.dim == 0:
            raise ValueError(f"phase {phase.name!r} has no dynamic actuator")
        dim = self.domain.dim
        self.grid = AdaptiveGrid(np.zeros(dim), np.ones(dim), self.config.divisions, self.config.min_edge)
        U = self.dataset.U
        inside = np.flatnonzero(self.domain.contains(U)) if len(U) else np.empty(0, dtype=np.int64)
        self.grid_points = [int(q) for q in inside]
        if len(inside):
            self.grid.add_points(self.domain.to_grid(U[inside]))
        self.last_point: Optional[np.ndarray] = None
        self.phase_plans = 0
        self.phase_first_solve: Optional[int] = None
        self.params = MeasurementParams(self.relevance, self.config.min_gap, self.config.safety_margin,
                                        self.config.horizon, self.latency)

    @property
    def evaluations(self) -> int:
        return self.evals_done + (self.oracle.evaluations if hasattr(self, "oracle") else 0)

    # step VI ---------------------------------------------------------------------------
    def _cell(self, u: np.ndarray, y: np.ndarray) -> Optional[tuple[int, int]]:
        f, t = self.field0.cell_of(np.array([u[FREQ]]), np.array([y[TORQ]]))
        return None if f[0] < 0 else (int(f[0]), int(t[0]))

    def _update_stack_min(self, idx: int) -> Optional[tuple[tuple[int, int], int]]:
        """Record point idx in its stack minimum; returns (cell, pollutant column)
        when it undercuts an existing stack minimum."""
        if not self.pcols:
            return None
        u, y = self.dataset.point(idx)
        cell = self._cell(u, y)
        if cell is None:
            return None
        cols = list(self.pcols.values())
        vals = y[cols]
        cur = self._stack_min.get(cell)
        event = None
        if cur is None:
            self._stack_min[cell] = vals.copy()
        else:
            below = np.flatnonzero(vals < cur)
            if len(below):
                event = (cell, cols[int(below[0])])
            self._stack_min[cell] = np.minimum(cur, vals)
        return event

    def _on_store(self, idx: int) -> None:
        event = self._update_stack_min(idx)
        if event is None:
            return
        u, y = self.dataset.point(idx)
        cm = cross_measure_and_refine(self.grid, self.oracle, self.domain, u, y, event[1],
                                      self.config.cross_delta)
        self.counters["cross_measurements"] += 1
        self.counters["cross_evaluations"] += cm.evaluations
        self.counters["splits_asymmetric"] += int(cm.split)

    # round ------------------------------------------------------------------------------
    def _measure_once(self) -> None:
        plan = make_plan(self.grid, self.last_point, self.config.ell, self.rng)
        if plan.s == 0:
            plan = dwell_plan(self.grid, plan.waypoints[0], self.config.ell, self.rng)
        res = execute_plan(plan, self.oracle, self.dataset, self.params, self.domain, self._on_store)
        new = res.stored
        if new:
            self.pending.extend(new)
            self.grid_points.extend(new)
            self.grid.add_points(self.domain.to_grid(self.dataset.U[new]))
        if res.aborted:
            self.counters["aborted_plans"] += 1
            if any(o.reason == "predicted" for o in res.outcomes):
                self.counters["rerouted_plans"] += 1
        self.last_point = None if res.last_valid is None else self.domain.to_grid(res.last_valid)
        self.counters["plans"] += 1
        self.phase_plans += 1
        self._append_log()

    def _clean(self) -> None:
        U = self.dataset.U
        inside_red = [q for q in sorted(self.reduced) if self.domain.contains(U[q])[0]]
        cand = np.array(sorted(set(inside_red) | set(self.pending)), dtype=np.int64)
        fresh = set(self.pending)
        self.pending = []
        if len(cand) == 0:
            return
        Z = self.domain.to_grid(U[cand])
        res = compress(Z, self.grid, self.config.compressor_c, self.dataset.seq[cand])
        kept = cand[res.kept]
        self.reduced = (self.reduced - set(cand.tolist())) | set(kept.tolist())
        self.counters["compressor_removals"] += len(res.removed)
        # step V on newly kept points
        Zr = Z[res.kept]
        Yr = self.dataset.Y[kept]
        N = n_interpolation_points(self.domain.dim)
        if len(kept) - 1 < N:
            return
        for j, q in enumerate(kept):
            if int(q) not in fresh:
                continue
            fit = fit_at(Zr, Yr, j)
            if np.any(fit.residual > self.refine_thresholds):
                if self.grid.split_symmetric(self.grid.locate(Zr[j]).id):
                    self.counters["splits_symmetric"] += 1

    def select(self, emissions: bool = True) -> Selection:
        red = np.array(sorted(self.reduced), dtype=np.int64)
        U_red = self.dataset.U[red] if len(red) else np.empty((0, self.dataset.m))
        Y_red = self.dataset.Y[red] if len(red) else np.empty((0, self.dataset.n))
        fld = assign_stacks(U_red[:, FREQ], Y_red[:, TORQ], self.field0)
        limits = self.limits if emissions else {}
        pcols = self.pcols if emissions else {}
        inst = build_instance(fld, U_red, Y_red, self.weights, self.delta, limits, pcols, FUEL,
                              self.e_bar)
        result = solve(inst, time_limit=self.config.ilp_time_limit, max_nodes=self.config.ilp_max_nodes)
        sel = Selection(inst, result, None, None, None, [(f, t) for f in range(self.config.k)
                                                         for t in range(self.config.k)], len(red))
        if result.solved:
            ilp_map = to_solution_map(result.assignment, inst, U_red, Y_red)
            filled, left = fill_gaps(ilp_map, fld, U_red, Y_red, FREQ, TORQ,
                                     lo=self.domain.lo, hi=self.domain.hi)
            sel.solution = filled
            sel.left_empty = left
            sel.ilp_check = verify_solution(result.assignment, inst)
            sel.map_check = verify_map(filled, inst, list(pcols.values()))
        self.counters["selections"] += 1
        self.selection = sel
        self.fld = fld
        return sel

    def infeasible_limits(self) -> list[str]:
        """Pollutants whose limit cannot be met even at the smallest noncritical rate."""
        out = []
        total = float(self.weights.omega.sum())
        for meas, lim in self.limits.items():
            if cycle_budget(lim, self.weights.distance_km) <= total * self.y_lo[self.pcols[meas]]:
                out.append(meas)
        return out

    def unreachable_limits(self) -> list[str]:
        """Pollutants whose limit fails even if every cell ran at the smallest
        rate measured anywhere. Cell-wise minima are no proof (a cell may hold
        cleaner, unmeasured settings), so only this global bound is trusted."""
        if len(self.dataset) == 0:
            return []
        Y = self.dataset.Y
        total = float(self.weights.omega.sum())
        out = []
        for meas, lim in self.limits.items():
            floor = max(float(Y[:, self.pcols[meas]].min()), 0.0)
            if total * floor > cycle_budget(lim, self.weights.distance_km):
                out.append(meas)
        return out

    def _diagnosis(self) -> list[str]:
        sel = self.selection
        if sel is not None and sel.result.status == "infeasible":
            return list(sel.result.violating)
        return []

    # driver --------------------------------------------------------------------------------
    def run(self) -> CampaignResult:
        self._prepare_out_dir(fresh=True)
        bad = self.infeasible_limits()
        if bad:
            return self._finish(INFEASIBLE, violating=bad)
        self._enter_phase(0)
        return self._loop()

    def _loop(self) -> CampaignResult:
        cfg = self.config
        while True:
            phase = cfg.phases[self.phase_index]
            last = self.phase_index == len(cfg.phases) - 1
            done = False
            fresh_selection = False
            while True:
                if self.evaluations >= cfg.budget:
                    break
                if phase.budget is not None and self.oracle.evaluations >= phase.budget:
                    break
                self._measure_once()
                fresh_selection = False
                if self.phase_plans % cfg.solve_every == 0:
                    done = self._round(phase)
                    fresh_selection = True
                    if done and phase.stop_on_solution:
                        break
            if not fresh_selection:
                # snapshot first: a resumed run must continue from the state an
                # uninterrupted run had here, before this unscheduled round
                self._snapshot()
                done = self._round(phase, snapshot=False)
            self.phase_records.append({
                "name": phase.name, "evaluations": self.oracle.evaluations, "plans": self.phase_plans,
                "dataset_size": len(self.dataset), "first_solve_dataset_size": self.phase_first_solve,
                "dynamic": [ACTUATOR_NAMES[i] for i in self.domain.dynamic],
                "selection": self.selection.summary() if self.selection else None,
            })
            self.evals_done += self.oracle.evaluations
            self.oracle.evaluations = 0
            exhausted = self.evaluations >= cfg.budget
            if last or exhausted:
                if done:
                    return self._finish(SUCCESS)
                # an infeasible selection on partial data only means more data is needed,
                # unless even an optimistic completion cannot meet the limits
                hopeless = self.unreachable_limits() if phase.emissions else []
                if hopeless:
                    return self._finish(INFEASIBLE, violating=hopeless)
                return self._finish(BUDGET, violating=self._diagnosis())
            self._enter_phase(self.phase_index + 1)
            self._snapshot()

    def _round(self, phase, snapshot: bool = True) -> bool:
        self._clean()
        if self.phase_first_solve is None:
            self.phase_first_solve = len(self.dataset)
        sel = self.select(phase.emissions)
        log.info("phase %s plan %d: evals=%d |D|=%d |Dred|=%d ilp=%s complete=%s", phase.name,
                 self.phase_plans, self.evaluations, len(self.dataset), sel.reduced_size,
                 sel.result.status, sel.done)
        if snapshot:
            self._snapshot()
        return sel.done

    # reporting -------------------------------------------------------------------------------
    def report(self, status: str, violating: Optional[list[str]] = None) -> dict:
        sel = self.selection
        sol = sel.solution if sel else None
        fuel_kg = None
        if sol is not None:
            fm = sol.measurand_map(FUEL)
            fuel_kg = float(np.nansum(self.weights.omega * fm) / 3600.0)
        return {
            "status": status,
            "name": self.config.name,
            "seed": self.config.seed,
            "evaluations": self.evaluations,
            "stored_points": len(self.dataset),
            "seeded_points": self.seeded_points,
            "reduced_points": len(self.reduced),
            "counters": dict(self.counters),
            "phases": self.phase_records,
            "limits_mg_per_km": self.limits,
            "cycle": {"name": self.weights.cycle_name, "distance_km": self.weights.distance_km,
                      "covered_cells": int(self.weights.covered.sum())},
            "cycle_fuel_kg": fuel_kg,
            "violating": violating or [],
            "selection": sel.summary() if sel else None,
            "dataset_checksum": self.dataset.checksum(),
            "solution_checksum": solution_checksum(sol),
            "grid_boxes": len(self.grid) if hasattr(self, "grid") else 0,
        }

    def _finish(self, status: str, violating: Optional[list[str]] = None) -> CampaignResult:
        rep = self.report(status, violating)
        sel = self.selection
        res = CampaignResult(status, sel.solution if sel else None, self.dataset, rep, sel, self.weights,
                             getattr(self, "fld", None), getattr(self, "grid", None),
                             getattr(self, "domain", None))
        if self.out_dir is not None:
            self._append_log()
            _write_json(self.out_dir / "report.json", rep)
            if sel is not None:
                _write_json(self.out_dir / "instance.json", sel.instance.to_dict())
                _write_json(self.out_dir / "ilp_result.json", sel.result.to_dict())
                if sel.solution is not None:
                    _write_json(self.out_dir / "solution.json", sel.solution.to_dict())
        return res

    # persistence --------------------------------------------------------------------------------
    def _prepare_out_dir(self, fresh: bool) -> None:
        if self.out_dir is None:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        _write_json(self.out_dir / "config.json", self.config.dump())
        if fresh:
            with open(self.out_dir / "dataset.log", "w") as fh:
                fh.write(_log_header())
                for line in self.dataset.to_lines():
                    fh.write(line + "\n")
            self._logged = len(self.dataset)

    def _append_log(self) -> None:
        if self.out_dir is None or self._logged >= len(self.dataset):
            return
        lines = self.dataset.to_lines()[self._logged:]
        with open(self.out_dir / "dataset.log", "a") as fh:
            for line in lines:
                fh.write(line + "\n")
        self._logged = len(self.dataset)

    def state(self) -> dict:
        return {
            "version": SNAPSHOT_VERSION,
            "phase_index": self.phase_index,
            "evals_done": self.evals_done,
            "oracle_evaluations": self.oracle.evaluations,
            "lag_state": None if self.oracle.lag_state is None else self.oracle.lag_state.tolist(),
            "phase_plans": self.phase_plans,
            "phase_first_solve": self.phase_first_solve,
            "last_point": None if self.last_point is None else self.last_point.tolist(),
            "rng": self.rng.bit_generator.state,
            "reduced": sorted(self.reduced),
            "pending": list(self.pending),
            "grid": self.grid.snapshot(),
            "grid_points": list(self.grid_points),
            "counters": dict(self.counters),
            "phase_records": self.phase_records,
            "dataset_len": len(self.dataset),
            "seeded_points": self.seeded_points,
        }

    def _snapshot(self) -> None:
        if self.out_dir is None:
            return
        self._append_log()
        _write_json(self.out_dir / "snapshot.json", self.state())

    def restore(self, st: dict) -> None:
        if st.get("version") != SNAPSHOT_VERSION:
            raise ValueError("unsupported snapshot version")
        self._enter_phase(st["phase_index"])
        self.evals_done = st["evals_done"]
        self.oracle.evaluations = st["oracle_evaluations"]
        self.oracle.lag_state = st["lag_state"]
        self.phase_plans = st["phase_plans"]
        self.phase_first_solve = st["phase_first_solve"]
        self.last_point = None if st["last_point"] is None else np.array(st["last_point"])
        self.rng.bit_generator.state = st["rng"]
        self.reduced = set(st["reduced"])
        self.pending = list(st["pending"])
        self.grid_points = list(st["grid_points"])
        U = self.dataset.U
        pts = self.domain.to_grid(U[self.grid_points]) if self.grid_points else None
        self.grid = AdaptiveGrid.from_snapshot(st["grid"], pts)
        self.counters = dict(st["counters"])
        self.phase_records = list(st["phase_records"])
        self.seeded_points = st["seeded_points"]


def _log_header() -> str:
    return "# seq," + ",".join(ACTUATOR_NAMES) + "," + ",".join(MEASURAND_NAMES) + "\n"


def _write_json(path: Path, obj) -> None:
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
    os.replace(tmp, path)


def read_dataset_log(path: str | Path, limit: Optional[int] = None) -> Dataset:
    with open(path) as fh:
        lines = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    if limit is not None:
        lines = lines[:limit]
    return Dataset.from_lines(lines, len(ACTUATOR_NAMES), len(MEASURAND_NAMES))


def run_campaign(config: CampaignConfig, out_dir: str | Path | None = None,
                 dataset: Optional[Dataset] = None) -> CampaignResult:
    return Campaign(config, out_dir, dataset).run()


def resume_campaign(out_dir: str | Path, budget: Optional[int] = None) -> CampaignResult:
    """Continue a persisted campaign from its latest snapshot.

    The dataset log is truncated to the snapshot's length, so a resumed run
    replays exactly what an uninterrupted run would have done next.
    """
    out_dir = Path(out_dir)
    data = json.loads((out_dir / "config.json").read_text())
    if budget is not None:
        data["budget"] = budget
    config = CampaignConfig.model_validate(data)
    st = json.loads((out_dir / "snapshot.json").read_text())
    ds = read_dataset_log(out_dir / "dataset.log", st["dataset_len"])
    if len(ds) != st["dataset_len"]:
        raise ValueError("dataset log is shorter than the snapshot records")
    camp = Campaign(config, out_dir, ds)
    camp.restore(st)
    camp._prepare_out_dir(fresh=True)
    return camp._loop()


# uniform baseline -------------------------------------------------------------------------------

def serpentine_lattice(n: int, dim: int) -> np.ndarray:
    """All points of the n^dim lattice on [0, 1]^dim, ordered as a boustrophedon
    so consecutive points are lattice neighbours (axis 0 varies fastest)."""
    axis = np.linspace(0.0, 1.0, n)
    idx = [[]]
    for d in range(dim):
        nxt = []
        for k, i in enumerate(range(n)):
            block = idx if k % 2 == 0 else idx[::-1]
            nxt.extend(b + [i] for b in block)
        idx = nxt
    return axis[np.array(idx)] if dim else np.empty((1, 0))


def lattice_sweep(n: int, dim: int, ell: int) -> np.ndarray:
    """Serpentine tour of the n^dim lattice as one polyline: ``ell``-point
    ramps between consecutive lattice points, shared endpoints measured once."""
    nodes = serpentine_lattice(n, dim)
    if len(nodes) == 1:
        return nodes
    ramps = [build_ramp(a, b, ell)[1:] for a, b in zip(nodes[:-1], nodes[1:])]
    return np.vstack([nodes[:1]] + ramps)


def run_uniform_baseline(config: CampaignConfig, levels: Optional[list[int]] = None,
                         out_dir: str | Path | None = None) -> CampaignResult:
    """Sweep the final phase's domain with measurement ramps along uniform
    lattices of growing resolution (n = 3, 5, 9, ... per axis) until the same
    selection passes.

    Every level is an independent sweep under the same storage rule as the
    adaptive campaign; a reading outside the noncritical range ends the
    current ramp run and the sweep continues at the next point. Each level's
    selection only uses that level's data, so the successful level's own
    evaluation count is the cost of a uniform grid of that resolution.
    """
    camp = Campaign(config, out_dir)
    camp._prepare_out_dir(fresh=True)
    bad = camp.infeasible_limits()
    if bad:
        return camp._finish(INFEASIBLE, violating=bad)
    camp._enter_phase(len(config.phases) - 1)
    phase = config.phases[-1]
    dim = camp.domain.dim
    levels = levels or [2 ** j + 1 for j in range(1, 8)]
    for n in levels:
        start_evals = camp.evaluations
        start_len = len(camp.dataset)
        sweep = lattice_sweep(n, dim, config.ell)
        i = 0
        while i < len(sweep) and camp.evaluations < config.budget:
            room = config.budget - camp.evaluations
            run = sweep[i:i + room]
            plan = MeasurementPlan([0, 0], run[[0, -1]], [run], config.ell)
            res = execute_plan(plan, camp.oracle, camp.dataset, camp.params, camp.domain)
            i += res.evaluations + (1 if res.aborted and res.outcomes[-1].reason == "domain" else 0)
        level = np.arange(start_len, len(camp.dataset), dtype=np.int64)
        camp.grid = AdaptiveGrid(np.zeros(dim), np.ones(dim), n - 1, config.min_edge)
        camp.grid_points = level.tolist()
        camp.reduced = set()
        if len(level):
            Z = camp.domain.to_grid(camp.dataset.U[level])
            camp.grid.add_points(Z)
            res = compress(Z, camp.grid, config.compressor_c, camp.dataset.seq[level])
            camp.reduced = set(level[res.kept].tolist())
            camp.counters["compressor_removals"] += len(res.removed)
        sel = camp.select(phase.emissions)
        camp._append_log()
        level_evals = camp.evaluations - start_evals
        camp.phase_records.append({"name": f"uniform-{n}", "evaluations": camp.evaluations,
                                   "level_evaluations": level_evals, "complete_sweep": i >= len(sweep),
                                   "dataset_size": len(camp.dataset), "selection": sel.summary()})
        log.info("baseline n=%d level evals=%d total=%d ilp=%s complete=%s", n, level_evals,
                 camp.evaluations, sel.result.status, sel.done)
        if sel.done:
            return camp._finish(SUCCESS)
        if camp.evaluations >= config.budget:
            break
    hopeless = camp.unreachable_limits() if phase.emissions else []
    if hopeless:
        return camp._finish(INFEASIBLE, violating=hopeless)
    return camp._finish(BUDGET, violating=camp._diagnosis())

"""Selection ILP: one representative per operation cell.

Variables are s^q (point q chosen) and s_ft (cell left empty). The objective
maximizes the summed prey values; each cell takes exactly one of its points
or its penalty variable; adjacent cells must not differ by Delta_a or more in
any actuator; the cycle-weighted pollutant rates must respect the limits,
with an empty cell charged at the pollutant's upper range bound.

Dominance pruning: inside a stack, point q is dropped when another point r
has fuel <= fuel(q), every pollutant <= that of q, and a conflict set that is
a subset of q's. Swapping q for r in any feasible selection keeps it
feasible (same stack row, no new conflicts, emission rows do not grow) and
does not lower the objective (the stack minimum is unchanged, so prey(r) >=
prey(q)). Ties between identical points keep the lower index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from enginecal.ilp.limits import cycle_budget, to_mg_per_km
from enginecal.opfield import DrivingCycleWeights, KOperationField
from enginecal.solution import CellEntry, SolutionMap


class IlpInputError(ValueError):
    pass


def prey_values(field: KOperationField, fuel: np.ndarray) -> np.ndarray:
    """p^q = min fuel over q's stack / fuel(q), for the points in stacks."""
    fuel = np.asarray(fuel, dtype=float)
    out = np.full(len(fuel), np.nan)
    for f in range(field.k):
        for t in range(field.k):
            idx = np.asarray(field.stacks[f][t], dtype=np.int64)
            if len(idx) == 0:
                continue
            vals = fuel[idx]
            if np.any(vals <= 0):
                raise IlpInputError(f"nonpositive fuel reading in cell ({f},{t})")
            out[idx] = vals.min() / vals
    return out


@dataclass
class IlpInstance:
    k: int
    pollutants: list[str]
    point_index: np.ndarray  # candidate -> index into the reduced data set
    cell: np.ndarray  # (P, 2) cell of each candidate
    U: np.ndarray  # (P, m) actuator values
    D: np.ndarray  # (P, |E|) pollutant rates
    fuel: np.ndarray
    prey: np.ndarray
    omega: np.ndarray  # (k, k) resistance times
    e_bar: np.ndarray  # (|E|,) penalty rate of an empty cell
    budget: np.ndarray  # (|E|,) right-hand sides
    limits_mg_km: np.ndarray
    distance_km: float
    delta: np.ndarray  # (m,) drivability bounds
    conflicts: np.ndarray  # (C, 2) candidate pairs
    pruned: list[tuple[int, int]] = field(default_factory=list)  # (pruned, dominator), data set indices

    @property
    def n_points(self) -> int:
        return len(self.point_index)

    @property
    def n_cells(self) -> int:
        return self.k * self.k

    def members(self) -> list[np.ndarray]:
        cid = self.cell[:, 0] * self.k + self.cell[:, 1] if self.n_points else np.empty(0, int)
        return [np.flatnonzero(cid == c) for c in range(self.n_cells)]

    def emission_coefficients(self) -> tuple[np.ndarray, np.ndarray]:
        """(|E|, P) point coefficients and (|E|, k*k) penalty coefficients."""
        w_pt = self.omega[self.cell[:, 0], self.cell[:, 1]] if self.n_points else np.empty(0)
        A_pt = (w_pt[:, None] * self.D).T if self.n_points else np.zeros((len(self.pollutants), 0))
        A_cell = self.omega.reshape(-1)[None, :] * self.e_bar[:, None]
        return A_pt, A_cell

    def to_dict(self) -> dict:
        return {
            "format": "enginecal-ilp-instance/1",
            "k": self.k,
            "pollutants": self.pollutants,
            "distance_km": self.distance_km,
            "limits_mg_km": self.limits_mg_km.tolist(),
            "budget": self.budget.tolist(),
            "e_bar": self.e_bar.tolist(),
            "delta": [None if not np.isfinite(d) else float(d) for d in self.delta],
            "omega": self.omega.tolist(),
            "points": [
                {"index": int(i), "cell": [int(c[0]), int(c[1])], "u": u.tolist(), "d": d.tolist(),
                 "fuel": float(fu), "prey": float(p)}
                for i, c, u, d, fu, p in zip(self.point_index, self.cell, self.U, self.D, self.fuel, self.prey)
            ],
            "conflicts": self.conflicts.tolist(),
            "pruned": [list(map(int, p)) for p in self.pruned],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IlpInstance":
        pts = d["points"]
        m = len(d["delta"])
        ne = len(d["pollutants"])
        return cls(
            k=d["k"], pollutants=list(d["pollutants"]),
            point_index=np.array([p["index"] for p in pts], dtype=np.int64),
            cell=np.array([p["cell"] for p in pts], dtype=np.int64).reshape(-1, 2),
            U=np.array([p["u"] for p in pts], dtype=float).reshape(-1, m),
            D=np.array([p["d"] for p in pts], dtype=float).reshape(-1, ne),
            fuel=np.array([p["fuel"] for p in pts], dtype=float),
            prey=np.array([p["prey"] for p in pts], dtype=float),
            omega=np.array(d["omega"], dtype=float),
            e_bar=np.array(d["e_bar"], dtype=float),
            budget=np.array(d["budget"], dtype=float),
            limits_mg_km=np.array(d["limits_mg_km"], dtype=float),
            distance_km=float(d["distance_km"]),
            delta=np.array([np.inf if v is None else v for v in d["delta"]], dtype=float),
            conflicts=np.array(d["conflicts"], dtype=np.int64).reshape(-1, 2),
            pruned=[tuple(p) for p in d["pruned"]],
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def adjacent_cell_pairs(k: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    out = []
    for f in range(k):
        for t in range(k):
            if f + 1 < k:
                out.append(((f, t), (f + 1, t)))
            if t + 1 < k:
                out.append(((f, t), (f, t + 1)))
    return out


def _conflicts(stacks, U: np.ndarray, delta: np.ndarray, k: int) -> list[tuple[int, int]]:
    out: list[tuple[int, int]] = []
    if not np.any(np.isfinite(delta)):
        return out
    for (a, b) in adjacent_cell_pairs(k):
        qa = stacks[a[0]][a[1]]
        qb = stacks[b[0]][b[1]]
        if not qa or not qb:
            continue
        diff = np.abs(U[qa][:, None, :] - U[qb][None, :, :])
        bad = np.any(diff >= delta, axis=2)
        for i, j in zip(*np.nonzero(bad)):
            q, r = qa[i], qb[j]
            out.append((min(q, r), max(q, r)))
    return out


def _dominance(idx: list[int], fuel: np.ndarray, D: np.ndarray,
               partners: dict[int, list[int]]) -> tuple[list[int], list[tuple[int, int]]]:
    """Points of one stack that survive pruning, plus (pruned, dominator) pairs.

    Candidates are ranked by (fuel, summed pollutants, index); a point is
    dropped when an earlier-ranked point dominates it. Domination is
    transitive, so some surviving point always dominates a dropped one.
    """
    idx = np.asarray(idx, dtype=np.int64)
    Dq = D[idx]
    order = np.lexsort((idx, Dq.sum(axis=1), fuel[idx]))
    idx, Dq, fq = idx[order], Dq[order], fuel[idx][order]
    n = len(idx)
    cols = sorted({r for q in idx.tolist() for r in partners.get(q, [])})
    C = np.zeros((n, len(cols)), dtype=np.float32)
    if cols:
        where = {r: j for j, r in enumerate(cols)}
        for i, q in enumerate(idx.tolist()):
            for r in partners.get(q, []):
                C[i, where[r]] = 1.0
    # dom[j, i]: j dominates i
    dom = np.triu(np.ones((n, n), dtype=bool), 1)
    dom &= fq[:, None] <= fq[None, :]
    dom &= np.all(Dq[:, None, :] <= Dq[None, :, :], axis=2)
    if cols:
        dom &= (C @ (1.0 - C).T) == 0  # conflicts of j are a subset of those of i
    gone = dom.any(axis=0)
    pairs = []
    for i in np.flatnonzero(gone):
        j = int(np.flatnonzero(dom[:, i] & ~gone)[0])
        pairs.append((int(idx[i]), int(idx[j])))
    return sorted(idx[~gone].tolist()), pairs


def build_instance(field: KOperationField, U: np.ndarray, Y: np.ndarray,
                   weights: DrivingCycleWeights, delta: Sequence[float],
                   limits: dict[str, float], pollutant_cols: dict[str, int], fuel_col: int,
                   e_bar: dict[str, float], prune: bool = True) -> IlpInstance:
    """Assemble the ILP over the stacks of ``field`` (indices into U/Y).

    ``limits`` are mg/km per pollutant; every pollutant in ``pollutant_cols``
    needs a limit and an ``e_bar`` penalty rate.
    """
    k = field.k
    if weights.omega.shape != (k, k):
        raise IlpInputError(f"weights are {weights.omega.shape[0]}x{weights.omega.shape[1]}, field is {k}x{k}")
    names = list(pollutant_cols)
    missing = [p for p in names if p not in limits or p not in e_bar]
    if missing:
        raise IlpInputError(f"missing limit for pollutant(s) {missing}")
    U = np.asarray(U, dtype=float)
    Y = np.asarray(Y, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if len(delta) != U.shape[1]:
        raise IlpInputError("one drivability bound per actuator required")
    cols = [pollutant_cols[p] for p in names]
    fuel = Y[:, fuel_col] if len(Y) else np.empty(0)
    prey_all = prey_values(field, fuel)

    stacks = [[list(field.stacks[f][t]) for t in range(k)] for f in range(k)]
    conf = _conflicts(stacks, U, delta, k)
    pruned: list[tuple[int, int]] = []
    if prune:
        partners: dict[int, list[int]] = {}
        for q, r in conf:
            partners.setdefault(q, []).append(r)
            partners.setdefault(r, []).append(q)
        for f in range(k):
            for t in range(k):
                idx = stacks[f][t]
                if len(idx) >= 2:
                    keep, doms = _dominance(idx, fuel, Y[:, cols], partners)
                    pruned.extend(doms)
                    stacks[f][t] = keep
        gone = {q for q, _ in pruned}
        conf = [(q, r) for q, r in conf if q not in gone and r not in gone]

    order = [(q, f, t) for f in range(k) for t in range(k) for q in stacks[f][t]]
    point_index = np.array([o[0] for o in order], dtype=np.int64)
    local = {int(q): i for i, q in enumerate(point_index)}
    cell = np.array([[o[1], o[2]] for o in order], dtype=np.int64).reshape(-1, 2)
    conflicts = np.array(sorted((local[q], local[r]) for q, r in conf), dtype=np.int64).reshape(-1, 2)
    lim = np.array([limits[p] for p in names], dtype=float)
    return IlpInstance(
        k=k, pollutants=names, point_index=point_index, cell=cell,
        U=U[point_index].reshape(len(point_index), U.shape[1]),
        D=Y[np.ix_(point_index, cols)].reshape(len(point_index), len(cols)),
        fuel=fuel[point_index], prey=prey_all[point_index],
        omega=np.asarray(weights.omega, dtype=float), e_bar=np.array([e_bar[p] for p in names], dtype=float),
        budget=np.array([cycle_budget(v, weights.distance_km) for v in lim]), limits_mg_km=lim,
        distance_km=float(weights.distance_km), delta=delta, conflicts=conflicts, pruned=pruned,
    )


@dataclass
class Assignment:
    points: np.ndarray  # (P,) 0/1
    cells: np.ndarray  # (k, k) 0/1, 1 = cell left empty

    @classmethod
    def from_points(cls, instance: IlpInstance, points: np.ndarray) -> "Assignment":
        points = np.asarray(np.round(points), dtype=np.int64)
        cells = np.ones((instance.k, instance.k), dtype=np.int64)
        for i in np.flatnonzero(points):
            cells[instance.cell[i, 0], instance.cell[i, 1]] = 0
        return cls(points, cells)

    def chosen(self) -> np.ndarray:
        return np.flatnonzero(self.points)

    def to_dict(self) -> dict:
        return {"points": self.points.tolist(), "cells": self.cells.tolist()}


@dataclass
class VerificationReport:
    ok: bool
    stack_violations: list[tuple[int, int]]
    conflict_violations: list[tuple[int, int]]  # candidate pairs
    emission_lhs: dict[str, float]
    emission_rhs: dict[str, float]
    slack: dict[str, float]
    cycle_mg_per_km: dict[str, float]
    violated_rows: list[str]

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "stack_violations": [list(v) for v in self.stack_violations],
            "conflict_violations": [list(map(int, v)) for v in self.conflict_violations],
            "emission_lhs": self.emission_lhs, "emission_rhs": self.emission_rhs,
            "slack": self.slack, "cycle_mg_per_km": self.cycle_mg_per_km,
            "violated_rows": self.violated_rows,
        }


def verify_solution(assignment: Assignment, instance: IlpInstance, tol: float = 1e-9) -> VerificationReport:
    """Re-check every row from the raw point data (conflicts are recomputed
    from actuator values, not read from the instance's conflict list)."""
    k = instance.k
    pts = np.asarray(assignment.points)
    cells = np.asarray(assignment.cells)
    violated: list[str] = []
    count = cells.astype(np.int64).copy()
    for i in np.flatnonzero(pts):
        count[instance.cell[i, 0], instance.cell[i, 1]] += 1
    stack_bad = [(f, t) for f in range(k) for t in range(k) if count[f, t] != 1]
    violated += [f"stack({f},{t})" for f, t in stack_bad]

    chosen = np.flatnonzero(pts)
    by_cell: dict[tuple[int, int], list[int]] = {}
    for i in chosen:
        by_cell.setdefault((int(instance.cell[i, 0]), int(instance.cell[i, 1])), []).append(int(i))
    conflict_bad = []
    for a, b in adjacent_cell_pairs(k):
        for i in by_cell.get(a, []):
            for j in by_cell.get(b, []):
                if np.any(np.abs(instance.U[i] - instance.U[j]) >= instance.delta):
                    conflict_bad.append((min(i, j), max(i, j)))
    violated += [f"conflict({i},{j})" for i, j in conflict_bad]

    lhs, rhs, slack, mgkm = {}, {}, {}, {}
    for p, name in enumerate(instance.pollutants):
        total = 0.0
        for i in chosen:
            total += instance.omega[instance.cell[i, 0], instance.cell[i, 1]] * instance.D[i, p]
        total += float(np.sum(instance.omega * cells) * instance.e_bar[p])
        lhs[name] = total
        rhs[name] = float(instance.budget[p])
        slack[name] = rhs[name] - total
        mgkm[name] = to_mg_per_km(total, instance.distance_km)
        if slack[name] < -tol * max(1.0, abs(rhs[name])):
            violated.append(f"emission({name})")
    return VerificationReport(not violated, stack_bad, conflict_bad, lhs, rhs, slack, mgkm, violated)


def to_solution_map(assignment: Assignment, instance: IlpInstance, U_red: np.ndarray,
                    Y_red: np.ndarray) -> SolutionMap:
    sol = SolutionMap(instance.k, U_red.shape[1], Y_red.shape[1])
    for i in assignment.chosen():
        q = int(instance.point_index[i])
        sol[int(instance.cell[i, 0]), int(instance.cell[i, 1])] = CellEntry(U_red[q].copy(), Y_red[q].copy(), q)
    return sol


def verify_map(solution: SolutionMap, instance: IlpInstance, pollutant_cols: Sequence[int],
               tol: float = 1e-9) -> VerificationReport:
    """Check a (possibly gap-filled) map against the instance's drivability
    bounds and emission rows. Entries without a measurand estimate are
    charged at the penalty rate; empty cells too."""
    k = instance.k
    violated: list[str] = []
    conflict_bad = []
    for a, b in adjacent_cell_pairs(k):
        ea, eb = solution[a], solution[b]
        if ea is not None and eb is not None and np.any(np.abs(ea.u - eb.u) >= instance.delta):
            conflict_bad.append((a[0] * k + a[1], b[0] * k + b[1]))
            violated.append(f"conflict({a},{b})")
    lhs, rhs, slack, mgkm = {}, {}, {}, {}
    for p, name in enumerate(instance.pollutants):
        total = 0.0
        for f in range(k):
            for t in range(k):
                e = solution[f, t]
                rate = instance.e_bar[p] if e is None or e.y is None else max(float(e.y[pollutant_cols[p]]), 0.0)
                total += instance.omega[f, t] * rate
        lhs[name], rhs[name] = total, float(instance.budget[p])
        slack[name] = rhs[name] - total
        mgkm[name] = to_mg_per_km(total, instance.distance_km)
        if slack[name] < -tol * max(1.0, abs(rhs[name])):
            violated.append(f"emission({name})")
    empty = solution.empty_cells
    violated += [f"empty({f},{t})" for f, t in empty]
    return VerificationReport(not violated, empty, conflict_bad, lhs, rhs, slack, mgkm, violated)

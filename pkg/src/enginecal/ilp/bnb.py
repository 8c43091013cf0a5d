"""Depth-first branch-and-bound over the point variables.

The penalty variables are eliminated (s_ft = 1 - sum of the stack's s^q), so
every row reads A x <= b with x binary. Branching picks the most fractional
variable (ties: higher prey, then lower index) and explores the up-branch
first. Node and time limits stop the search with the incumbent.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from enginecal.ilp.model import Assignment, IlpInstance
from enginecal.ilp.simplex import solve_lp

INT_TOL = 1e-6
DENSE_LIMIT = 400_000  # tableau entries handled by the in-repo simplex


@dataclass
class IlpResult:
    status: str  # optimal | feasible | infeasible | timeout
    assignment: Optional[Assignment]
    objective: Optional[float]
    bound: float
    nodes: int
    lp_solves: int
    elapsed: float
    violating: list[str] = field(default_factory=list)

    @property
    def gap(self) -> float:
        return float("inf") if self.objective is None else self.bound - self.objective

    @property
    def solved(self) -> bool:
        return self.status in ("optimal", "feasible")

    def to_dict(self) -> dict:
        return {
            "status": self.status, "objective": self.objective,
            "bound": None if not np.isfinite(self.bound) else self.bound,
            "nodes": self.nodes, "lp_solves": self.lp_solves, "elapsed": self.elapsed,
            "violating": self.violating,
            "assignment": None if self.assignment is None else self.assignment.to_dict(),
        }


def reduced_rows(inst: IlpInstance) -> tuple[np.ndarray, np.ndarray]:
    P = inst.n_points
    rows, rhs = [], []
    for mem in inst.members():
        if len(mem):
            r = np.zeros(P)
            r[mem] = 1.0
            rows.append(r)
            rhs.append(1.0)
    for q, s in inst.conflicts:
        r = np.zeros(P)
        r[q] = r[s] = 1.0
        rows.append(r)
        rhs.append(1.0)
    A_pt, A_cell = inst.emission_coefficients()
    w_pt = inst.omega[inst.cell[:, 0], inst.cell[:, 1]] if P else np.empty(0)
    for p in range(len(inst.pollutants)):
        rows.append(A_pt[p] - w_pt * inst.e_bar[p])
        rhs.append(inst.budget[p] - A_cell[p].sum())
    A = np.array(rows, dtype=float).reshape(len(rows), P)
    return A, np.array(rhs, dtype=float)


def _lp(c, A, b, backend: str):
    """Returns (x, objective) or None when infeasible."""
    use_dense = backend == "simplex" or (backend == "auto" and A.size <= DENSE_LIMIT)
    if use_dense:
        res = solve_lp(c, A, b)
        if res.status != "optimal":
            return None
        return res.x, res.objective
    res = linprog(c, A_ub=A, b_ub=b, bounds=(0, 1), method="highs")
    if res.status != 0:
        return None
    return np.clip(res.x, 0.0, 1.0), float(res.fun)


def _feasible(A, b, x) -> bool:
    return bool(np.all(A @ x <= b + 1e-9 * np.maximum(1.0, np.abs(b))))


def _greedy(inst: IlpInstance, A, b) -> Optional[np.ndarray]:
    x = np.zeros(inst.n_points)
    nbr: dict[int, set[int]] = {}
    for q, r in inst.conflicts:
        nbr.setdefault(int(q), set()).add(int(r))
        nbr.setdefault(int(r), set()).add(int(q))
    chosen: set[int] = set()
    for mem in inst.members():
        for q in sorted(mem, key=lambda i: (-inst.prey[i], i)):
            if not (nbr.get(int(q), set()) & chosen):
                chosen.add(int(q))
                x[q] = 1.0
                break
    return x if _feasible(A, b, x) else None


def diagnose_infeasible(inst: IlpInstance) -> list[str]:
    """Pollutants whose row cannot hold even with the per-cell cleanest choice."""
    out = []
    mem = inst.members()
    for p, name in enumerate(inst.pollutants):
        low = 0.0
        for c, idx in enumerate(mem):
            w = inst.omega.reshape(-1)[c]
            best = w * inst.e_bar[p]
            if len(idx):
                best = min(best, float(w * inst.D[idx, p].min()))
            low += best
        if low > inst.budget[p] * (1 + 1e-12):
            out.append(name)
    return out or list(inst.pollutants)


def solve(inst: IlpInstance, time_limit: Optional[float] = None, max_nodes: Optional[int] = 20_000,
          backend: str = "auto") -> IlpResult:
    t0 = time.perf_counter()
    P = inst.n_points
    A, b = reduced_rows(inst)
    c = -inst.prey.astype(float)
    best_x: Optional[np.ndarray] = None
    best = -np.inf
    for cand in (np.zeros(P), _greedy(inst, A, b)):
        if cand is not None and _feasible(A, b, cand):
            val = float(inst.prey @ cand)
            if val > best:
                best, best_x = val, cand.copy()

    nodes = lps = 0
    stack: list[tuple[np.ndarray, float]] = [(np.full(P, -1, dtype=np.int8), np.inf)]
    stopped = False
    open_bound = -np.inf
    while stack:
        if (max_nodes is not None and nodes >= max_nodes) or (
                time_limit is not None and time.perf_counter() - t0 > time_limit):
            stopped = True
            open_bound = max(bd for _, bd in stack)
            break
        fixed, parent_bound = stack.pop()
        if parent_bound <= best + 1e-9:
            continue
        nodes += 1
        free = np.flatnonzero(fixed < 0)
        ones = fixed == 1
        bb = b - A[:, ones].sum(axis=1)
        Af = A[:, free]
        active = np.any(Af != 0.0, axis=1)
        if np.any(bb[~active] < -1e-9 * np.maximum(1.0, np.abs(b[~active]))):
            continue
        base = float(inst.prey[ones].sum())
        if len(free) == 0:
            x = ones.astype(float)
            if base > best:
                best, best_x = base, x
            continue
        lps += 1
        sol = _lp(c[free], Af[active], bb[active], backend)
        if sol is None:
            continue
        xf, obj = sol
        bound = base - obj
        if bound <= best + 1e-9:
            continue
        frac = np.abs(xf - np.round(xf))
        if frac.max() <= INT_TOL:
            x = ones.astype(float)
            x[free] = np.round(xf)
            if _feasible(A, b, x):
                val = float(inst.prey @ x)
                if val > best:
                    best, best_x = val, x
                continue
        score = np.abs(xf - 0.5)
        order = np.lexsort((free, -inst.prey[free], score))
        j = int(free[order[0]])
        down = fixed.copy()
        down[j] = 0
        up = fixed.copy()
        up[j] = 1
        stack.append((down, bound))
        stack.append((up, bound))

    elapsed = time.perf_counter() - t0
    if best_x is None:
        status = "timeout" if stopped else "infeasible"
        return IlpResult(status, None, None, open_bound if stopped else -np.inf, nodes, lps, elapsed,
                         diagnose_infeasible(inst) if status == "infeasible" else [])
    status = "feasible" if stopped else "optimal"
    bound = max(best, open_bound) if stopped else best
    return IlpResult(status, Assignment.from_points(inst, best_x), best, bound, nodes, lps, elapsed)

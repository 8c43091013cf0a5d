"""Independent brute-force oracles shared by the test modules."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from enginecal.opfield import DrivingCycleWeights, KOperationField


@dataclass
class IlpCase:
    field: KOperationField
    U: np.ndarray
    Y: np.ndarray  # columns: fuel, pollutant a, pollutant b
    weights: DrivingCycleWeights
    delta: np.ndarray
    limits: dict
    e_bar: dict
    pollutant_cols = {"a": 1, "b": 2}
    fuel_col = 0


def random_ilp_case(rng: np.random.Generator, k: int = 3, max_per_stack: int = 4, m: int = 2) -> IlpCase:
    field = KOperationField(k, (0.0, 1.0), (0.0, 1.0))
    U, Y = [], []
    for f in range(k):
        for t in range(k):
            for _ in range(int(rng.integers(0, max_per_stack + 1))):
                field.stacks[f][t].append(len(U))
                U.append(rng.uniform(0, 1, m))
                Y.append([rng.uniform(1, 10), rng.uniform(0, 10), rng.uniform(0, 10)])
    U = np.array(U).reshape(-1, m)
    Y = np.array(Y).reshape(-1, 3)
    omega = rng.uniform(0, 20, (k, k)) * (rng.random((k, k)) < 0.8)
    weights = DrivingCycleWeights(omega, "rand", float(omega.sum()), distance_km=1.0)
    delta = rng.uniform(0.3, 1.0, m)
    if rng.random() < 0.15:
        delta[:] = np.inf
    e_bar = {"a": 10.0, "b": 10.0}
    total = float(omega.sum())
    # mg/km limit whose budget (x 3.6 x 1 km) falls between the cleanest and the all-penalty load
    limits = {p: float(rng.uniform(0.15, 1.05) * 10.0 * total / 3.6) for p in ("a", "b")}
    return IlpCase(field, U, Y, weights, delta, limits, e_bar)


def brute_force_ilp(case: IlpCase) -> tuple[bool, float, tuple]:
    """Enumerate every per-cell choice (one point or empty) on the raw data.

    Returns (feasible, best objective, best choice per cell as data indices
    or -1). Independent of the instance builder: no pruning, conflicts and
    prey values recomputed here.
    """
    k = case.field.k
    cells = [(f, t) for f in range(k) for t in range(k)]
    options = [[-1] + list(case.field.stacks[f][t]) for f, t in cells]
    fuel = case.Y[:, case.fuel_col]
    prey = np.zeros(len(fuel))
    for f, t in cells:
        s = case.field.stacks[f][t]
        if s:
            prey[s] = fuel[s].min() / fuel[s]
    names = list(case.pollutant_cols)
    budget = {p: case.limits[p] * case.weights.distance_km * 3.6 for p in names}
    sizes = [len(o) for o in options]
    grids = np.indices(sizes).reshape(len(cells), -1).T  # (N, cells) option numbers
    picks = np.stack([np.array(options[c])[grids[:, c]] for c in range(len(cells))], axis=1)
    valid = np.ones(len(picks), dtype=bool)
    pos = {c: i for i, c in enumerate(cells)}
    for f, t in cells:
        for g, h in ((f + 1, t), (f, t + 1)):
            if g >= k or h >= k:
                continue
            a, b = pos[(f, t)], pos[(g, h)]
            oa, ob = options[a], options[b]
            bad = np.zeros((len(oa), len(ob)), dtype=bool)
            for i, q in enumerate(oa):
                for j, r in enumerate(ob):
                    if q >= 0 and r >= 0:
                        bad[i, j] = bool(np.any(np.abs(case.U[q] - case.U[r]) >= case.delta))
            valid &= ~bad[grids[:, a], grids[:, b]]
    obj = np.zeros(len(picks))
    for c in range(len(cells)):
        sel = picks[:, c] >= 0
        obj[sel] += prey[picks[sel, c]]
    for p in names:
        col = case.pollutant_cols[p]
        load = np.zeros(len(picks))
        for c, (f, t) in enumerate(cells):
            w = case.weights.omega[f, t]
            sel = picks[:, c] >= 0
            load[sel] += w * case.Y[picks[sel, c], col]
            load[~sel] += w * case.e_bar[p]
        valid &= load <= budget[p] * (1 + 1e-12)
    if not valid.any():
        return False, -np.inf, ()
    best = int(np.flatnonzero(valid)[np.argmax(obj[valid])])
    return True, float(obj[best]), tuple(int(v) for v in picks[best])


def brute_force_paths(adj: dict[int, dict[int, float]], s: int, t: int) -> float:
    """Minimum cost over all simple paths by exhaustive DFS."""
    best = [np.inf]

    def dfs(v, seen, cost):
        if cost >= best[0]:
            return
        if v == t:
            best[0] = cost
            return
        for w, c in adj[v].items():
            if w not in seen:
                seen.add(w)
                dfs(w, seen, cost + c)
                seen.remove(w)

    dfs(s, {s}, 0.0)
    return best[0]


def brute_force_knn(Z: np.ndarray, q: np.ndarray, N: int) -> list[int]:
    d = [(float(np.sum((z - q) ** 2)), i) for i, z in enumerate(Z)]
    d.sort()
    return [i for _, i in d[:N]]


def intersection_dim(lo_a, hi_a, lo_b, hi_b) -> int:
    """Dimension of the closed intersection of two boxes, -1 if disjoint."""
    dim = 0
    for la, ha, lb, hb in zip(lo_a, hi_a, lo_b, hi_b):
        lo, hi = max(la, lb), min(ha, hb)
        if lo > hi:
            return -1
        if lo < hi:
            dim += 1
    return dim


def subsets(seq):
    for r in range(len(seq) + 1):
        yield from itertools.combinations(seq, r)

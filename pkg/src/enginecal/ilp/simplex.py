"""Dense two-phase tableau simplex for  min c.x  s.t.  A x <= b,  x >= 0.

Dantzig pricing with a switch to Bland's rule after a run of degenerate
pivots, which rules out cycling.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

TOL = 1e-9


@dataclass
class LPResult:
    status: str  # optimal | infeasible | unbounded
    x: Optional[np.ndarray]
    objective: float
    iterations: int


class _Tableau:
    def __init__(self, T: np.ndarray, basis: np.ndarray):
        self.T = T
        self.basis = basis
        self.iterations = 0

    def pivot(self, r: int, c: int, z: np.ndarray) -> None:
        T = self.T
        T[r] /= T[r, c]
        col = T[:, c].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        z -= z[c] * T[r]
        self.basis[r] = c
        self.iterations += 1

    def run(self, z: np.ndarray, allowed: np.ndarray, max_iter: int) -> str:
        degenerate = 0
        T = self.T
        while self.iterations < max_iter:
            d = np.where(allowed, z[:-1], 0.0)
            if degenerate > 50:
                cand = np.flatnonzero(d < -TOL)
                if len(cand) == 0:
                    return "optimal"
                c = int(cand[0])
            else:
                c = int(np.argmin(d))
                if d[c] >= -TOL:
                    return "optimal"
            colv = T[:, c]
            pos = colv > TOL
            if not np.any(pos):
                return "unbounded"
            ratios = np.full(len(colv), np.inf)
            ratios[pos] = T[pos, -1] / colv[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + TOL * max(1.0, abs(best)))
            r = int(ties[np.argmin(self.basis[ties])])
            degenerate = degenerate + 1 if best <= TOL else 0
            self.pivot(r, c, z)
        raise RuntimeError("simplex iteration limit reached")


def solve_lp(c: np.ndarray, A: np.ndarray, b: np.ndarray, max_iter: int = 50_000) -> LPResult:
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if m == 0:
        if np.any(c < -TOL):
            return LPResult("unbounded", None, -np.inf, 0)
        return LPResult("optimal", np.zeros(n), 0.0, 0)
    neg = b < 0
    n_art = int(neg.sum())
    ncol = n + m + n_art
    T = np.zeros((m, ncol + 1))
    sign = np.where(neg, -1.0, 1.0)
    T[:, :n] = A * sign[:, None]
    T[np.arange(m), n + np.arange(m)] = sign
    T[:, -1] = b * sign
    basis = n + np.arange(m)
    art_rows = np.flatnonzero(neg)
    T[art_rows, n + m + np.arange(n_art)] = 1.0
    basis[art_rows] = n + m + np.arange(n_art)
    tab = _Tableau(T, basis)

    allowed = np.ones(ncol, dtype=bool)
    if n_art:
        z = np.zeros(ncol + 1)
        z[n + m:n + m + n_art] = 1.0
        z -= T[art_rows].sum(axis=0)
        tab.run(z, allowed, max_iter)
        if -z[-1] > 1e-7 * max(1.0, np.abs(b).max()):
            return LPResult("infeasible", None, np.inf, tab.iterations)
        for r in range(m):  # drive zero-level artificials out of the basis
            if tab.basis[r] >= n + m:
                cand = np.flatnonzero(np.abs(tab.T[r, :n + m]) > 1e-9)
                if len(cand):
                    tab.pivot(r, int(cand[0]), z)
        allowed[n + m:] = False

    z = np.zeros(ncol + 1)
    z[:n] = c
    for r in range(m):
        j = tab.basis[r]
        if z[j] != 0.0:
            z -= z[j] * tab.T[r]
    status = tab.run(z, allowed, max_iter)
    if status == "unbounded":
        return LPResult("unbounded", None, -np.inf, tab.iterations)
    x = np.zeros(ncol)
    x[tab.basis] = tab.T[:, -1]
    x = np.maximum(x[:n], 0.0)
    return LPResult("optimal", x, float(c @ x), tab.iterations)

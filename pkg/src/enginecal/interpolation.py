"""Local quadratic Newton fits, grid refinement decisions and gap filling."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from math import comb
from typing import Optional, Sequence

import numpy as np

from enginecal.domain import ActuatorDomain
from enginecal.engine import DomainError, EngineOracle
from enginecal.grid import AdaptiveGrid
from enginecal.opfield import KOperationField
from enginecal.solution import CellEntry, SolutionMap

log = logging.getLogger(__name__)

PIVOT_TOL = 1e-9


def n_interpolation_points(dim: int, degree: int = 2) -> int:
    """Number of monomials of total degree <= ``degree`` in ``dim`` variables."""
    return comb(dim + degree, dim)


def nearest_neighbors(Z: np.ndarray, q: int, N: int) -> np.ndarray:
    """Indices of the N points nearest to ``Z[q]`` (excluding q), ties by index.

    Two linear sweeps: a selection pass finds the N-th smallest squared
    distance, a partition pass collects everything at or below it. Only the
    N selected entries are ordered afterwards.
    """
    Z = np.asarray(Z, dtype=float)
    M = len(Z)
    if M - 1 < N:
        raise ValueError(f"need more than {N} points for {N} neighbours, have {M}")
    d2 = np.sum((Z - Z[q]) ** 2, axis=1)
    d2[q] = np.inf
    kth = np.partition(d2, N - 1)[N - 1]
    below = np.flatnonzero(d2 < kth)
    ties = np.flatnonzero(d2 == kth)[: N - len(below)]
    sel = np.concatenate([below, ties])
    order = np.lexsort((sel, d2[sel]))
    return sel[order]


def _exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    exps = []
    for deg in range(degree + 1):
        for combo in itertools.combinations_with_replacement(range(dim), deg):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            exps.append(tuple(e))
    return exps


def _monomials(X: np.ndarray, exps: list[tuple[int, ...]]) -> np.ndarray:
    X = np.atleast_2d(X)
    E = np.array(exps)
    return np.prod(X[:, None, :] ** E[None, :, :], axis=2)


@dataclass
class LocalFit:
    """Polynomial of total degree <= 2 through the given points.

    ``newton_basis`` rows are the Newton fundamental polynomials (monomial
    coefficients), ``coefficients`` the divided differences, one column per
    fitted output.
    """

    center: np.ndarray
    scale: float
    exponents: list[tuple[int, ...]]
    newton_basis: Optional[np.ndarray]
    coefficients: np.ndarray
    monomial_coefficients: np.ndarray
    poised: bool
    approximate: bool = False
    residual: Optional[np.ndarray] = field(default=None)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        single = X.ndim == 1
        P = _monomials((np.atleast_2d(X) - self.center) / self.scale, self.exponents)
        out = P @ self.monomial_coefficients
        return out[0] if single else out


def newton_fit(X: np.ndarray, Y: np.ndarray, degree: int = 2) -> LocalFit:
    """Interpolate values ``Y`` at points ``X`` by a Newton-form polynomial.

    With exactly as many points as monomials the points are processed one by
    one; each step picks the remaining basis polynomial with the largest value
    at the new point and eliminates it from the others, so the resulting
    Newton polynomials vanish at all earlier points. A vanishing pivot means
    the set is not poised; the fit then falls back to least squares and is
    flagged approximate. More points than monomials always use least squares.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.asarray(Y, dtype=float)
    vec = Y.ndim == 1
    Y2 = Y[:, None] if vec else Y
    npts, dim = X.shape
    exps = _exponents(dim, degree)
    K = len(exps)
    center = X.mean(axis=0)
    scale = float(np.max(np.abs(X - center))) or 1.0
    V = _monomials((X - center) / scale, exps)

    basis = None
    poised = False
    if npts == K:
        P = np.eye(K)
        poised = True
        for i in range(K):
            vals = P[i:] @ V[i]
            j = int(np.argmax(np.abs(vals)))
            if abs(vals[j]) < PIVOT_TOL:
                poised = False
                break
            P[[i, i + j]] = P[[i + j, i]]
            P[i] /= vals[j]
            later = P[i + 1:] @ V[i]
            P[i + 1:] -= np.outer(later, P[i])
        if poised:
            basis = P
            N = V @ P.T  # N[r, i] = Newton polynomial i at point r (lower triangular)
            c = np.zeros((K, Y2.shape[1]))
            for i in range(K):
                c[i] = Y2[i] - N[i, :i] @ c[:i]
            mono = P.T @ c
            return LocalFit(center, scale, exps, basis, c if not vec else c[:, 0],
                            mono if not vec else mono[:, 0], True)
    mono, *_ = np.linalg.lstsq(V, Y2, rcond=None)
    rank = np.linalg.matrix_rank(V, tol=PIVOT_TOL * max(1.0, np.abs(V).max()))
    full = bool(rank == K) and npts > K
    return LocalFit(center, scale, exps, None, mono if not vec else mono[:, 0],
                    mono if not vec else mono[:, 0], poised=full, approximate=True)


def fit_at(Z: np.ndarray, Y: np.ndarray, q: int, degree: int = 2) -> LocalFit:
    """Quadratic fit from the nearest neighbours of point q (q itself excluded),
    doubling the neighbour set with least squares when the first set is not poised."""
    N = n_interpolation_points(Z.shape[1], degree)
    nb = nearest_neighbors(Z, q, N)
    fit = newton_fit(Z[nb], Y[nb], degree)
    if not fit.poised and len(Z) - 1 >= 2 * N:
        nb = nearest_neighbors(Z, q, 2 * N)
        fit = newton_fit(Z[nb], Y[nb], degree)
        fit.approximate = True
    fit.residual = np.abs(fit(Z[q]) - Y[q])
    return fit


def refine_symmetric_if_needed(grid: AdaptiveGrid, Z: np.ndarray, Y: np.ndarray, q: int,
                               thresholds: np.ndarray) -> bool:
    """Split the box of point q symmetrically if the local fit misses y_q by
    more than a threshold in any measurand."""
    fit = fit_at(Z, Y, q)
    if np.any(fit.residual > np.asarray(thresholds)):
        return bool(grid.split_symmetric(grid.locate(Z[q]).id))
    return False


@dataclass
class CrossMeasurement:
    axis: Optional[int]
    differences: np.ndarray
    evaluations: int
    split: bool


def cross_measure_and_refine(grid: AdaptiveGrid, oracle: EngineOracle, domain: ActuatorDomain,
                             u: np.ndarray, y: np.ndarray, p: int,
                             delta: float = 0.02) -> CrossMeasurement:
    """Probe each dynamic actuator at u +/- delta (fraction of its interval) and
    bisect the box of u along the actuator with the largest pollutant change.

    Probes leaving the domain are clamped onto u itself (one-sided
    difference). A probe reading outside the noncritical range cancels the
    refinement.
    """
    u = np.asarray(u, dtype=float)
    diffs = np.zeros(domain.dim)
    evals = 0
    for a, i in enumerate(domain.dynamic):
        step = delta * (domain.hi[i] - domain.lo[i])
        vals = []
        for sign in (1.0, -1.0):
            probe = u.copy()
            probe[i] = np.clip(u[i] + sign * step, domain.lo[i], domain.hi[i])
            if probe[i] == u[i]:
                vals.append(y[p])
                continue
            try:
                yp = oracle.evaluate(probe)
            except DomainError:
                log.warning("cross-measurement probe rejected; refinement skipped")
                return CrossMeasurement(None, diffs, evals, False)
            evals += 1
            if not oracle.in_range(yp):
                return CrossMeasurement(None, diffs, evals, False)
            vals.append(yp[p])
        diffs[a] = abs(vals[0] - vals[1])
    axis = int(np.argmax(diffs))
    z = domain.to_grid(u)
    split = bool(grid.split_asymmetric(grid.locate(z).id, axis))
    return CrossMeasurement(axis, diffs, evals, split)


# gap filling -----------------------------------------------------------------------

def _secant(cells, f, t, df, dt, k):
    """Linear extrapolation onto (f, t) from the two nearest measured cells along
    direction (df, dt); None if fewer than two exist."""
    found = []
    i = 1
    while len(found) < 2:
        ff, tt = f + i * df, t + i * dt
        if not (0 <= ff < k and 0 <= tt < k):
            return None
        e = cells[ff][tt]
        if e is not None and not e.synthetic:
            found.append((i, e))
        i += 1
    (i1, e1), (i2, e2) = found
    slope_u = (e2.u - e1.u) / (i2 - i1)
    u = e1.u - i1 * slope_u
    y = None
    if e1.y is not None and e2.y is not None:
        y = e1.y - i1 * (e2.y - e1.y) / (i2 - i1)
    return u, y


def fill_gaps(solution: SolutionMap, field: KOperationField, U_red: np.ndarray, Y_red: np.ndarray,
              freq_index: int, torq_index: int, lo: Optional[np.ndarray] = None,
              hi: Optional[np.ndarray] = None) -> tuple[SolutionMap, list[tuple[int, int]]]:
    """Fill empty cells of a solution map; returns (filled map, cells left empty).

    Boundary cells are extrapolated by secants through the two nearest measured
    cells along each inward direction (averaged over directions at corners).
    Interior cells get a quadratic Newton fit over (frequency, torque) from the
    representatives of surrounding cells, supplemented by reduced data points
    of those stacks; with fewer than six but at least three sources the fit
    drops to affine. Filled entries are flagged synthetic and clipped to D.
    """
    k = field.k
    out = solution.copy()
    cells = solution.cells
    left = []
    for f, t in solution.empty_cells:
        u = y = None
        boundary = f in (0, k - 1) or t in (0, k - 1)
        if boundary:
            dirs = []
            if f == 0:
                dirs.append((1, 0))
            if f == k - 1:
                dirs.append((-1, 0))
            if t == 0:
                dirs.append((0, 1))
            if t == k - 1:
                dirs.append((0, -1))
            ext = [r for r in (_secant(cells, f, t, df, dt, k) for df, dt in dirs) if r is not None]
            if ext:
                u = np.mean([r[0] for r in ext], axis=0)
                ys = [r[1] for r in ext if r[1] is not None]
                y = np.mean(ys, axis=0) if ys else None
        else:
            u, y = _interior_fill(solution, field, f, t, U_red, Y_red, freq_index, torq_index)
        if u is None:
            left.append((f, t))
            continue
        if lo is not None and hi is not None:
            u = np.clip(u, lo, hi)
        out[f, t] = CellEntry(np.asarray(u, dtype=float), y, None, True)
    return out, left


def _interior_fill(solution, field, f, t, U_red, Y_red, freq_index, torq_index):
    k = field.k
    target = field.normalize([field.cell_center(f, t)[0]], [field.cell_center(f, t)[1]])[0]
    for radius in (1, 2):
        src_u, src_y, src_xy = [], [], []
        neighbours = [(f + a, t + b) for a in range(-radius, radius + 1)
                      for b in range(-radius, radius + 1)
                      if (a, b) != (0, 0) and 0 <= f + a < k and 0 <= t + b < k]
        for ff, tt in neighbours:
            e = solution[ff, tt]
            if e is not None and not e.synthetic and e.y is not None:
                src_u.append(e.u)
                src_y.append(e.y)
        need = n_interpolation_points(2)
        if len(src_u) < need and len(U_red):
            extra = []
            for ff, tt in neighbours:
                extra.extend(field.stacks[ff][tt])
            chosen = {e.index for _, e in solution.entries() if e.index is not None}
            extra = [q for q in extra if q not in chosen]
            if extra:
                xy = field.normalize(U_red[extra, freq_index], Y_red[extra, torq_index])
                order = np.argsort(np.sum((xy - target) ** 2, axis=1), kind="stable")
                for q in np.asarray(extra)[order][: need - len(src_u)]:
                    src_u.append(U_red[q])
                    src_y.append(Y_red[q])
        if len(src_u) >= 3:
            break
    if len(src_u) < 3:
        return None, None
    U = np.array(src_u)
    Yv = np.array(src_y)
    XY = field.normalize(U[:, freq_index], Yv[:, torq_index])
    V = np.hstack([U, Yv])
    if len(XY) >= 6:
        d2 = np.sum((XY - target) ** 2, axis=1)
        near = np.lexsort((np.arange(len(d2)), d2))
        fit = newton_fit(XY[near[:6]], V[near[:6]])
        if not fit.poised:
            fit = newton_fit(XY, V)
        if fit.poised or len(XY) > 6:
            val = fit(target)
            return val[: U.shape[1]], val[U.shape[1]:]
    fit = newton_fit(XY, V, degree=1)
    val = fit(target)
    return val[: U.shape[1]], val[U.shape[1]:]

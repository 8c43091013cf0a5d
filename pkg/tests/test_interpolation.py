import numpy as np
import pytest

from enginecal.domain import ActuatorDomain
from enginecal.engine import DomainError
from enginecal.grid import AdaptiveGrid
from enginecal.interpolation import (cross_measure_and_refine, fill_gaps, fit_at, n_interpolation_points,
                                     nearest_neighbors, newton_fit, refine_symmetric_if_needed)
from enginecal.opfield import KOperationField
from enginecal.solution import CellEntry, SolutionMap

from oracles import brute_force_knn


def test_interpolation_point_counts():
    assert [n_interpolation_points(d) for d in (1, 2, 3, 7)] == [3, 6, 10, 36]
    assert n_interpolation_points(2, 1) == 3


@pytest.mark.parametrize("seed", range(200))
def test_knn_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    d = int(rng.integers(1, 4))
    M = int(rng.integers(5, 60))
    # integer coordinates produce plenty of distance ties
    Z = rng.integers(0, 4, (M, d)).astype(float) if seed % 2 else rng.random((M, d))
    q = int(rng.integers(M))
    N = int(rng.integers(1, M))
    expect = [i for i in brute_force_knn(np.delete(Z, q, axis=0), Z[q], N)]
    expect = [i + (i >= q) for i in expect]
    assert list(nearest_neighbors(Z, q, N)) == expect


def test_knn_needs_enough_points():
    with pytest.raises(ValueError):
        nearest_neighbors(np.zeros((3, 2)), 0, 3)


def test_square_through_three_points():
    fit = newton_fit(np.array([[0.0], [1.0], [2.0]]), np.array([0.0, 1.0, 4.0]))
    assert fit.poised and not fit.approximate
    assert fit(np.array([3.0])) == pytest.approx(9.0)
    assert fit(np.array([-1.5])) == pytest.approx(2.25)


@pytest.mark.parametrize("seed", range(30))
def test_random_quadratics_reproduced(seed):
    rng = np.random.default_rng(seed)
    d = 1 + seed % 3
    A = rng.normal(size=(d, d))
    b, c = rng.normal(size=d), rng.normal()

    def f(X):
        return np.einsum("ni,ij,nj->n", X, A, X) + X @ b + c

    X = rng.random((n_interpolation_points(d), d))
    fit = newton_fit(X, f(X))
    assert fit.poised
    T = rng.random((20, d))
    assert np.allclose(fit(T), f(T), atol=1e-9, rtol=0)
    # Newton polynomials vanish at earlier points and are one at their own
    N = fit.newton_basis
    from enginecal.interpolation import _monomials
    V = _monomials((X - fit.center) / fit.scale, fit.exponents)
    L = V @ N.T
    assert np.allclose(np.triu(L, 1), 0, atol=1e-9) and np.allclose(np.diag(L), 1)


def test_collinear_points_not_poised():
    t = np.linspace(0, 1, 6)
    X = np.column_stack([t, 2 * t])
    fit = newton_fit(X, t ** 2)
    assert not fit.poised and fit.approximate


def test_vector_valued_fit():
    rng = np.random.default_rng(1)
    X = rng.random((6, 2))
    Y = np.column_stack([X[:, 0] ** 2, X[:, 0] * X[:, 1], 1 + X[:, 1]])
    fit = newton_fit(X, Y)
    assert np.allclose(fit(np.array([0.3, 0.7])), [0.09, 0.21, 1.7])


def test_fit_at_residual():
    rng = np.random.default_rng(2)
    Z = rng.random((30, 2))
    Y = (Z ** 2).sum(axis=1)[:, None]
    assert fit_at(Z, Y, 5).residual[0] == pytest.approx(0.0, abs=1e-9)


def test_refine_only_where_fit_fails():
    rng = np.random.default_rng(3)
    Z = rng.random((40, 2))
    grid = AdaptiveGrid([0, 0], [1, 1], 2)
    grid.add_points(Z)
    Y = np.column_stack([Z[:, 0] + Z[:, 1]])
    assert not refine_symmetric_if_needed(grid, Z, Y, 0, np.array([0.01]))
    n = len(grid)
    Y[0] += 1.0
    assert refine_symmetric_if_needed(grid, Z, Y, 0, np.array([0.01]))
    assert len(grid) == n + 3


class LinearOracle:
    """Two measurands: y0 = w . u is the probed pollutant, y1 stays in range."""

    def __init__(self, w, y_hi=np.inf):
        self.w = np.asarray(w, dtype=float)
        self.y_hi = y_hi
        self.evaluations = 0

    def evaluate(self, u):
        if np.any(u < 0) or np.any(u > 1):
            raise DomainError("outside")
        self.evaluations += 1
        return np.array([self.w @ u, 0.0])

    def in_range(self, y):
        return bool(y[0] <= self.y_hi)


def cross(w, u, **kw):
    grid = AdaptiveGrid([0, 0], [1, 1])
    o = LinearOracle(w, **kw)
    dom = ActuatorDomain([0, 0], [1, 1])
    u = np.asarray(u, dtype=float)
    return grid, cross_measure_and_refine(grid, o, dom, u, np.array([o.w @ u, 0.0]), 0, 0.1)


def test_cross_measure_single_axis():
    grid, res = cross([0.0, 3.0], [0.5, 0.5])
    assert res.axis == 1 and res.split and res.evaluations == 4
    assert np.allclose(res.differences, [0.0, 0.6])
    assert sorted(tuple(np.round(b.edges, 6)) for b in grid.boxes.values()) == [(1.0, 0.5)] * 2


def test_cross_measure_tie_takes_first_axis():
    _, res = cross([1.0, 1.0], [0.5, 0.5])
    assert res.axis == 0


def test_cross_measure_one_sided_at_boundary():
    _, res = cross([1.0, 2.0], [0.0, 0.5])
    assert res.evaluations == 3
    assert np.allclose(res.differences, [0.1, 0.4])


def test_cross_measure_critical_probe_cancels():
    grid, res = cross([1.0, 0.0], [0.5, 0.5], y_hi=0.55)
    assert not res.split and res.axis is None and len(grid) == 1


def linear_map(k=5, drop=()):
    field = KOperationField(k, (0.0, float(k)), (0.0, float(k)))
    sol = SolutionMap(k, 2, 1)
    for f in range(k):
        for t in range(k):
            if (f, t) not in drop:
                x, y = f + 0.5, t + 0.5
                sol[f, t] = CellEntry(np.array([x, 2 * x + 3 * y]), np.array([y]), f * k + t)
    return field, sol


def expected(f, t):
    x, y = f + 0.5, t + 0.5
    return np.array([x, 2 * x + 3 * y]), np.array([y])


def test_fill_interior_cell_exact_for_affine_data():
    field, sol = linear_map(drop={(2, 2)})
    out, left = fill_gaps(sol, field, np.empty((0, 2)), np.empty((0, 1)), 0, 0)
    e = out[2, 2]
    assert not left and e.synthetic and e.index is None
    u, y = expected(2, 2)
    assert np.allclose(e.u, u) and np.allclose(e.y, y)
    assert sol[2, 2] is None  # input map untouched


def test_fill_boundary_by_secant():
    # cell 1 from cells 2, 3 along torque; cell 4 from 3, 2 going the other way
    field, sol = linear_map(drop={(0, 2), (4, 2), (2, 0), (2, 4)})
    out, left = fill_gaps(sol, field, np.empty((0, 2)), np.empty((0, 1)), 0, 0)
    assert not left
    for ft in [(0, 2), (4, 2), (2, 0), (2, 4)]:
        u, y = expected(*ft)
        assert np.allclose(out[ft].u, u) and np.allclose(out[ft].y, y)


def test_fill_secant_skips_empty_neighbour():
    field, sol = linear_map(drop={(0, 2), (1, 2)})
    out, left = fill_gaps(sol, field, np.empty((0, 2)), np.empty((0, 1)), 0, 0)
    assert not left
    for ft in [(0, 2), (1, 2)]:
        assert np.allclose(out[ft].u, expected(*ft)[0])


def test_fill_clips_to_domain_and_reports_unfillable():
    field, sol = linear_map(drop={(0, 2)})
    out, _ = fill_gaps(sol, field, np.empty((0, 2)), np.empty((0, 1)), 0, 0,
                       lo=np.array([1.0, 0.0]), hi=np.array([5.0, 20.0]))
    assert out[0, 2].u[0] == 1.0
    k = 3
    lone = SolutionMap(k, 2, 1)
    lone[1, 1] = CellEntry(np.zeros(2), np.zeros(1), 0)
    _, left = fill_gaps(lone, KOperationField(k, (0, 3), (0, 3)), np.empty((0, 2)), np.empty((0, 1)), 0, 0)
    assert len(left) == 8

import json

import numpy as np
import pytest
from scipy.optimize import linprog

from enginecal.ilp.bnb import solve
from enginecal.ilp.limits import cycle_budget, load_limit_table, norm_limits, to_mg_per_km
from enginecal.ilp.model import (Assignment, IlpInputError, IlpInstance, adjacent_cell_pairs, build_instance,
                                 prey_values, verify_solution)
from enginecal.ilp.simplex import solve_lp
from enginecal.opfield import DrivingCycleWeights, KOperationField

from oracles import brute_force_ilp, random_ilp_case


def build(case, prune=True):
    return build_instance(case.field, case.U, case.Y, case.weights, case.delta, case.limits,
                          case.pollutant_cols, case.fuel_col, case.e_bar, prune=prune)


def tiny(stacks, U, Y, k=2, omega=None, delta=np.inf, limit=1e9):
    field = KOperationField(k, (0.0, 1.0), (0.0, 1.0))
    for (f, t), idx in stacks.items():
        field.stacks[f][t] = list(idx)
    omega = np.ones((k, k)) if omega is None else np.asarray(omega, dtype=float)
    w = DrivingCycleWeights(omega, "t", float(omega.sum()), distance_km=1.0)
    U = np.asarray(U, dtype=float)
    return build_instance(field, U, np.asarray(Y, dtype=float), w, np.full(U.shape[1], delta),
                          {"nox": limit}, {"nox": 1}, 0, {"nox": 100.0})


def test_limit_table_values():
    t = load_limit_table()
    assert t["E5a"]["NOx"] == 60 and t["E4"]["CO"] == 1000 and t["E3"]["PN"] is None
    assert norm_limits("E5a")["NOx"] == 60 and "PM" not in norm_limits("E6b")
    assert cycle_budget(60, 11.0) == pytest.approx(60 * 11 * 3.6)
    assert to_mg_per_km(cycle_budget(60, 11.0), 11.0) == pytest.approx(60)


def test_prey_values():
    field = KOperationField(2, (0, 1), (0, 1))
    field.stacks[0][0] = [0, 1]
    field.stacks[1][1] = [2]
    p = prey_values(field, np.array([10.0, 5.0, 3.0]))
    assert list(p) == [0.5, 1.0, 1.0]
    assert np.array_equal(prey_values(field, 7 * np.array([10.0, 5.0, 3.0])), p)
    with pytest.raises(IlpInputError):
        prey_values(field, np.array([0.0, 5.0, 3.0]))


def test_infinite_delta_no_conflicts():
    rng = np.random.default_rng(0)
    case = random_ilp_case(rng)
    case.delta[:] = np.inf
    assert len(build(case).conflicts) == 0


@pytest.mark.parametrize("seed", range(20))
def test_conflicts_match_pair_enumeration(seed):
    rng = np.random.default_rng(seed)
    case = random_ilp_case(rng)
    inst = build(case, prune=False)
    expect = set()
    for a, b in adjacent_cell_pairs(3):
        for q in case.field.stacks[a[0]][a[1]]:
            for r in case.field.stacks[b[0]][b[1]]:
                if np.any(np.abs(case.U[q] - case.U[r]) >= case.delta):
                    expect.add((min(q, r), max(q, r)))
    got = {tuple(sorted((int(inst.point_index[i]), int(inst.point_index[j])))) for i, j in inst.conflicts}
    assert got == expect


def test_conflict_at_exact_delta():
    inst = tiny({(0, 0): [0], (0, 1): [1]}, [[0.0], [1.0]], [[1, 0], [1, 0]], delta=1.0)
    assert len(inst.conflicts) == 1


def test_empty_cell_forces_penalty():
    inst = tiny({(0, 0): [0]}, [[0.0]], [[1.0, 2.0]])
    res = solve(inst)
    assert res.status == "optimal"
    assert res.assignment.cells.tolist() == [[0, 1], [1, 1]]
    rep = verify_solution(res.assignment, inst)
    assert rep.ok and rep.emission_lhs["nox"] == pytest.approx(2.0 + 3 * 100.0)


def test_two_by_two_picks_minimizers():
    stacks = {(0, 0): [0, 1], (0, 1): [2, 3], (1, 0): [4, 5], (1, 1): [6, 7]}
    fuel = [5, 10, 8, 4, 3, 6, 9, 9.5]
    inst = tiny(stacks, np.zeros((8, 1)), np.column_stack([fuel, np.ones(8)]))
    res = solve(inst)
    assert res.objective == pytest.approx(4.0)
    chosen = sorted(int(inst.point_index[i]) for i in res.assignment.chosen())
    assert chosen == [0, 3, 4, 6]


def test_tight_emission_picks_cleaner_point():
    # cell (0,0): cheap point emits 50, dear point emits 1; the limit forbids the cheap one
    stacks = {(0, 0): [0, 1], (0, 1): [2], (1, 0): [3], (1, 1): [4]}
    Y = [[2.0, 50.0], [4.0, 1.0], [1.0, 1.0], [1.0, 1.0], [1.0, 1.0]]
    limit = to_mg_per_km(10.0, 1.0)
    inst = tiny(stacks, np.zeros((5, 1)), Y, limit=limit)
    res = solve(inst)
    chosen = sorted(int(inst.point_index[i]) for i in res.assignment.chosen())
    assert chosen == [1, 2, 3, 4] and res.objective == pytest.approx(3.5)


def test_infeasible_when_even_best_choice_exceeds_limit():
    inst = tiny({(0, 0): [0]}, [[0.0]], [[1.0, 5.0]], omega=[[1, 0], [0, 0]], limit=to_mg_per_km(1.0, 1.0))
    res = solve(inst)
    assert res.status == "infeasible" and res.violating == ["nox"]


@pytest.mark.parametrize("seed", range(100))
def test_solver_matches_enumeration(seed):
    rng = np.random.default_rng(1000 + seed)
    case = random_ilp_case(rng, max_per_stack=4 if seed < 10 else 3)
    feasible, best, _ = brute_force_ilp(case)
    inst = build(case)
    res = solve(inst, max_nodes=None)
    assert res.solved == feasible
    if feasible:
        assert res.status == "optimal"
        assert res.objective == pytest.approx(best, abs=1e-9)
        rep = verify_solution(res.assignment, inst)
        assert rep.ok and all(v >= -1e-9 for v in rep.slack.values())
    else:
        assert res.status == "infeasible"


@pytest.mark.parametrize("seed", range(20))
def test_pruning_keeps_optimum(seed):
    rng = np.random.default_rng(2000 + seed)
    case = random_ilp_case(rng, max_per_stack=4)
    full, pruned = build(case, prune=False), build(case)
    a, b = solve(full, max_nodes=None), solve(pruned, max_nodes=None)
    assert a.status == b.status
    if a.solved:
        assert a.objective == pytest.approx(b.objective, abs=1e-9)
    kept = set(pruned.point_index.tolist())
    for q, r in pruned.pruned:
        assert q not in kept and r in kept
        assert case.Y[r, 0] <= case.Y[q, 0] and np.all(case.Y[r, 1:] <= case.Y[q, 1:])


def test_dominance_identical_points_keep_lower_index():
    inst = tiny({(0, 0): [0, 1]}, [[0.0], [0.0]], [[1.0, 1.0], [1.0, 1.0]])
    assert inst.point_index.tolist() == [0] and inst.pruned == [(1, 0)]


def test_fuel_scaling_leaves_choice_unchanged():
    rng = np.random.default_rng(5)
    case = random_ilp_case(rng)
    base = solve(build(case), max_nodes=None)
    case.Y[:, 0] *= 3.7
    scaled = solve(build(case), max_nodes=None)
    assert base.status == scaled.status
    if base.solved:
        assert np.array_equal(base.assignment.cells, scaled.assignment.cells)
        assert base.objective == pytest.approx(scaled.objective)


def test_verify_flags_specific_rows():
    stacks = {(0, 0): [0], (0, 1): [1], (1, 0): [2], (1, 1): [3]}
    U = [[0.0], [5.0], [0.0], [0.0]]
    inst = tiny(stacks, U, np.ones((4, 2)), delta=1.0, limit=to_mg_per_km(3.5, 1.0))
    bad = Assignment.from_points(inst, np.ones(4))
    rep = verify_solution(bad, inst)
    assert rep.conflict_violations and "emission(nox)" in rep.violated_rows
    assert any(r.startswith("conflict") for r in rep.violated_rows)
    dup = Assignment(np.ones(4, dtype=int), np.ones((2, 2), dtype=int))
    assert "stack(0,0)" in verify_solution(dup, inst).violated_rows


def test_all_penalty_assignment():
    inst = tiny({(0, 0): [0]}, [[0.0]], [[1.0, 1.0]], limit=to_mg_per_km(400.0, 1.0))
    empty = Assignment.from_points(inst, np.zeros(1))
    rep = verify_solution(empty, inst)
    assert rep.ok and rep.emission_lhs["nox"] == pytest.approx(400.0)
    inst.budget[:] = 399.0
    assert verify_solution(empty, inst).violated_rows == ["emission(nox)"]


def test_instance_roundtrip():
    case = random_ilp_case(np.random.default_rng(7))
    inst = build(case)
    back = IlpInstance.from_dict(json.loads(inst.dumps()))
    assert back.to_dict() == inst.to_dict()


def test_build_rejects_bad_input():
    case = random_ilp_case(np.random.default_rng(8))
    with pytest.raises(IlpInputError):
        build_instance(case.field, case.U, case.Y, case.weights, case.delta, {"a": 1.0},
                       case.pollutant_cols, 0, case.e_bar)
    w = DrivingCycleWeights(np.ones((4, 4)), "x", 16.0, 1.0)
    with pytest.raises(IlpInputError):
        build_instance(case.field, case.U, case.Y, w, case.delta, case.limits,
                       case.pollutant_cols, 0, case.e_bar)


def test_node_limit_reports_feasible_or_timeout():
    case = random_ilp_case(np.random.default_rng(9), max_per_stack=4)
    res = solve(build(case), max_nodes=1)
    assert res.status in ("feasible", "timeout", "optimal", "infeasible")
    if res.status == "feasible":
        assert res.bound >= res.objective


def test_simplex_small_lp():
    # max x + y s.t. x + 2y <= 4, 3x + y <= 6, x, y >= 0
    res = solve_lp(np.array([-1.0, -1.0]), np.array([[1.0, 2.0], [3.0, 1.0]]), np.array([4.0, 6.0]))
    assert res.status == "optimal" and res.objective == pytest.approx(-2.8)
    assert np.allclose(res.x, [1.6, 1.2])


@pytest.mark.parametrize("seed", range(20))
def test_simplex_matches_scipy(seed):
    rng = np.random.default_rng(seed)
    m, n = rng.integers(2, 8, 2)
    A = rng.uniform(-1, 2, (m, n))
    b = rng.uniform(-0.5, 3, m)
    A = np.vstack([A, np.eye(n)])
    b = np.r_[b, np.ones(n)]
    c = rng.normal(size=n)
    ref = linprog(c, A_ub=A, b_ub=b, bounds=(0, None), method="highs")
    res = solve_lp(c, A, b)
    if ref.status == 2:
        assert res.status == "infeasible"
    else:
        assert res.status == "optimal" and res.objective == pytest.approx(ref.fun, abs=1e-8)

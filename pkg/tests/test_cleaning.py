import numpy as np
import pytest

from enginecal.cleaning import build_threshold_graph, compress
from enginecal.grid import AdaptiveGrid


def unit(dim=2):
    return AdaptiveGrid(np.zeros(dim), np.ones(dim))


def test_collinear_triple_drops_middle():
    Z = np.array([[0.1, 0.5], [0.4, 0.5], [0.7, 0.5]])
    g = build_threshold_graph(Z, unit(), 0.5)
    assert g.edges == {(0, 1), (1, 2)}
    res = compress(Z, unit(), 0.5)
    assert list(res.kept) == [0, 2] and res.removed == [1]


def test_clique_collapses_to_one():
    rng = np.random.default_rng(0)
    Z = 0.5 + 0.01 * rng.random((12, 2))
    res = compress(Z, unit(), 0.5)
    assert len(res.kept) == 1
    # degree ties resolve by lowest sequence number first, so the newest survives
    assert res.kept[0] == 11
    res = compress(Z, unit(), 0.5, seq=np.arange(12)[::-1])
    assert res.kept[0] == 0


@pytest.mark.parametrize("seed", range(20))
def test_result_is_isolated_and_idempotent(seed):
    rng = np.random.default_rng(seed)
    grid = unit(3)
    grid.split_symmetric(0)
    Z = rng.random((200, 3))
    res = compress(Z, grid, 0.3)
    K = Z[res.kept]
    assert build_threshold_graph(K, grid, 0.3).edges == set()
    again = compress(K, grid, 0.3)
    assert len(again.kept) == len(K)
    assert sorted(res.removed + list(res.kept)) == list(range(200))
    full = build_threshold_graph(Z, grid, 0.3).edges
    for i, w in res.witnesses:
        assert (min(i, w), max(i, w)) in full


def test_witness_is_alive_at_removal():
    rng = np.random.default_rng(3)
    Z = rng.random((80, 2))
    res = compress(Z, unit(), 0.2)
    gone = set()
    for i, w in res.witnesses:
        assert w not in gone
        gone.add(i)


def test_split_removes_edge():
    grid = unit()
    c = 0.5
    d = 0.9 * c * 1.0
    Z = np.array([[0.02, 0.1], [0.02 + d, 0.1]])
    assert build_threshold_graph(Z, grid, c).edges == {(0, 1)}
    grid.split_symmetric(0)
    assert build_threshold_graph(Z, grid, c).edges == set()
    assert len(compress(Z, grid, c).kept) == 2


def test_zero_factor_keeps_all():
    Z = np.zeros((5, 2)) + 0.5
    assert len(compress(Z, unit(), 0.0).kept) == 5
    assert len(compress(np.empty((0, 2)), unit(), 0.5).kept) == 0

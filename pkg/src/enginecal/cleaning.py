"""Adaptive space compressor.

Points closer than a box-size dependent threshold are joined in a threshold
graph; nodes of maximal degree are deleted until every node is isolated.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import cKDTree

from enginecal.grid import AdaptiveGrid


@dataclass
class ThresholdGraph:
    n: int
    edges: set[tuple[int, int]]
    scale: np.ndarray  # per-node box scale (shortest edge of containing box)

    def neighbors(self) -> list[set[int]]:
        nb = [set() for _ in range(self.n)]
        for a, b in self.edges:
            nb[a].add(b)
            nb[b].add(a)
        return nb


@dataclass
class CompressionResult:
    kept: np.ndarray
    removed: list[int] = field(default_factory=list)
    # (removed node, a neighbour still present when it was removed)
    witnesses: list[tuple[int, int]] = field(default_factory=list)


def box_scales(Z: np.ndarray, grid: AdaptiveGrid) -> np.ndarray:
    ids = grid.locate_many(Z)
    cache: dict[int, float] = {}
    out = np.empty(len(ids))
    for k, b in enumerate(ids):
        b = int(b)
        if b not in cache:
            cache[b] = float(grid.boxes[b].edges.min())
        out[k] = cache[b]
    return out


def build_threshold_graph(Z: np.ndarray, grid: AdaptiveGrid, c: float = 0.5) -> ThresholdGraph:
    """Edge (q, r) iff ||z_q - z_r|| < c * min(scale_q, scale_r)."""
    Z = np.atleast_2d(np.asarray(Z, dtype=float))
    n = len(Z)
    if n == 0:
        return ThresholdGraph(0, set(), np.empty(0))
    scale = box_scales(Z, grid)
    if c <= 0:
        return ThresholdGraph(n, set(), scale)
    tree = cKDTree(Z)
    pairs = tree.query_pairs(c * float(scale.max()), output_type="ndarray")
    edges: set[tuple[int, int]] = set()
    if len(pairs):
        a, b = pairs[:, 0], pairs[:, 1]
        dist = np.linalg.norm(Z[a] - Z[b], axis=1)
        ok = dist < c * np.minimum(scale[a], scale[b])
        edges = {(int(min(p, q)), int(max(p, q))) for p, q in zip(a[ok], b[ok])}
    return ThresholdGraph(n, edges, scale)


def compress(Z: np.ndarray, grid: AdaptiveGrid, c: float = 0.5,
             seq: Optional[np.ndarray] = None) -> CompressionResult:
    """Delete a current maximum-degree node (lowest ``seq`` first on ties)
    until the threshold graph is edgeless. Returns the surviving indices."""
    g = build_threshold_graph(Z, grid, c)
    n = g.n
    if seq is None:
        seq = np.arange(n)
    nb = g.neighbors()
    deg = np.array([len(s) for s in nb])
    heap = [(-int(deg[i]), int(seq[i]), i) for i in range(n) if deg[i] > 0]
    heapq.heapify(heap)
    alive = np.ones(n, dtype=bool)
    res = CompressionResult(kept=np.empty(0, dtype=np.int64))
    while heap:
        d, _, i = heapq.heappop(heap)
        if not alive[i] or -d != deg[i] or deg[i] == 0:
            continue
        alive[i] = False
        res.removed.append(i)
        res.witnesses.append((i, min(nb[i])))
        for j in nb[i]:
            nb[j].discard(i)
            deg[j] -= 1
            if deg[j] > 0:
                heapq.heappush(heap, (-int(deg[j]), int(seq[j]), j))
        nb[i].clear()
        deg[i] = 0
    res.kept = np.flatnonzero(alive)
    return res

"""Measurement planning: weighted target choice, Dijkstra routing and ramps."""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from enginecal.grid import AdaptiveGrid


@dataclass
class MeasurementPlan:
    """Waypoints (normalised grid coordinates) and the ramps joining them."""

    path: list[int]
    waypoints: np.ndarray
    ramps: list[np.ndarray] = field(default_factory=list)
    ell: int = 2

    @property
    def s(self) -> int:
        return len(self.ramps)

    def to_dict(self) -> dict:
        return {
            "path": list(self.path),
            "waypoints": self.waypoints.tolist(),
            "ell": self.ell,
            "ramps": [r.tolist() for r in self.ramps],
        }


def sample_target_box(grid: AdaptiveGrid, rng: np.random.Generator) -> int:
    """Draw a box id with probability proportional to its node weight."""
    ids = sorted(grid.boxes)
    w = np.array([grid.node_weight(i) for i in ids])
    cdf = np.cumsum(w)
    k = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return ids[min(k, len(ids) - 1)]


def shortest_path(grid: AdaptiveGrid, source: int, target: int) -> list[int]:
    """Minimum total edge weight box path from ``source`` to ``target`` (Dijkstra)."""
    grid.box(source)
    grid.box(target)
    if source == target:
        return [source]
    dist = {source: 0.0}
    prev: dict[int, int] = {}
    heap = [(0.0, source)]
    done = set()
    while heap:
        d, b = heapq.heappop(heap)
        if b in done:
            continue
        if b == target:
            break
        done.add(b)
        for nb in sorted(grid.adjacency[b]):
            if nb in done:
                continue
            nd = d + grid.edge_weight(b, nb)
            if nd < dist.get(nb, np.inf):
                dist[nb] = nd
                prev[nb] = b
                heapq.heappush(heap, (nd, nb))
    if target not in dist:
        raise ValueError(f"box {target} is unreachable from {source}")
    path = [target]
    while path[-1] != source:
        path.append(prev[path[-1]])
    return path[::-1]


def path_cost(grid: AdaptiveGrid, path: list[int]) -> float:
    return float(sum(grid.edge_weight(a, b) for a, b in zip(path, path[1:])))


def build_ramp(uq: np.ndarray, ur: np.ndarray, ell: int) -> np.ndarray:
    """``ell`` equally spaced points from ``uq`` to ``ur``, endpoints exact."""
    if ell < 2:
        raise ValueError("a measurement ramp needs at least two measurements")
    uq = np.asarray(uq, dtype=float)
    ur = np.asarray(ur, dtype=float)
    i = np.arange(ell)[:, None]
    pts = uq + i * (ur - uq) / (ell - 1)
    pts[-1] = ur
    return pts


def _uniform_in_box(grid: AdaptiveGrid, box_id: int, rng: np.random.Generator) -> np.ndarray:
    b = grid.box(box_id).bounds
    for _ in range(100):
        z = b[:, 0] + rng.random(grid.dim) * (b[:, 1] - b[:, 0])
        if grid.box(box_id).contains(z):
            return z
    return grid.box(box_id).center


def make_plan(grid: AdaptiveGrid, last_point: Optional[np.ndarray], ell: int,
              rng: np.random.Generator, target: Optional[int] = None) -> MeasurementPlan:
    """Plan from the last measured point (or a uniform random start) to a
    weight-sampled target box. Coordinates are grid (dynamic, normalised) ones."""
    if last_point is None:
        start = grid.lower + rng.random(grid.dim) * grid.width
    else:
        start = np.asarray(last_point, dtype=float)
    source = grid.locate(start).id
    if target is None:
        target = sample_target_box(grid, rng)
    path = shortest_path(grid, source, target)
    waypoints = [start] + [_uniform_in_box(grid, b, rng) for b in path[1:]]
    W = np.array(waypoints)
    ramps = [build_ramp(W[q], W[q + 1], ell) for q in range(len(W) - 1)]
    return MeasurementPlan(path, W, ramps, ell)


def dwell_plan(grid: AdaptiveGrid, last_point: np.ndarray, ell: int,
               rng: np.random.Generator) -> MeasurementPlan:
    """Single ramp inside the current box, used when the sampled target is the
    start box and the regular plan would measure nothing."""
    start = np.asarray(last_point, dtype=float)
    b = grid.locate(start).id
    end = _uniform_in_box(grid, b, rng)
    return MeasurementPlan([b, b], np.array([start, end]), [build_ramp(start, end, ell)], ell)

"""Adaptive axis-aligned box partition of the dynamic-actuator domain.

Box bounds live on an integer lattice with ``2**BITS`` cells per axis so that
facet coincidence is an exact integer comparison, whatever the physical
interval. Boxes are half-open ``[lo, hi)`` except on the domain's upper face.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

BITS = 40
FULL = 1 << BITS


@dataclass
class GridBox:
    id: int
    lo: tuple[int, ...]
    hi: tuple[int, ...]
    width: np.ndarray = field(repr=False)  # physical axis extents of the whole domain
    lower: np.ndarray = field(repr=False)
    point_count: int = 0

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def bounds(self) -> np.ndarray:
        """(d, 2) array of physical [lo, hi] per dynamic axis."""
        lo = self.lower + self.width * np.array(self.lo, dtype=float) / FULL
        hi = self.lower + self.width * np.array(self.hi, dtype=float) / FULL
        return np.column_stack([lo, hi])

    @property
    def edges(self) -> np.ndarray:
        return self.width * (np.array(self.hi, dtype=float) - np.array(self.lo, dtype=float)) / FULL

    @property
    def volume(self) -> float:
        return float(np.prod(self.edges))

    @property
    def center(self) -> np.ndarray:
        return self.bounds.mean(axis=1)

    def contains(self, z: np.ndarray) -> bool:
        s = _scaled(np.atleast_2d(z), self.lower, self.width)[0]
        return bool(np.all(_inside(s, self.lo, self.hi)))


def _scaled(Z: np.ndarray, lower: np.ndarray, width: np.ndarray) -> np.ndarray:
    return (Z - lower) / width * float(FULL)


def _inside(s: np.ndarray, lo: Sequence[int], hi: Sequence[int]) -> np.ndarray:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    upper_ok = (s < hi) | ((hi == FULL) & (s <= hi))
    return (s >= lo) & upper_ok


def adjacent(a: GridBox, b: GridBox) -> bool:
    """True iff the boxes share a facet of positive (d-1)-dimensional measure."""
    if a.id == b.id:
        return False
    touching = 0
    for alo, ahi, blo, bhi in zip(a.lo, a.hi, b.lo, b.hi):
        if ahi == blo or bhi == alo:
            touching += 1
        elif max(alo, blo) >= min(ahi, bhi):
            return False
    return touching == 1


class AdaptiveGrid:
    """Refinable partition of ``prod [lower_a, upper_a]`` with box adjacency graph."""

    def __init__(self, lower: Sequence[float], upper: Sequence[float],
                 divisions: int | Sequence[int] = 1, min_edge: float = 2.0 ** -14):
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise ValueError("lower and upper must be 1-d and of equal length")
        if np.any(self.upper <= self.lower):
            raise ValueError("every grid axis needs positive extent (static axes are excluded)")
        self.dim = len(self.lower)
        self.width = self.upper - self.lower
        if np.isscalar(divisions):
            divisions = [int(divisions)] * self.dim
        self.divisions = [int(d) for d in divisions]
        if any(d < 1 for d in self.divisions):
            raise ValueError("divisions must be positive")
        # smallest admissible edge as a fraction of the axis extent
        self.min_edge = float(min_edge)
        self._min_cells = max(1, int(round(self.min_edge * FULL)))

        self.boxes: dict[int, GridBox] = {}
        self.adjacency: dict[int, set[int]] = {}
        self.log: list[dict] = []
        self._splits: dict[int, tuple[tuple[int, ...], tuple[int, ...], list[int]]] = {}
        self._next_id = 0
        self._cuts = [[(j * FULL) // n for j in range(n + 1)] for n in self.divisions]
        self._roots = np.empty(self.divisions, dtype=np.int64)

        self._Z = np.empty((0, self.dim))
        self._members: dict[int, list[int]] = {}

        for idx in np.ndindex(*self.divisions):
            lo = tuple(self._cuts[a][i] for a, i in enumerate(idx))
            hi = tuple(self._cuts[a][i + 1] for a, i in enumerate(idx))
            box = self._new_box(lo, hi)
            self._roots[idx] = box.id
        for idx in np.ndindex(*self.divisions):
            bid = int(self._roots[idx])
            for a in range(self.dim):
                if idx[a] + 1 < self.divisions[a]:
                    nidx = list(idx)
                    nidx[a] += 1
                    nid = int(self._roots[tuple(nidx)])
                    self.adjacency[bid].add(nid)
                    self.adjacency[nid].add(bid)

    # construction helpers -----------------------------------------------------
    def _new_box(self, lo, hi) -> GridBox:
        box = GridBox(self._next_id, tuple(int(v) for v in lo), tuple(int(v) for v in hi),
                      self.width, self.lower)
        self._next_id += 1
        self.boxes[box.id] = box
        self.adjacency[box.id] = set()
        self._members[box.id] = []
        return box

    def __len__(self) -> int:
        return len(self.boxes)

    def __contains__(self, box_id: int) -> bool:
        return box_id in self.boxes

    def box(self, box_id: int) -> GridBox:
        try:
            return self.boxes[box_id]
        except KeyError:
            raise KeyError(f"unknown grid box {box_id}") from None

    @property
    def total_volume(self) -> float:
        return float(np.prod(self.width))

    @property
    def n_points(self) -> int:
        return len(self._Z)

    # point location -------------------------------------------------------------
    def locate_many(self, Z: np.ndarray) -> np.ndarray:
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if Z.shape[1] != self.dim:
            raise ValueError(f"expected points of dimension {self.dim}")
        outside = np.any((Z < self.lower) | (Z > self.upper), axis=1)
        if np.any(outside):
            raise ValueError(f"point {Z[np.argmax(outside)]} lies outside the grid domain")
        S = _scaled(Z, self.lower, self.width)
        idx = []
        for a in range(self.dim):
            cuts = np.asarray(self._cuts[a], dtype=float)
            i = np.searchsorted(cuts, S[:, a], side="right") - 1
            idx.append(np.clip(i, 0, self.divisions[a] - 1))
        ids = self._roots[tuple(idx)].copy()
        # descend the split tree level by level
        pending = np.flatnonzero(np.isin(ids, list(self._splits)) if self._splits else [])
        while pending.size:
            nxt = []
            for bid in np.unique(ids[pending]):
                rows = pending[ids[pending] == bid]
                axes, mids, children = self._splits[int(bid)]
                code = np.zeros(rows.size, dtype=np.int64)
                for bit, (ax, mid) in enumerate(zip(axes, mids)):
                    code |= (S[rows, ax] >= mid).astype(np.int64) << bit
                ids[rows] = np.asarray(children)[code]
                nxt.append(rows)
            pending = np.concatenate(nxt)
            pending = pending[np.isin(ids[pending], list(self._splits))]
        return ids

    def locate(self, z: np.ndarray) -> GridBox:
        return self.boxes[int(self.locate_many(np.asarray(z, dtype=float)[None, :])[0])]

    def add_points(self, Z: np.ndarray) -> np.ndarray:
        """Register data points; returns their box ids."""
        Z = np.atleast_2d(np.asarray(Z, dtype=float))
        if len(Z) == 0:
            return np.empty(0, dtype=np.int64)
        ids = self.locate_many(Z)
        start = len(self._Z)
        self._Z = np.vstack([self._Z, Z])
        for k, bid in enumerate(ids):
            self._members[int(bid)].append(start + k)
            self.boxes[int(bid)].point_count += 1
        return ids

    def members(self, box_id: int) -> list[int]:
        return list(self._members[box_id])

    # weights ----------------------------------------------------------------------
    def node_weight(self, box_id: int) -> float:
        b = self.box(box_id)
        return b.volume / (b.point_count + 1)

    def edge_weight(self, a_id: int, b_id: int) -> float:
        a, b = self.box(a_id), self.box(b_id)
        if b_id not in self.adjacency[a_id]:
            raise ValueError(f"boxes {a_id} and {b_id} are not adjacent")
        return (a.volume + b.volume) / (a.point_count + b.point_count + 1)

    # refinement -------------------------------------------------------------------
    def can_split(self, box_id: int, axis: Optional[int] = None) -> bool:
        b = self.box(box_id)
        axes = range(self.dim) if axis is None else [axis]
        return all((b.hi[a] - b.lo[a]) // 2 >= self._min_cells for a in axes)

    def split_symmetric(self, box_id: int) -> list[GridBox]:
        """Bisect every axis; returns the 2**d children (empty if at minimum size)."""
        return self._split(box_id, tuple(range(self.dim)), "symmetric")

    def split_asymmetric(self, box_id: int, axis: int) -> list[GridBox]:
        """Bisect one axis; returns the two children (empty if at minimum size)."""
        if not 0 <= axis < self.dim:
            raise ValueError(f"axis {axis} is not a dynamic grid axis (dim={self.dim})")
        return self._split(box_id, (axis,), "asymmetric")

    def _split(self, box_id: int, axes: tuple[int, ...], kind: str) -> list[GridBox]:
        parent = self.box(box_id)
        if not all((parent.hi[a] - parent.lo[a]) // 2 >= self._min_cells for a in axes):
            return []
        mids = tuple((parent.lo[a] + parent.hi[a]) // 2 for a in axes)
        children = []
        for code in range(1 << len(axes)):
            lo, hi = list(parent.lo), list(parent.hi)
            for bit, (a, mid) in enumerate(zip(axes, mids)):
                if code >> bit & 1:
                    lo[a] = mid
                else:
                    hi[a] = mid
            children.append(self._new_box(lo, hi))
        old_neighbors = self.adjacency.pop(parent.id)
        for nb in old_neighbors:
            self.adjacency[nb].discard(parent.id)
        candidates = [self.boxes[i] for i in old_neighbors] + children
        for c in children:
            for other in candidates:
                if adjacent(c, other):
                    self.adjacency[c.id].add(other.id)
                    self.adjacency[other.id].add(c.id)
        del self.boxes[parent.id]
        self._splits[parent.id] = (axes, mids, [c.id for c in children])
        # redistribute points
        pts = self._members.pop(parent.id)
        if pts:
            ids = self.locate_many(self._Z[pts])
            for p, bid in zip(pts, ids):
                self._members[int(bid)].append(p)
                self.boxes[int(bid)].point_count += 1
        self.log.append({"box": parent.id, "kind": kind, "axes": list(axes),
                         "children": [c.id for c in children]})
        return children

    # diagnostics ------------------------------------------------------------------------
    def mean_box_volume_near(self, z: np.ndarray, radius: float, rng: np.random.Generator,
                             samples: int = 2000) -> float:
        """Average volume of the box containing a uniform random point of a ball
        (clipped to the domain) around ``z``."""
        z = np.asarray(z, dtype=float)
        d = self.dim
        dirs = rng.standard_normal((samples, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        r = radius * rng.random(samples) ** (1.0 / d)
        P = np.clip(z + dirs * r[:, None], self.lower, self.upper)
        ids = self.locate_many(P)
        return float(np.mean([self.boxes[int(i)].volume for i in ids]))

    # persistence ------------------------------------------------------------------------
    def snapshot(self) -> dict:
        return {
            "version": 1,
            "lower": self.lower.tolist(),
            "upper": self.upper.tolist(),
            "divisions": list(self.divisions),
            "min_edge": self.min_edge,
            "bits": BITS,
            "boxes": [{"id": b.id, "lo": list(b.lo), "hi": list(b.hi), "count": b.point_count}
                      for b in sorted(self.boxes.values(), key=lambda b: b.id)],
            "adjacency": {str(k): sorted(v) for k, v in sorted(self.adjacency.items())},
            "splits": [{"box": k, "axes": list(v[0]), "mids": list(v[1]), "children": v[2]}
                       for k, v in sorted(self._splits.items())],
            "log": self.log,
            "next_id": self._next_id,
        }

    @classmethod
    def from_snapshot(cls, snap: dict, points: Optional[np.ndarray] = None) -> "AdaptiveGrid":
        if snap.get("bits", BITS) != BITS:
            raise ValueError("snapshot lattice resolution does not match this build")
        grid = cls(snap["lower"], snap["upper"], snap["divisions"], snap.get("min_edge", 2.0 ** -14))
        grid.boxes.clear()
        grid.adjacency.clear()
        grid._members.clear()
        for b in snap["boxes"]:
            box = GridBox(b["id"], tuple(b["lo"]), tuple(b["hi"]), grid.width, grid.lower)
            grid.boxes[box.id] = box
            grid._members[box.id] = []
        grid.adjacency = {int(k): set(v) for k, v in snap["adjacency"].items()}
        grid._splits = {s["box"]: (tuple(s["axes"]), tuple(s["mids"]), list(s["children"]))
                        for s in snap["splits"]}
        grid.log = list(snap["log"])
        grid._next_id = snap["next_id"]
        if points is not None and len(points):
            grid.add_points(points)
            counts = {b["id"]: b["count"] for b in snap["boxes"]}
            if any(grid.boxes[i].point_count != c for i, c in counts.items()):
                raise ValueError("snapshot point counts do not match the supplied points")
        return grid


def brute_force_adjacency(boxes: Iterable[GridBox]) -> set[tuple[int, int]]:
    """All adjacent pairs (i < j) by exhaustive facet comparison."""
    boxes = list(boxes)
    pairs = set()
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            if adjacent(a, b):
                pairs.add((min(a.id, b.id), max(a.id, b.id)))
    return pairs

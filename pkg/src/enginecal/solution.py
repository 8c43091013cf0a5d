"""Solution maps: one representative (or a synthetic fill) per operation cell."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class CellEntry:
    u: np.ndarray
    y: Optional[np.ndarray]
    index: Optional[int] = None  # position in the reduced data set; None if synthetic
    synthetic: bool = False


class SolutionMap:
    def __init__(self, k: int, m: int, n: int):
        self.k, self.m, self.n = k, m, n
        self.cells: list[list[Optional[CellEntry]]] = [[None] * k for _ in range(k)]

    def __getitem__(self, ft: tuple[int, int]) -> Optional[CellEntry]:
        return self.cells[ft[0]][ft[1]]

    def __setitem__(self, ft: tuple[int, int], entry: Optional[CellEntry]) -> None:
        self.cells[ft[0]][ft[1]] = entry

    def copy(self) -> "SolutionMap":
        out = SolutionMap(self.k, self.m, self.n)
        out.cells = [row[:] for row in self.cells]
        return out

    def entries(self):
        for f in range(self.k):
            for t in range(self.k):
                if self.cells[f][t] is not None:
                    yield (f, t), self.cells[f][t]

    @property
    def empty_cells(self) -> list[tuple[int, int]]:
        return [(f, t) for f in range(self.k) for t in range(self.k) if self.cells[f][t] is None]

    @property
    def complete(self) -> bool:
        return not self.empty_cells

    @property
    def synthetic_cells(self) -> list[tuple[int, int]]:
        return [ft for ft, e in self.entries() if e.synthetic]

    def actuator_maps(self) -> np.ndarray:
        """(m, k, k) engine maps; NaN marks empty cells."""
        out = np.full((self.m, self.k, self.k), np.nan)
        for (f, t), e in self.entries():
            out[:, f, t] = e.u
        return out

    def measurand_map(self, j: int) -> np.ndarray:
        out = np.full((self.k, self.k), np.nan)
        for (f, t), e in self.entries():
            if e.y is not None:
                out[f, t] = e.y[j]
        return out

    def to_dict(self) -> dict:
        cells = []
        for (f, t), e in self.entries():
            cells.append({"f": f, "t": t, "index": e.index, "synthetic": e.synthetic,
                          "u": [float(v) for v in e.u],
                          "y": None if e.y is None else [float(v) for v in e.y]})
        return {"k": self.k, "m": self.m, "n": self.n, "cells": cells}

    @classmethod
    def from_dict(cls, d: dict) -> "SolutionMap":
        sol = cls(d["k"], d["m"], d["n"])
        for c in d["cells"]:
            sol[c["f"], c["t"]] = CellEntry(np.array(c["u"]), None if c["y"] is None else np.array(c["y"]),
                                            c["index"], c["synthetic"])
        return sol

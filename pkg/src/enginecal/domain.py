"""Mapping between physical actuator vectors and normalised dynamic coordinates."""
from __future__ import annotations

from typing import Sequence

import numpy as np


class ActuatorDomain:
    """Admissible box D = prod [lo_i, hi_i]; grid coordinates are the dynamic
    actuators rescaled to [0, 1]. Static actuators are pinned to their value."""

    def __init__(self, lo: Sequence[float], hi: Sequence[float]):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if np.any(self.lo > self.hi):
            raise ValueError("actuator interval with lo > hi")
        self.dynamic = np.flatnonzero(self.hi > self.lo)
        self.static = np.flatnonzero(self.hi == self.lo)
        self.span = (self.hi - self.lo)[self.dynamic]

    @classmethod
    def from_oracle(cls, oracle) -> "ActuatorDomain":
        return cls(oracle.lo, oracle.hi)

    @property
    def m(self) -> int:
        return len(self.lo)

    @property
    def dim(self) -> int:
        return len(self.dynamic)

    def to_grid(self, U: np.ndarray) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        Z = (U[..., self.dynamic] - self.lo[self.dynamic]) / self.span
        return np.clip(Z, 0.0, 1.0)

    def to_actuators(self, Z: np.ndarray) -> np.ndarray:
        Z = np.asarray(Z, dtype=float)
        U = np.broadcast_to(self.lo, Z.shape[:-1] + (self.m,)).copy()
        U[..., self.dynamic] = self.lo[self.dynamic] + np.clip(Z, 0.0, 1.0) * self.span
        return U

    def contains(self, U: np.ndarray) -> np.ndarray:
        U = np.atleast_2d(np.asarray(U, dtype=float))
        return np.all((U >= self.lo) & (U <= self.hi), axis=1)

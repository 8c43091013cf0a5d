"""Executing measurement plans against the oracle.

Along each ramp a point is stored when it differs relevantly from the last
stored one, or when too many consecutive points were skipped. A reading
outside the noncritical range aborts the whole plan; latency measurands are
extrapolated so the plan is abandoned before they leave the safe band.
"""
from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from enginecal.domain import ActuatorDomain
from enginecal.engine import DomainError, EngineOracle
from enginecal.planner import MeasurementPlan

log = logging.getLogger(__name__)


class Dataset:
    """Append-only store of data points (u, y) with global sequence numbers."""

    def __init__(self, m: int, n: int):
        self.m = m
        self.n = n
        self._U: list[np.ndarray] = []
        self._Y: list[np.ndarray] = []
        self._seq: list[int] = []
        self._cache: Optional[tuple[np.ndarray, np.ndarray, np.ndarray]] = None

    def __len__(self) -> int:
        return len(self._U)

    def append(self, u: np.ndarray, y: np.ndarray, seq: Optional[int] = None) -> int:
        self._U.append(np.array(u, dtype=float))
        self._Y.append(np.array(y, dtype=float))
        self._seq.append(len(self._seq) if seq is None else int(seq))
        self._cache = None
        return len(self._U) - 1

    def point(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self._U[i], self._Y[i]

    def extend(self, U: np.ndarray, Y: np.ndarray) -> None:
        for u, y in zip(U, Y):
            self.append(u, y)

    def _arrays(self):
        if self._cache is None:
            U = np.array(self._U).reshape(-1, self.m)
            Y = np.array(self._Y).reshape(-1, self.n)
            self._cache = (U, Y, np.array(self._seq, dtype=np.int64))
        return self._cache

    @property
    def U(self) -> np.ndarray:
        return self._arrays()[0]

    @property
    def Y(self) -> np.ndarray:
        return self._arrays()[1]

    @property
    def seq(self) -> np.ndarray:
        return self._arrays()[2]

    def subset(self, idx) -> "Dataset":
        out = Dataset(self.m, self.n)
        for i in idx:
            out.append(self._U[i], self._Y[i], self._seq[i])
        return out

    def to_lines(self) -> list[str]:
        """Dataset log lines: ``seq,u_1..u_m,y_1..y_n`` with repr-exact floats."""
        return [",".join([str(s)] + [repr(float(v)) for v in u] + [repr(float(v)) for v in y])
                for s, u, y in zip(self._seq, self._U, self._Y)]

    def checksum(self) -> str:
        h = hashlib.sha256()
        for line in self.to_lines():
            h.update(line.encode())
            h.update(b"\n")
        return h.hexdigest()

    @classmethod
    def from_lines(cls, lines, m: int, n: int) -> "Dataset":
        ds = cls(m, n)
        for line in lines:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(",")
            vals = np.array([float(p) for p in parts[1:]])
            ds.append(vals[:m], vals[m:], int(parts[0]))
        return ds


@dataclass
class MeasurementParams:
    thresholds: np.ndarray
    min_gap: int = 4
    safety_margin: float = 0.05
    horizon: int = 3
    latency: Optional[np.ndarray] = None  # boolean mask of lag-prone measurands


@dataclass
class RampOutcome:
    stored: list[int] = field(default_factory=list)
    stored_steps: list[int] = field(default_factory=list)
    evaluated: int = 0
    aborted: bool = False
    abort_point: Optional[np.ndarray] = None
    reason: str = ""


@dataclass
class ExecutionResult:
    last_valid: Optional[np.ndarray]
    outcomes: list[RampOutcome]
    events: list[dict]
    evaluations: int

    @property
    def aborted(self) -> bool:
        return any(o.aborted for o in self.outcomes)

    @property
    def stored(self) -> list[int]:
        return [i for o in self.outcomes for i in o.stored]


def relevance_filter(y_new: np.ndarray, y_last: np.ndarray, thresholds: np.ndarray) -> bool:
    """True iff some measurand moved by at least its threshold."""
    return bool(np.any(np.abs(np.asarray(y_new) - np.asarray(y_last)) >= np.asarray(thresholds)))


def predict_critical(history: np.ndarray, horizon: int, y_lo: np.ndarray, y_hi: np.ndarray,
                     margin: float, mask: Optional[np.ndarray] = None) -> bool:
    """Linear extrapolation of the last two readings ``horizon`` steps ahead;
    true if a masked measurand would leave the band shrunk by ``margin`` (a
    fraction of each interval width)."""
    H = np.atleast_2d(np.asarray(history, dtype=float))
    if len(H) < 2:
        return False
    y_lo = np.asarray(y_lo, dtype=float)
    y_hi = np.asarray(y_hi, dtype=float)
    if mask is None:
        mask = np.ones(H.shape[1], dtype=bool)
    if not np.any(mask):
        return False
    pred = H[-1] + horizon * (H[-1] - H[-2])
    band = margin * (y_hi - y_lo)
    out = (pred < y_lo + band) | (pred > y_hi - band)
    return bool(np.any(out[mask]))


def execute_plan(plan: MeasurementPlan, oracle: EngineOracle, dataset: Dataset,
                 params: MeasurementParams, domain: ActuatorDomain,
                 on_store: Optional[Callable[[int], None]] = None) -> ExecutionResult:
    """Run the plan's ramps in order, appending stored points to ``dataset``.

    ``on_store(index)`` is called right after a point is stored (used for the
    stack-minimum check). Returns the last in-range actuator vector.
    """
    y_lo, y_hi = oracle.y_lo, oracle.y_hi
    last_valid = None
    outcomes: list[RampOutcome] = []
    events: list[dict] = []
    history: list[np.ndarray] = []
    evals = 0
    stop = False
    for r, ramp in enumerate(plan.ramps):
        out = RampOutcome()
        outcomes.append(out)
        y_anchor = None
        last_i = None
        for i, z in enumerate(ramp):
            u = domain.to_actuators(z)
            try:
                y = oracle.evaluate(u)
            except DomainError as exc:
                log.warning("ramp %d step %d rejected by oracle: %s", r, i, exc)
                out.aborted, out.abort_point, out.reason = True, u, f"domain: {exc}"
                events.append({"ramp": r, "step": i, "action": "aborted", "reason": "domain"})
                stop = True
                break
            evals += 1
            out.evaluated += 1
            if np.any(y < y_lo) or np.any(y > y_hi):
                out.aborted, out.abort_point, out.reason = True, u, "critical"
                events.append({"ramp": r, "step": i, "action": "aborted", "reason": "critical"})
                stop = True
                break
            history.append(y)
            keep = (y_anchor is None
                    or relevance_filter(y, y_anchor, params.thresholds)
                    or i - last_i >= params.min_gap)
            if keep:
                idx = dataset.append(u, y)
                out.stored.append(idx)
                out.stored_steps.append(i)
                y_anchor, last_i = y, i
                events.append({"ramp": r, "step": i, "action": "stored", "index": idx})
                if on_store is not None:
                    on_store(idx)
            else:
                events.append({"ramp": r, "step": i, "action": "skipped"})
            last_valid = u
            if params.latency is not None and predict_critical(
                    np.array(history[-2:]), params.horizon, y_lo, y_hi,
                    params.safety_margin, params.latency):
                out.aborted, out.abort_point, out.reason = True, u, "predicted"
                events.append({"ramp": r, "step": i, "action": "rerouted", "reason": "predicted"})
                stop = True
                break
        if stop:
            break
    return ExecutionResult(last_valid, outcomes, events, evals)

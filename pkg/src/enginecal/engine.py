"""Synthetic multi-actuator engine used as the measurement oracle.

The response is a smooth, physically flavoured base model plus a handful of
configurable nonsmooth ridge terms and an optional first-order lag per
measurand. Everything is deterministic; the lag is the only state.
"""
from __future__ import annotations

from pathlib import Path
from typing import Literal, Optional, Sequence

import numpy as np
import yaml
from pydantic import BaseModel, Field, field_validator, model_validator

ENGINE_SCHEMA_VERSION = 1

ACTUATOR_NAMES = ("RF", "IF", "RP", "AF", "TG", "MT", "PI", "PT")

MEASURAND_NAMES = (
    "torque",
    "fuel_mass_flow",
    "co",
    "hc",
    "nox",
    "soot",
    "imep",
    "lambda",
    "manifold_pressure",
    "boost_pressure",
    "max_cylinder_pressure",
    "manifold_temperature",
    "critical_temperature",
    "specific_fuel_consumption",
    "co_ppm",
    "hc_ppm",
    "nox_ppm",
    "soot_ppm",
)

# Normalisation intervals for the response formulas. They are fixed so the
# engine does not change when a run narrows its admissible intervals.
REFERENCE_INTERVALS = {
    "RF": (1000.0, 2600.0),
    "IF": (6.0, 60.0),
    "RP": (295677.0, 1126537.0),
    "AF": (275.0, 991.0),
    "TG": (30.0, 85.0),
    "MT": (0.0, 10.0),
    "PI": (0.0, 2.0),
    "PT": (1540.0, 2565.0),
}


class DomainError(ValueError):
    """Actuator vector outside the admissible domain."""


class ActuatorSpec(BaseModel):
    name: Literal["RF", "IF", "RP", "AF", "TG", "MT", "PI", "PT"]
    unit: str
    interval: tuple[float, float]

    @field_validator("interval")
    @classmethod
    def _ordered(cls, v):
        if v[0] > v[1]:
            raise ValueError(f"interval lower bound {v[0]} exceeds upper bound {v[1]}")
        return v

    @property
    def lo(self) -> float:
        return self.interval[0]

    @property
    def hi(self) -> float:
        return self.interval[1]

    @property
    def static(self) -> bool:
        return self.interval[0] == self.interval[1]


class MeasurandSpec(BaseModel):
    name: str
    unit: str
    noncritical: tuple[float, float]
    lag: float = Field(1.0, gt=0.0, le=1.0)
    latency: bool = False

    @field_validator("noncritical")
    @classmethod
    def _finite(cls, v):
        if not (np.isfinite(v[0]) and np.isfinite(v[1]) and v[0] <= v[1]):
            raise ValueError(f"noncritical interval {v} must be finite and ordered")
        return v

    @property
    def width(self) -> float:
        return self.noncritical[1] - self.noncritical[0]


class RidgeSpec(BaseModel):
    """Nonsmooth term built from max(0, affine) pieces.

    ``coefficients`` act on reference-normalised actuators; the affine form is
    ``offset + sum(c_a * x_a)``. Shapes: ``hinge`` max(0, l), ``step``
    clip(l / width, 0, 1), ``notch`` max(0, 1 - |l| / width).
    """

    measurand: str
    shape: Literal["hinge", "step", "notch"]
    mode: Literal["add", "scale"] = "add"
    offset: float = 0.0
    coefficients: dict[str, float]
    width: float = Field(1.0, gt=0.0)
    amplitude: float
    locus: dict[str, float] = Field(default_factory=dict)

    @field_validator("measurand")
    @classmethod
    def _known(cls, v):
        if v not in MEASURAND_NAMES:
            raise ValueError(f"unknown measurand {v!r}")
        return v


class EngineConfig(BaseModel):
    schema_version: int = ENGINE_SCHEMA_VERSION
    actuators: list[ActuatorSpec]
    measurands: list[MeasurandSpec]
    ridges: list[RidgeSpec] = Field(default_factory=list)
    control_points: list[dict[str, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def _check(self):
        if self.schema_version != ENGINE_SCHEMA_VERSION:
            raise ValueError(f"unsupported engine schema version {self.schema_version}")
        names = [a.name for a in self.actuators]
        if tuple(names) != ACTUATOR_NAMES:
            raise ValueError(f"actuators must be {ACTUATOR_NAMES}, got {names}")
        mnames = [m.name for m in self.measurands]
        if tuple(mnames) != MEASURAND_NAMES:
            raise ValueError(f"measurands must be {MEASURAND_NAMES}, got {mnames}")
        for r in self.ridges:
            bad = set(r.coefficients) - set(ACTUATOR_NAMES)
            if bad:
                raise ValueError(f"ridge coefficients name unknown actuators {sorted(bad)}")
        return self

    def with_intervals(self, intervals: dict[str, Sequence[float] | float]) -> "EngineConfig":
        """Copy with some actuator intervals replaced (a scalar makes it static)."""
        acts = []
        for a in self.actuators:
            if a.name in intervals:
                v = intervals[a.name]
                iv = (float(v), float(v)) if np.isscalar(v) else (float(v[0]), float(v[1]))
                acts.append(a.model_copy(update={"interval": iv}))
            else:
                acts.append(a)
        return self.model_copy(update={"actuators": acts})


def load_engine_config(path: str | Path) -> EngineConfig:
    with open(path) as fh:
        return EngineConfig.model_validate(yaml.safe_load(fh))


def default_engine_config() -> EngineConfig:
    from enginecal.resources import config_path

    return load_engine_config(config_path("engine_default.yaml"))


def _ridge_shape(shape: str, lin: np.ndarray, width: float) -> np.ndarray:
    if shape == "hinge":
        return np.maximum(0.0, lin)
    if shape == "step":
        z = lin / width
        return np.maximum(0.0, z) - np.maximum(0.0, z - 1.0)
    return np.maximum(0.0, 1.0 - np.abs(lin) / width)


class EngineOracle:
    """Evaluation oracle F: R^8 -> R^18 with per-measurand first-order lag."""

    def __init__(self, config: EngineConfig, lag: Optional[Sequence[float]] = None):
        self.config = config
        self.actuators = list(config.actuators)
        self.measurands = list(config.measurands)
        self.m = len(self.actuators)
        self.n = len(self.measurands)
        self.lo = np.array([a.lo for a in self.actuators])
        self.hi = np.array([a.hi for a in self.actuators])
        self.freq = ACTUATOR_NAMES.index("RF")
        self.torq = MEASURAND_NAMES.index("torque")
        self.fuel = MEASURAND_NAMES.index("fuel_mass_flow")
        if lag is None:
            lag = [ms.lag for ms in self.measurands]
        self.alpha = np.asarray(lag, dtype=float)
        if self.alpha.shape != (self.n,) or np.any(self.alpha <= 0) or np.any(self.alpha > 1):
            raise ValueError("lag coefficients must be n values in (0, 1]")
        self._ref_lo = np.array([REFERENCE_INTERVALS[a][0] for a in ACTUATOR_NAMES])
        self._ref_w = np.array([REFERENCE_INTERVALS[a][1] - REFERENCE_INTERVALS[a][0]
                                for a in ACTUATOR_NAMES])
        self._ridges = []
        for r in config.ridges:
            c = np.array([r.coefficients.get(a, 0.0) for a in ACTUATOR_NAMES])
            self._ridges.append((MEASURAND_NAMES.index(r.measurand), r.shape, r.mode,
                                 r.offset, c, r.width, r.amplitude))
        self._state: Optional[np.ndarray] = None
        self.evaluations = 0

    # domain -----------------------------------------------------------------
    @property
    def dynamic(self) -> np.ndarray:
        """Indices of dynamic actuators."""
        return np.flatnonzero(self.hi > self.lo)

    @property
    def y_lo(self) -> np.ndarray:
        return np.array([ms.noncritical[0] for ms in self.measurands])

    @property
    def y_hi(self) -> np.ndarray:
        return np.array([ms.noncritical[1] for ms in self.measurands])

    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def in_domain(self, u: np.ndarray) -> bool:
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))

    def in_range(self, y: np.ndarray) -> bool:
        y = np.asarray(y, dtype=float)
        return bool(np.all(y >= self.y_lo) and np.all(y <= self.y_hi))

    def normalized(self, u: np.ndarray) -> np.ndarray:
        """Reference-normalised actuator coordinates (may fall outside [0, 1])."""
        return (np.asarray(u, dtype=float) - self._ref_lo) / self._ref_w

    def physical(self, x: dict[str, float]) -> np.ndarray:
        """Map a name -> reference-normalised coordinate dict to physical units.

        Actuators absent from ``x`` sit at the centre of their admissible interval.
        """
        u = self.center()
        for name, val in x.items():
            i = ACTUATOR_NAMES.index(name)
            u[i] = self._ref_lo[i] + val * self._ref_w[i]
        return u

    # response ---------------------------------------------------------------
    def ideal(self, u: np.ndarray) -> np.ndarray:
        """Lag-free response F(u) for one vector or an (N, m) batch. No domain check."""
        u = np.asarray(u, dtype=float)
        single = u.ndim == 1
        U = np.atleast_2d(u)
        Y = _base_response(U, self.normalized(U))
        if self._ridges:
            X = self.normalized(U)
            for j, shape, mode, offset, c, width, amp in self._ridges:
                s = _ridge_shape(shape, offset + X @ c, width)
                if mode == "add":
                    Y[:, j] += amp * s
                else:
                    Y[:, j] *= 1.0 + amp * s
        return Y[0] if single else Y

    def evaluate(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.m,):
            raise DomainError(f"expected {self.m} actuator values, got shape {u.shape}")
        if not self.in_domain(u):
            bad = [self.actuators[i].name for i in np.flatnonzero((u < self.lo) | (u > self.hi))]
            raise DomainError(f"actuators outside admissible intervals: {bad}")
        f = self.ideal(u)
        if self._state is None:
            y = f
        else:
            y = self.alpha * f + (1.0 - self.alpha) * self._state
        self._state = y
        self.evaluations += 1
        return y.copy()

    def reset_lag(self) -> None:
        self._state = None

    @property
    def lag_state(self) -> Optional[np.ndarray]:
        return None if self._state is None else self._state.copy()

    @lag_state.setter
    def lag_state(self, y: Optional[Sequence[float]]) -> None:
        self._state = None if y is None else np.asarray(y, dtype=float).copy()


def _base_response(U: np.ndarray, X: np.ndarray) -> np.ndarray:
    rf, q, rp, af, tg, mt, pi, pt = (U[:, i] for i in range(8))
    x_rf, x_if, x_rp, x_af, x_tg, x_mt, _, x_pt = (X[:, i] for i in range(8))
    load = q / 60.0

    eta = (0.36 + 0.05 * x_mt - 0.015 * (x_rf - 0.45) ** 2 + 0.02 * x_rp
           - 0.008 * x_rp ** 2 + 0.015 * (1.0 - np.exp(-3.0 * x_af))
           + 0.005 * pi - 0.01 * (x_pt - 0.3) ** 2)
    torque_ind = 11.2 * q * eta
    friction = 12.0 + 10.0 * x_rf + 6.0 * x_rf ** 2 + 4.0 * x_tg
    torque = torque_ind - friction
    fuel = 9.96e-5 * (q + pi) * rf  # kg/h, four cylinders

    boost = 1.0 + 1.4 * x_tg * (0.3 + 0.7 * x_rf) * (0.4 + 0.6 * x_if)
    manifold_p = 0.98 * boost + 0.02
    lam = af * (0.6 + 0.4 * boost) / (4.0 * (q + pi))

    burn_t = 1750.0 + 600.0 * load + 150.0 * x_mt + 80.0 * x_rp - 90.0 * x_af
    ei_nox = 10.0 * np.exp((burn_t - 2000.0) / 260.0)
    ei_co = (4.0 + 25.0 * np.maximum(0.0, 1.5 - lam) ** 2 + 6.0 * (1.0 - x_mt) * (1.0 - load)
             + 3.0 * (1.0 - x_rp))
    ei_hc = 0.25 + 0.4 * (1.0 - x_mt) * (1.0 - load) + 0.1 * x_pt
    ei_soot = 0.05 + 0.6 * np.exp(-(lam - 1.0)) * (1.2 - 0.6 * x_rp)
    nox = fuel * ei_nox
    co = fuel * ei_co
    hc = fuel * ei_hc
    soot = fuel * ei_soot

    imep = torque_ind * 0.0628
    pmax = 40.0 * boost * (1.0 + 0.1 * x_rp) + 1.3 * q * (0.7 + 0.06 * mt)
    manifold_t = 300.0 + 45.0 * (boost - 1.0) + 5.0 * x_rf
    crit_t = 900.0 + 350.0 * load - 120.0 * x_mt + 80.0 * x_pt + 40.0 * x_tg
    power_kw = torque * rf * 2.0 * np.pi / 60.0 / 1000.0
    sfc = fuel * 1000.0 / np.maximum(power_kw, 0.5)

    exhaust = af * 1e-6 * 2.0 * rf * 60.0 * boost + fuel  # kg/h
    co_ppm = co / exhaust * 1e3 / 28.0 * 29.0
    hc_ppm = hc / exhaust * 1e3 / 44.0 * 29.0
    nox_ppm = nox / exhaust * 1e3 / 46.0 * 29.0
    soot_ppm = soot / exhaust * 1e3

    return np.column_stack([
        torque, fuel, co, hc, nox, soot, imep, lam, manifold_p, boost, pmax,
        manifold_t, crit_t, sfc, co_ppm, hc_ppm, nox_ppm, soot_ppm,
    ])

"""Operation field discretisation, stacks and driving-cycle weights."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

G = 9.81


@dataclass
class VehicleParams:
    mass: float = 1400.0  # kg
    rolling_coeff: float = 0.012
    drag_area_coeff: float = 0.65  # c_d * A, m^2
    air_density: float = 1.20  # kg/m^3
    wheel_radius: float = 0.31  # m
    gear_ratios: tuple[float, ...] = (3.6, 2.1, 1.4, 1.05, 0.82)
    final_drive: float = 3.9

    def __post_init__(self):
        vals = [self.mass, self.rolling_coeff, self.drag_area_coeff, self.air_density,
                self.wheel_radius, self.final_drive, *self.gear_ratios]
        if any(v <= 0 for v in vals):
            raise ValueError("vehicle parameters must all be positive")


@dataclass
class Profile:
    """Operational profile sampled on a uniform time grid. Gear 0 is neutral."""

    time: np.ndarray  # s
    gear: np.ndarray  # int
    velocity: np.ndarray  # km/h
    name: str = ""

    @property
    def dt(self) -> float:
        if len(self.time) < 2:
            return 1.0
        return float(np.median(np.diff(self.time)))

    @property
    def distance_km(self) -> float:
        return float(np.sum(self.velocity) * self.dt / 3600.0)

    @property
    def duration(self) -> float:
        return float(len(self.time) * self.dt)


def load_profile(path: str | Path) -> Profile:
    """Read ``time_s,gear,velocity_kmh`` delimited text (header required)."""
    path = Path(path)
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header = [h.strip() for h in rows[0]]
    if header != ["time_s", "gear", "velocity_kmh"]:
        raise ValueError(f"{path}: expected header time_s,gear,velocity_kmh, got {header}")
    data = np.array([[float(x) for x in r] for r in rows[1:]])
    return Profile(data[:, 0], data[:, 1].astype(int), data[:, 2], path.stem)


def save_profile(profile: Profile, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["time_s", "gear", "velocity_kmh"])
        for t, g, v in zip(profile.time, profile.gear, profile.velocity):
            w.writerow([f"{t:g}", int(g), f"{v:.3f}"])


@dataclass
class KOperationField:
    k: int
    freq_range: tuple[float, float]
    torq_range: tuple[float, float]
    stacks: list[list[list[int]]] = field(default_factory=list)
    excluded: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")
        if not (self.freq_range[0] < self.freq_range[1] and self.torq_range[0] < self.torq_range[1]):
            raise ValueError("operation field ranges must have positive extent")
        if not self.stacks:
            self.stacks = [[[] for _ in range(self.k)] for _ in range(self.k)]

    def empty_copy(self) -> "KOperationField":
        return KOperationField(self.k, self.freq_range, self.torq_range)

    def cell_of(self, freq: np.ndarray, torq: np.ndarray, clamp: bool = False):
        """Half-open cell indices (upper face closed); -1 outside unless clamped."""
        freq = np.asarray(freq, dtype=float)
        torq = np.asarray(torq, dtype=float)
        f = _bin(freq, self.freq_range, self.k)
        t = _bin(torq, self.torq_range, self.k)
        if clamp:
            return np.clip(f, 0, self.k - 1), np.clip(t, 0, self.k - 1)
        bad = ((freq < self.freq_range[0]) | (freq > self.freq_range[1])
               | (torq < self.torq_range[0]) | (torq > self.torq_range[1]))
        f = np.where(bad, -1, np.clip(f, 0, self.k - 1))
        t = np.where(bad, -1, np.clip(t, 0, self.k - 1))
        return f, t

    def cell_center(self, f: int, t: int) -> tuple[float, float]:
        wf = (self.freq_range[1] - self.freq_range[0]) / self.k
        wt = (self.torq_range[1] - self.torq_range[0]) / self.k
        return self.freq_range[0] + (f + 0.5) * wf, self.torq_range[0] + (t + 0.5) * wt

    def freq_centers(self) -> np.ndarray:
        return np.array([self.cell_center(f, 0)[0] for f in range(self.k)])

    def torq_centers(self) -> np.ndarray:
        return np.array([self.cell_center(0, t)[1] for t in range(self.k)])

    def normalize(self, freq, torq) -> np.ndarray:
        fr, tr = self.freq_range, self.torq_range
        return np.column_stack([(np.asarray(freq, dtype=float) - fr[0]) / (fr[1] - fr[0]),
                                (np.asarray(torq, dtype=float) - tr[0]) / (tr[1] - tr[0])])

    def sizes(self) -> np.ndarray:
        return np.array([[len(self.stacks[f][t]) for t in range(self.k)] for f in range(self.k)])

    def stack_of(self) -> dict[int, tuple[int, int]]:
        return {q: (f, t) for f in range(self.k) for t in range(self.k) for q in self.stacks[f][t]}


def _bin(x: np.ndarray, rng: tuple[float, float], k: int) -> np.ndarray:
    return np.floor((x - rng[0]) / (rng[1] - rng[0]) * k).astype(np.int64)


def assign_stacks(freq: Sequence[float], torq: Sequence[float], field: KOperationField,
                  indices: Sequence[int] | None = None) -> KOperationField:
    """Partition points by their (frequency, torque) into the k x k stacks."""
    freq = np.asarray(freq, dtype=float)
    torq = np.asarray(torq, dtype=float)
    if indices is None:
        indices = np.arange(len(freq))
    out = field.empty_copy()
    if len(freq) == 0:
        return out
    f, t = out.cell_of(freq, torq)
    for q, fi, ti in zip(indices, f, t):
        if fi < 0:
            out.excluded += 1
        else:
            out.stacks[int(fi)][int(ti)].append(int(q))
    return out


def profile_to_trace(profile: Profile, params: VehicleParams,
                     dt: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Engine frequency [1/min] and torque demand [Nm] along the profile.

    Neutral (gear 0) yields zero frequency and zero torque.
    """
    dt = profile.dt if dt is None else dt
    gear = np.asarray(profile.gear, dtype=int)
    if np.any((gear < 0) | (gear > len(params.gear_ratios))):
        bad = sorted(set(gear[(gear < 0) | (gear > len(params.gear_ratios))].tolist()))
        raise ValueError(f"unknown gear(s) {bad}")
    v = np.asarray(profile.velocity, dtype=float) / 3.6
    if np.any(v < 0):
        raise ValueError("velocities must be nonnegative")
    a = np.gradient(v, dt) if len(v) > 1 else np.zeros_like(v)
    ratios = np.array((1.0,) + tuple(params.gear_ratios))[gear] * params.final_drive
    force = (params.mass * a + params.mass * G * params.rolling_coeff
             + 0.5 * params.air_density * params.drag_area_coeff * v ** 2)
    freq = v / (2.0 * np.pi * params.wheel_radius) * ratios * 60.0
    torque = force * params.wheel_radius / ratios
    neutral = gear == 0
    freq[neutral] = 0.0
    torque[neutral] = 0.0
    return freq, torque


@dataclass
class DrivingCycleWeights:
    omega: np.ndarray  # k x k, seconds
    cycle_name: str
    total_time: float
    distance_km: float = 0.0

    @property
    def covered(self) -> np.ndarray:
        return self.omega > 0


def trace_to_weights(freq: np.ndarray, torq: np.ndarray, field: KOperationField, dt: float,
                     name: str = "", distance_km: float = 0.0) -> DrivingCycleWeights:
    """Resistance time per cell; out-of-field samples count for the nearest cell."""
    f, t = field.cell_of(freq, torq, clamp=True)
    omega = np.zeros((field.k, field.k))
    np.add.at(omega, (f, t), dt)
    return DrivingCycleWeights(omega, name, float(len(freq) * dt), distance_km)


def cycle_weights(profile: Profile, field: KOperationField,
                  params: VehicleParams | None = None) -> DrivingCycleWeights:
    params = params or VehicleParams()
    freq, torq = profile_to_trace(profile, params)
    return trace_to_weights(freq, torq, field, profile.dt, profile.name, profile.distance_km)


# bundled synthetic profiles -------------------------------------------------------

_ECE = [  # (seconds, end speed km/h, gear); linear speed change over the phase
    (11, 0, 0), (4, 15, 1), (8, 15, 1), (5, 0, 1), (21, 0, 0),
    (5, 15, 1), (7, 32, 2), (24, 32, 2), (11, 0, 2), (21, 0, 0),
    (5, 15, 1), (9, 35, 2), (8, 50, 3), (12, 50, 3), (8, 35, 3), (13, 35, 3), (12, 0, 2),
    (11, 0, 0),
]
_EUDC = [
    (26, 0, 0), (5, 15, 1), (9, 35, 2), (8, 50, 3), (13, 70, 4), (50, 70, 5), (8, 50, 4),
    (69, 50, 4), (13, 70, 4), (50, 70, 5), (35, 100, 5), (30, 100, 5), (20, 120, 5),
    (10, 120, 5), (16, 80, 5), (8, 50, 5), (10, 0, 5), (20, 0, 0),
]


def _phases_to_profile(phases, name: str) -> Profile:
    v, g = [], []
    cur = 0.0
    for dur, end, gear in phases:
        for s in range(1, dur + 1):
            v.append(cur + (end - cur) * s / dur)
            g.append(gear)
        cur = float(end)
    return Profile(np.arange(len(v), dtype=float), np.array(g), np.array(v), name)


def nedc_style_profile() -> Profile:
    """Four urban segments followed by one extra-urban segment, 1 Hz."""
    return _phases_to_profile(_ECE * 4 + _EUDC, "nedc_style")


def random_style_profile(seed: int = 7, duration: int = 1800,
                         params: VehicleParams | None = None) -> Profile:
    """Aggressive real-world style profile: random speed targets, strong
    accelerations and varied gear choice within the engine speed window."""
    params = params or VehicleParams()
    rng = np.random.default_rng(seed)
    v = [0.0]
    g = [0]
    circ = 2.0 * np.pi * params.wheel_radius
    while len(v) < duration:
        target = float(rng.uniform(10.0, 125.0))
        accel = float(rng.uniform(0.4, 2.6)) * 3.6  # km/h per s
        cur = v[-1]
        steps = max(1, int(abs(target - cur) / accel))
        hold = int(rng.integers(4, 25))
        seq = list(np.linspace(cur, target, steps + 1)[1:]) + [target] * hold
        for speed in seq:
            ok = [i + 1 for i, r in enumerate(params.gear_ratios)
                  if 1000.0 <= speed / 3.6 / circ * r * params.final_drive * 60.0 <= 2700.0]
            if not ok:
                ok = [1] if speed < 30 else [len(params.gear_ratios)]
            gear = int(rng.choice(ok)) if g[-1] not in ok else (
                g[-1] if rng.random() < 0.85 else int(rng.choice(ok)))
            v.append(float(speed))
            g.append(gear)
            if len(v) >= duration:
                break
    return Profile(np.arange(duration, dtype=float), np.array(g[:duration]),
                   np.array(v[:duration]), "random_style")

"""Delimited-text export of engine maps, pollutant maps, weights and ratios.

Every file is one k x k matrix: a comment line naming quantity and unit, a
label row with the torque cell centres, then one row per frequency cell
(label = frequency cell centre). Empty cells are written as ``NA``.
"""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

import numpy as np

from enginecal.engine import ACTUATOR_NAMES, MEASURAND_NAMES, default_engine_config
from enginecal.opfield import DrivingCycleWeights, KOperationField
from enginecal.solution import SolutionMap

NA = "NA"
MAP_MEASURANDS = ("fuel_mass_flow", "co", "hc", "nox", "soot")


def _units() -> tuple[dict[str, str], dict[str, str]]:
    cfg = default_engine_config()
    return ({a.name: a.unit for a in cfg.actuators}, {m.name: m.unit for m in cfg.measurands})


def write_matrix(path: str | Path, matrix: np.ndarray, field: KOperationField,
                 quantity: str, unit: str) -> Path:
    path = Path(path)
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (field.k, field.k):
        raise ValueError(f"expected a {field.k}x{field.k} matrix, got {matrix.shape}")
    with open(path, "w", newline="") as fh:
        fh.write(f"# {quantity} [{unit}]; rows: engine frequency [1/min]; columns: torque [Nm]\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["freq\\torque"] + [f"{c:.6g}" for c in field.torq_centers()])
        for f, fc in enumerate(field.freq_centers()):
            w.writerow([f"{fc:.6g}"] + [NA if np.isnan(v) else repr(float(v)) for v in matrix[f]])
    return path


def read_matrix(path: str | Path) -> tuple[np.ndarray, np.ndarray, np.ndarray, str]:
    """Returns (frequency labels, torque labels, matrix with NaN for NA, header)."""
    with open(path, newline="") as fh:
        header = fh.readline().rstrip("\n")
        rows = list(csv.reader(fh))
    torq = np.array([float(x) for x in rows[0][1:]])
    freq = np.array([float(r[0]) for r in rows[1:]])
    mat = np.array([[np.nan if x == NA else float(x) for x in r[1:]] for r in rows[1:]])
    return freq, torq, mat, header


def export_maps(solution: SolutionMap, field: KOperationField, weights: DrivingCycleWeights,
                out_dir: str | Path, measurands: tuple[str, ...] = MAP_MEASURANDS) -> list[Path]:
    """Per-actuator maps, pollutant/fuel rate maps and the weighting table."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    a_units, m_units = _units()
    files = []
    maps = solution.actuator_maps()
    for i, name in enumerate(ACTUATOR_NAMES):
        files.append(write_matrix(out / f"actuator_{name}.csv", maps[i], field, name, a_units[name]))
    for name in measurands:
        mat = solution.measurand_map(MEASURAND_NAMES.index(name))
        files.append(write_matrix(out / f"rate_{name}.csv", mat, field, name, m_units[name]))
    files.append(write_matrix(out / "weights.csv", weights.omega, field,
                              f"resistance time ({weights.cycle_name})", "s"))
    return files


def ratio_matrix(a: SolutionMap, b: SolutionMap, j: int) -> np.ndarray:
    """Cellwise a/b for measurand ``j``; NaN where either side is empty or b is 0."""
    num, den = a.measurand_map(j), b.measurand_map(j)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = num / den
    r[~np.isfinite(r)] = np.nan
    return r


def export_ratios(a: SolutionMap, b: SolutionMap, field: KOperationField, out_dir: str | Path,
                  measurands: tuple[str, ...] = MAP_MEASURANDS, label: Optional[str] = None) -> list[Path]:
    if (a.k, b.k) != (field.k, field.k):
        raise ValueError("both solutions need the field's k")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    label = label or "a/b"
    return [write_matrix(out / f"ratio_{name}.csv", ratio_matrix(a, b, MEASURAND_NAMES.index(name)),
                         field, f"{name} ratio {label}", "-") for name in measurands]

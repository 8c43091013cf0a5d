"""EURO emission limit tables and the mass-per-distance unit bridge."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Optional

from enginecal.resources import DATA_DIR

NORMS = ("E3", "E4", "E5a", "E6b", "E6c")
LIMITS_FILE = DATA_DIR / "euro_limits.csv"


def load_limit_table(path: str | Path = LIMITS_FILE) -> dict[str, dict[str, Optional[float]]]:
    """``{norm: {pollutant: limit or None}}`` plus a ``"_units"`` entry."""
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    header = rows[0]
    norms = header[2:]
    table: dict[str, dict[str, Optional[float]]] = {n: {} for n in norms}
    units: dict[str, str] = {}
    for row in rows[1:]:
        pollutant, unit = row[0], row[1]
        units[pollutant] = unit
        for norm, raw in zip(norms, row[2:]):
            table[norm][pollutant] = None if raw.strip() == "--" else float(raw)
    table["_units"] = units  # type: ignore[assignment]
    return table


def norm_limits(norm: str, path: str | Path = LIMITS_FILE) -> dict[str, float]:
    """Limits of one norm in mg/km, pollutants without a limit omitted."""
    table = load_limit_table(path)
    if norm not in table or norm == "_units":
        raise KeyError(f"unknown emission norm {norm!r}; known: {[n for n in table if n != '_units']}")
    units = table["_units"]
    return {p: v for p, v in table[norm].items() if v is not None and units[p] == "mg/km"}


def cycle_budget(limit_mg_per_km: float, distance_km: float) -> float:
    """Emission-row right-hand side in (g/h) x s for a per-km limit.

    Rates are in g/h and resistance times in s, so sum(omega * rate) / 3.6 is
    the cycle mass in mg; dividing by the cycle distance gives mg/km.
    """
    return limit_mg_per_km * distance_km * 3.6


def to_mg_per_km(rate_seconds: float, distance_km: float) -> float:
    return rate_seconds / 3.6 / distance_km if distance_km > 0 else float("inf")

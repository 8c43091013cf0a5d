"""Locations of bundled configuration, profile and limit files."""
from __future__ import annotations

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent / "data"


def config_path(name: str) -> Path:
    return DATA_DIR / "configs" / name


def profile_path(name: str) -> Path:
    return DATA_DIR / "profiles" / name


def resolve(name_or_path: str | Path, kind: str) -> Path:
    """A filesystem path if it exists, otherwise the bundled file of that name."""
    p = Path(name_or_path)
    if p.exists():
        return p
    bundled = DATA_DIR / kind / str(name_or_path)
    if bundled.exists():
        return bundled
    raise FileNotFoundError(f"{name_or_path}: neither a file nor a bundled {kind[:-1]}")

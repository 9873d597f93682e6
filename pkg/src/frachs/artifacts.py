"""Deterministic CSV/JSON emission shared by the command-line tools.

All numeric CSV fields are written with 17 significant digits in C-locale
style, so identical runs produce byte-identical files; files are written to a
temporary sibling and renamed into place.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .efgrid import EFGrid, Profile

__all__ = [
    "atomic_write_text",
    "write_csv",
    "write_json",
    "write_profile_csv",
    "read_profile_csv",
    "fmt",
]


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def atomic_write_text(path: Path, text: str):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]):
    lines = [",".join(header)]
    lines.extend(",".join(fmt(cell) for cell in row) for row in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: Path, payload: dict):
    # allow_nan=False keeps emitted summaries strict-JSON parseable everywhere
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")


def write_profile_csv(path: Path, profile: Profile):
    write_csv(path, ("zeta", "value"), zip(profile.grid.nodes, profile.values))


def read_profile_csv(path: Path, grid: EFGrid) -> Profile:
    """Load a (zeta,value) CSV onto a grid; zeta columns must match the grid nodes."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape != (grid.N, 2):
        raise ValueError(f"{path}: expected {grid.N} rows of zeta,value, got shape {raw.shape}")
    if not np.allclose(raw[:, 0], grid.nodes, rtol=0.0, atol=1e-9 * grid.spacing):
        raise ValueError(f"{path}: zeta column does not match the grid nodes")
    return Profile(grid, raw[:, 1])

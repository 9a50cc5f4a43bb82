"""Rectilinear grid fields and their CSV/JSON serialisation."""

from __future__ import annotations

import csv
import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import GridShapeError

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class Axis:
    """Uniform axis ``min, min + step, ..., min + (n - 1) step``."""

    name: str
    min: float
    step: float
    n: int

    def __post_init__(self):
        if not (self.step > 0 and math.isfinite(self.step)):
            raise GridShapeError(f"axis {self.name!r}: step must be positive and finite")
        if self.n < 1:
            raise GridShapeError(f"axis {self.name!r}: needs at least one point")

    @classmethod
    def span(cls, name: str, lo: float, hi: float, step: float) -> "Axis":
        """Axis covering [lo, hi] with the given step (hi rounded to the grid)."""
        if hi < lo:
            raise GridShapeError(f"axis {name!r}: max < min")
        return cls(name, float(lo), float(step), int(round((hi - lo) / step)) + 1)

    @property
    def max(self) -> float:
        return self.min + (self.n - 1) * self.step

    @property
    def coords(self) -> np.ndarray:
        return self.min + self.step * np.arange(self.n)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min, "max": self.max, "step": self.step, "n": self.n}


@dataclass
class GridField:
    """Scalar samples on a rectilinear grid.

    NaN entries mark points where a value is not defined (e.g. the boundary
    layer of a finite-difference residual); every other entry must be finite.
    """

    axes: list[Axis]
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        shape = tuple(a.n for a in self.axes)
        if self.values.shape != shape:
            raise GridShapeError(f"values shape {self.values.shape} does not match axes {shape}")
        if np.isinf(self.values).any():
            raise GridShapeError("grid values must be finite (NaN marks undefined points)")

    @classmethod
    def from_function(cls, axes: Sequence[Axis], fn: Callable[..., np.ndarray]) -> "GridField":
        """Sample ``fn(*meshgrid)``; ``fn`` must accept broadcast numpy arrays."""
        mesh = np.meshgrid(*(a.coords for a in axes), indexing="ij")
        return cls(list(axes), np.broadcast_to(fn(*mesh), mesh[0].shape).copy())

    @property
    def mesh(self) -> list[np.ndarray]:
        return np.meshgrid(*(a.coords for a in self.axes), indexing="ij")

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def header(self) -> dict:
        return {"schema_version": SCHEMA_VERSION, "axes": [a.to_dict() for a in self.axes]}

    def write_csv(self, path: str | Path, header_path: str | Path | None = None) -> None:
        """Write one row per grid point (coordinates then value) plus a JSON header.

        Undefined points are written with an empty value cell.
        """
        path = Path(path)
        header_path = Path(header_path) if header_path else path.with_suffix(".json")
        coords = [a.coords for a in self.axes]
        with path.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow([a.name for a in self.axes] + ["value"])
            for idx in itertools.product(*(range(a.n) for a in self.axes)):
                v = self.values[idx]
                row = [repr(float(c[i])) for c, i in zip(coords, idx)]
                row.append("" if math.isnan(v) else repr(float(v)))
                w.writerow(row)
        header_path.write_text(json.dumps(self.header(), indent=2, sort_keys=True) + "\n", encoding="utf-8")

    @classmethod
    def read_csv(cls, path: str | Path, header_path: str | Path | None = None) -> "GridField":
        path = Path(path)
        header_path = Path(header_path) if header_path else path.with_suffix(".json")
        header = json.loads(header_path.read_text(encoding="utf-8"))
        axes = [Axis(a["name"], a["min"], a["step"], a["n"]) for a in header["axes"]]
        with path.open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != [a.name for a in axes] + ["value"]:
            raise GridShapeError("CSV header does not match the JSON axes")
        vals = np.array([float(r[-1]) if r[-1] else np.nan for r in rows[1:]])
        return cls(axes, vals.reshape(tuple(a.n for a in axes)))


def fd_residual_norm(residual: GridField) -> tuple[float, float]:
    """(max |value|, root-mean-square) over the defined (interior) points."""
    vals = residual.values[residual.defined]
    if vals.size == 0:
        raise GridShapeError("residual field has no interior points")
    return float(np.max(np.abs(vals))), float(np.sqrt(np.mean(vals * vals)))

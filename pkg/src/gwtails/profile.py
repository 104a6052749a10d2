"""Density profiles: one x grid, one column per method, and their disagreement."""

from __future__ import annotations

import csv
import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__

__all__ = ["COLUMNS", "DensityProfile", "provenance_lines"]

COLUMNS = ("p_integral", "p_right", "p_left")


def provenance_lines(model, command, params: dict):
    """Header lines shared by every tabular output."""
    return [
        f"gwtails {__version__}",
        f"command: {command}",
        f"model: {model.name} hash={model.model_hash()} {json.dumps(model.to_json(), sort_keys=True)}",
        "parameters: " + json.dumps(params, sort_keys=True, default=str),
    ]


@dataclass
class DensityProfile:
    x: np.ndarray
    p_integral: np.ndarray | None = None
    p_right: np.ndarray | None = None
    p_left: np.ndarray | None = None
    notes: dict = field(default_factory=dict)

    def columns(self) -> dict:
        return {c: getattr(self, c) for c in COLUMNS if getattr(self, c) is not None}

    def disagreement(self) -> dict:
        """Max absolute pairwise difference, keyed ``"a-b"``."""
        cols = self.columns()
        return {f"{a}-{b}": float(np.max(np.abs(cols[a] - cols[b])))
                for a, b in itertools.combinations(cols, 2)}

    def to_csv(self, path, header=()):
        """Blank cells where a method was not run."""
        cols = [getattr(self, c) for c in COLUMNS]
        with open(path, "w", newline="") as fh:
            for line in header:
                fh.write(f"# {line}\n")
            for k, v in self.disagreement().items():
                fh.write(f"# max|{k}| = {v!r}\n")
            w = csv.writer(fh)
            w.writerow(["x", *COLUMNS])
            for i, xi in enumerate(self.x):
                w.writerow([repr(float(xi))] + ["" if c is None else repr(float(c[i])) for c in cols])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(line for line in fh if not line.startswith("#"))]
        head, body = rows[0], rows[1:]
        data = {}
        for j, name in enumerate(head):
            vals = [r[j] for r in body]
            data[name] = None if all(v == "" for v in vals) else np.array([float(v) for v in vals])
        return cls(data["x"], *(data.get(c) for c in COLUMNS))

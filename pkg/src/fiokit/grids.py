"""Uniform box grids for functions on R^d and on phase space.

Nodes are cell-centered: lo + (i + 1/2) h with h = (hi - lo) / n, so the
plain Riemann sum with weight h^d is the midpoint rule; for the Gaussian-
decaying integrands used throughout it is spectrally accurate. Grids
serialize to a self-describing JSON container (dimensions, boxes,
interleaved re/im values).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

__all__ = ["GridLayout", "GridFunction", "PhaseSpaceField", "ResolutionError"]


class ResolutionError(ValueError):
    """A grid is too coarse (or too small) for the requested operation."""


@dataclass(frozen=True)
class GridLayout:
    """A uniform grid of n^d cell-centered nodes on the box [lo, hi]^d."""

    lo: np.ndarray
    hi: np.ndarray
    n: int

    def __post_init__(self):
        object.__setattr__(self, "lo", np.atleast_1d(np.asarray(self.lo, dtype=float)))
        object.__setattr__(self, "hi", np.atleast_1d(np.asarray(self.hi, dtype=float)))
        if self.lo.shape != self.hi.shape or np.any(self.hi <= self.lo):
            raise ValueError("invalid box")
        if self.n < 2:
            raise ValueError("need at least 2 points per axis")

    @property
    def d(self) -> int:
        return self.lo.size

    @property
    def spacing(self) -> np.ndarray:
        return (self.hi - self.lo) / self.n

    @property
    def weight(self) -> float:
        return float(np.prod(self.spacing))

    def axis_nodes(self, j: int) -> np.ndarray:
        return self.lo[j] + (np.arange(self.n) + 0.5) * self.spacing[j]

    def points(self) -> np.ndarray:
        """All nodes as an (n^d, d) array, C order."""
        axes = [self.axis_nodes(j) for j in range(self.d)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    @property
    def size(self) -> int:
        return self.n**self.d

    def scaled(self, factor: float) -> "GridLayout":
        return GridLayout(self.lo * factor, self.hi * factor, self.n)

    def __eq__(self, other):
        return (
            isinstance(other, GridLayout)
            and self.n == other.n
            and np.allclose(self.lo, other.lo)
            and np.allclose(self.hi, other.hi)
        )


class GridFunction:
    """Complex values sampled on a GridLayout, with L2 structure."""

    def __init__(self, layout: GridLayout, values):
        values = np.asarray(values, dtype=complex).reshape(layout.size)
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function has non-finite values")
        self.layout = layout
        self.values = values

    @classmethod
    def from_callable(cls, layout: GridLayout, fn) -> "GridFunction":
        pts = layout.points()
        if layout.d == 1:
            vals = fn(pts[:, 0])
        else:
            vals = fn(pts)
        return cls(layout, np.asarray(vals, dtype=complex))

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.layout.weight))

    def inner(self, other: "GridFunction") -> complex:
        if self.layout != other.layout:
            raise ValueError("mismatched grid layouts")
        return complex(np.vdot(self.values, other.values) * self.layout.weight)

    def __add__(self, other):
        if self.layout != other.layout:
            raise ValueError("mismatched grid layouts")
        return GridFunction(self.layout, self.values + other.values)

    def __sub__(self, other):
        if self.layout != other.layout:
            raise ValueError("mismatched grid layouts")
        return GridFunction(self.layout, self.values - other.values)

    def __mul__(self, scalar):
        return GridFunction(self.layout, self.values * scalar)

    __rmul__ = __mul__

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "grid_function",
                "d": self.layout.d,
                "lo": self.layout.lo.tolist(),
                "hi": self.layout.hi.tolist(),
                "n": self.layout.n,
                "values_re_im": np.stack([self.values.real, self.values.imag], axis=-1)
                .ravel()
                .tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "GridFunction":
        obj = json.loads(text)
        if obj.get("kind") != "grid_function":
            raise ValueError("not a grid_function container")
        flat = np.asarray(obj["values_re_im"], dtype=float).reshape(-1, 2)
        return cls(GridLayout(obj["lo"], obj["hi"], obj["n"]), flat[:, 0] + 1j * flat[:, 1])


class PhaseSpaceField:
    """Complex values on a product (q, p) grid: shape (nq^d, np^d) flattened
    pairs, stored as a 2-axis array indexed [q-node, p-node]."""

    def __init__(self, qgrid: GridLayout, pgrid: GridLayout, values):
        if qgrid.d != pgrid.d:
            raise ValueError("q and p grids must share the dimension")
        values = np.asarray(values, dtype=complex).reshape(qgrid.size, pgrid.size)
        if not np.all(np.isfinite(values)):
            raise ValueError("phase-space field has non-finite values")
        self.qgrid = qgrid
        self.pgrid = pgrid
        self.values = values

    @property
    def d(self) -> int:
        return self.qgrid.d

    @property
    def weight(self) -> float:
        return self.qgrid.weight * self.pgrid.weight

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.values) ** 2) * self.weight))

    def __sub__(self, other):
        return PhaseSpaceField(self.qgrid, self.pgrid, self.values - other.values)

    def to_json(self) -> str:
        return json.dumps(
            {
                "kind": "phase_space_field",
                "d": self.d,
                "qlo": self.qgrid.lo.tolist(),
                "qhi": self.qgrid.hi.tolist(),
                "nq": self.qgrid.n,
                "plo": self.pgrid.lo.tolist(),
                "phi": self.pgrid.hi.tolist(),
                "np": self.pgrid.n,
                "values_re_im": np.stack([self.values.real, self.values.imag], axis=-1)
                .ravel()
                .tolist(),
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "PhaseSpaceField":
        obj = json.loads(text)
        if obj.get("kind") != "phase_space_field":
            raise ValueError("not a phase_space_field container")
        qgrid = GridLayout(obj["qlo"], obj["qhi"], obj["nq"])
        pgrid = GridLayout(obj["plo"], obj["phi"], obj["np"])
        flat = np.asarray(obj["values_re_im"], dtype=float).reshape(-1, 2)
        return cls(qgrid, pgrid, flat[:, 0] + 1j * flat[:, 1])

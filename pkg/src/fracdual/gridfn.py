"""Grid functions: real node values with the zero-exterior convention."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .domain import DomainMask, Grid
from .errors import DimensionError


@dataclass
class GridFunction:
    """Values at all grid nodes; with ``zero_exterior`` set, values on
    non-interior nodes are identically zero."""

    grid: Grid
    values: np.ndarray
    zero_exterior: bool = True

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise DimensionError(
                f"values shape {self.values.shape} does not match grid {self.grid.shape}")

    def interior_values(self, mask: DomainMask) -> np.ndarray:
        return self.values[mask.interior]

    def copy(self) -> "GridFunction":
        return GridFunction(self.grid, self.values.copy(), self.zero_exterior)


def from_interior(mask: DomainMask, interior_values) -> GridFunction:
    vals = np.zeros(mask.grid.shape)
    vals[mask.interior] = np.asarray(interior_values, dtype=float)
    return GridFunction(mask.grid, vals)


def sample(mask: DomainMask, func, zero_exterior: bool = True) -> GridFunction:
    """Sample a callable at the nodes; zero it outside the mask by default."""
    vals = np.asarray(func(mask.grid.nodes()), dtype=float)
    vals = np.broadcast_to(vals, mask.grid.shape).copy()
    if zero_exterior:
        vals[~mask.interior] = 0.0
    return GridFunction(mask.grid, vals, zero_exterior)

"""Bounded Radon measures on the domain: finite atoms plus an optional L1 density."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .domain import DomainMask, Grid
from .errors import InvalidMeasureError, MeasureSupportError

Density = Union[Callable[[np.ndarray], np.ndarray], np.ndarray, None]


@dataclass(frozen=True)
class RadonMeasure:
    """Atoms are (location, signed mass) pairs; the density is either a
    vectorized callable sampled at the nodes (collocation) or a full-grid
    array of node values."""

    atoms: Sequence[tuple] = field(default_factory=tuple)
    density: Density = None

    def __post_init__(self):
        norm = tuple((np.atleast_1d(np.asarray(x, dtype=float)), float(m))
                     for x, m in self.atoms)
        object.__setattr__(self, "atoms", norm)

    @property
    def is_zero(self) -> bool:
        return len(self.atoms) == 0 and self.density is None

    def scaled(self, factor: float) -> "RadonMeasure":
        atoms = tuple((x, factor * m) for x, m in self.atoms)
        if self.density is None:
            dens = None
        elif callable(self.density):
            base = self.density
            dens = lambda pts: factor * np.asarray(base(pts))  # noqa: E731
        else:
            dens = factor * np.asarray(self.density)
        return RadonMeasure(atoms=atoms, density=dens)


def atom(location, mass: float = 1.0) -> RadonMeasure:
    return RadonMeasure(atoms=((location, mass),))


def density_measure(density) -> RadonMeasure:
    return RadonMeasure(atoms=(), density=density)


def _density_values(measure: RadonMeasure, grid: Grid) -> Optional[np.ndarray]:
    if measure.density is None:
        return None
    if callable(measure.density):
        vals = np.asarray(measure.density(grid.nodes()), dtype=float)
        if vals.shape != grid.shape:
            vals = np.broadcast_to(vals, grid.shape).astype(float)
        return vals
    vals = np.asarray(measure.density, dtype=float)
    if vals.shape != grid.shape:
        raise InvalidMeasureError(
            f"density array shape {vals.shape} does not match grid {grid.shape}")
    return vals


def _check_atoms(measure: RadonMeasure, mask: DomainMask):
    for x, _ in measure.atoms:
        if x.shape != (mask.grid.n,):
            raise InvalidMeasureError(f"atom location {x} has wrong dimension")
        if not bool(mask.shape.contains(x)):
            raise InvalidMeasureError(f"atom at {x} lies outside the domain")


def total_variation(measure: RadonMeasure, grid: Grid, mask: DomainMask) -> float:
    """|mu|(Omega): sum of |atom masses| plus the Riemann sum of |density|."""
    _check_atoms(measure, mask)
    tv = sum(abs(m) for _, m in measure.atoms)
    dens = _density_values(measure, grid)
    if dens is not None:
        tv += grid.cell_volume * float(np.sum(np.abs(dens[mask.interior])))
    return float(tv)


def _hat_weights_1d(frac: float) -> tuple[int, np.ndarray]:
    """Lower node index offset and (w_lo, w_hi) for a fractional node index."""
    i0 = int(np.floor(frac))
    t = frac - i0
    return i0, np.array([1.0 - t, t])


def discretize_to_functional(measure: RadonMeasure, grid: Grid,
                             mask: DomainMask) -> np.ndarray:
    """Vector F over interior nodes with <w_h, F> approximating the pairing
    of w with the measure.

    Atoms spread over the 2^n surrounding nodes by multilinear hat weights;
    weights landing on exterior nodes are dropped (zero exterior condition),
    not renormalized. Density contributes density(x_i) h^n per node.
    """
    _check_atoms(measure, mask)
    full = np.zeros(grid.shape)
    for x, m in measure.atoms:
        offs, wts = [], []
        for d in range(grid.n):
            frac = (x[d] - grid.lo[d]) / grid.h - 0.5
            i0, w = _hat_weights_1d(frac)
            offs.append(i0)
            wts.append(w)
        placed = False
        for corner in range(2**grid.n):
            idx = []
            w = m
            for d in range(grid.n):
                bit = (corner >> d) & 1
                idx.append(offs[d] + bit)
                w *= wts[d][bit]
            idx = tuple(idx)
            if any(i < 0 or i >= grid.shape[d] for d, i in enumerate(idx)):
                continue
            if mask.interior[idx]:
                placed = True
            full[idx] += w
        if not placed:
            raise MeasureSupportError(
                f"atom at {x} has no interior node in its hat stencil")
    dens = _density_values(measure, grid)
    if dens is not None:
        full += dens * grid.cell_volume
    return full[mask.interior]

"""Integral representation of u through its boundary data and density.

A function u with D1^i D2^j u integrable for i <= 2, j <= 4 is determined by
its non-classical boundary data together with the density v = D1^2 D2^4 u.
This module evaluates that representation and its differentiated family: for
each order (i, j) the field splits into a data-dependent part and a causal
Volterra integral of v.  Restricting the (0, 0) field to x1 = 0 or x2 = 0
reproduces the classical edge rebuild exactly; the unit tests pin this down.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple

import numpy as np

from .boundary import NonClassicalData
from .errors import GridMismatchError, IncompleteJetError, InvalidParameterError
from .grids import Field2D, Grid2D, lp_norm, taylor_volterra_matrix

__all__ = [
    "MixedOrder",
    "ALL_ORDERS",
    "DENSITY_ORDER",
    "as_order",
    "JetField",
    "sobolev_norm_2_4",
    "base_representation",
    "boundary_part",
    "volterra_part",
    "reconstruct_jet",
]


class MixedOrder(NamedTuple):
    """Derivative multi-index: i along x1 (0..2), j along x2 (0..4)."""

    i: int
    j: int


ALL_ORDERS: tuple[MixedOrder, ...] = tuple(
    MixedOrder(i, j) for i in range(3) for j in range(5)
)
DENSITY_ORDER = MixedOrder(2, 4)


def as_order(order) -> MixedOrder:
    i, j = order
    if not (0 <= i <= 2 and 0 <= j <= 4):
        raise InvalidParameterError(f"derivative order out of range: {(i, j)}")
    return MixedOrder(int(i), int(j))


@dataclass(frozen=True, eq=False)
class JetField:
    """All 15 mixed-derivative fields of one function on a shared grid."""

    grid: Grid2D
    fields: tuple[Field2D, ...]

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if len(self.fields) != len(ALL_ORDERS):
            raise IncompleteJetError(
                f"jet needs {len(ALL_ORDERS)} fields, got {len(self.fields)}"
            )
        for f in self.fields:
            if not f.grid.matches(self.grid):
                raise GridMismatchError("jet entry lives on a different grid")

    @classmethod
    def from_entries(cls, grid: Grid2D, entries: Mapping) -> "JetField":
        fields = []
        for order in ALL_ORDERS:
            try:
                fields.append(entries[order])
            except KeyError:
                raise IncompleteJetError(f"jet entry {tuple(order)} is missing") from None
        return cls(grid, tuple(fields))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "JetField":
        return cls(grid, tuple(Field2D.zeros(grid) for _ in ALL_ORDERS))

    def __getitem__(self, order) -> Field2D:
        i, j = as_order(order)
        return self.fields[5 * i + j]

    @property
    def density(self) -> Field2D:
        return self[DENSITY_ORDER]

    def __sub__(self, other):
        if not isinstance(other, JetField):
            return NotImplemented
        if not other.grid.matches(self.grid):
            raise GridMismatchError("jets live on different grids")
        return JetField(self.grid, tuple(a - b for a, b in zip(self.fields, other.fields)))


def sobolev_norm_2_4(jet: JetField, p: float = 2.0) -> float:
    """Anisotropic Sobolev norm: the sum of the 15 component L_p norms."""
    return float(sum(lp_norm(f, p) for f in jet.fields))


def _monomial(x: np.ndarray, m: int) -> np.ndarray:
    return x**m / math.factorial(m)


def _grid_for(nc: NonClassicalData, grid: Grid2D | None) -> Grid2D:
    if grid is None:
        return Grid2D(nc.grid1, nc.grid2)
    if not (grid.g1.matches(nc.grid1) and grid.g2.matches(nc.grid2)):
        raise GridMismatchError("boundary data does not match the requested grid")
    return grid


def boundary_part(nc: NonClassicalData, order, grid: Grid2D | None = None) -> Field2D:
    """Data-dependent part of D1^i D2^j u.

    On the trace lines this reduces to the stored data exactly: order (2, j)
    restricted to x2 = 0 is the edge_x1[j] trace, order (i, 4) restricted to
    x1 = 0 is the edge_x2[i] trace, and orders (i, j) with i <= 1, j <= 3
    take the corner value at the origin.
    """
    i, j = as_order(order)
    grid = _grid_for(nc, grid)
    t1, t2 = grid.g1.nodes, grid.g2.nodes
    out = np.zeros(grid.shape)

    if i == 2 and j == 4:
        return Field2D(grid, out)

    if i == 2:
        for jp in range(j, 4):
            out += np.outer(nc.edge_x1[jp].values, _monomial(t2, jp - j))
        return Field2D(grid, out)

    if j == 4:
        for ip in range(i, 2):
            out += np.outer(_monomial(t1, ip - i), nc.edge_x2[ip].values)
        return Field2D(grid, out)

    for ip in range(i, 2):
        for jp in range(j, 4):
            out += nc.corner[ip, jp] * np.outer(_monomial(t1, ip - i), _monomial(t2, jp - j))
    kernel_x1 = taylor_volterra_matrix(grid.g1, 1 - i)
    for jp in range(j, 4):
        out += np.outer(kernel_x1 @ nc.edge_x1[jp].values, _monomial(t2, jp - j))
    kernel_x2 = taylor_volterra_matrix(grid.g2, 3 - j)
    for ip in range(i, 2):
        out += np.outer(_monomial(t1, ip - i), kernel_x2 @ nc.edge_x2[ip].values)
    return Field2D(grid, out)


def volterra_part(v: Field2D, order) -> Field2D:
    """Density-dependent part of D1^i D2^j u: a causal Volterra integral of v.

    The kernels are evaluated in factored form (x1 - s)^a / a! times
    (x2 - t)^b / b!, applied as one cumulative quadrature matrix per axis
    (x2 innermost).  Order (2, 4) is v itself.
    """
    i, j = as_order(order)
    if (i, j) == DENSITY_ORDER:
        return v
    vals = v.values
    if i == 2:
        out = vals @ taylor_volterra_matrix(v.grid.g2, 3 - j).T
    elif j == 4:
        out = taylor_volterra_matrix(v.grid.g1, 1 - i) @ vals
    else:
        out = (
            taylor_volterra_matrix(v.grid.g1, 1 - i)
            @ vals
            @ taylor_volterra_matrix(v.grid.g2, 3 - j).T
        )
    return Field2D(v.grid, out)


def base_representation(nc: NonClassicalData, v: Field2D) -> Field2D:
    """u itself, assembled from boundary data and density."""
    return boundary_part(nc, MixedOrder(0, 0), v.grid) + volterra_part(v, MixedOrder(0, 0))


def reconstruct_jet(nc: NonClassicalData, v: Field2D) -> JetField:
    """All 15 derivative fields of the function represented by (nc, v).

    Entry (2, 4) is v itself, bit for bit.
    """
    grid = _grid_for(nc, v.grid)
    fields = []
    for order in ALL_ORDERS:
        if order == DENSITY_ORDER:
            fields.append(v)
        else:
            bp = boundary_part(nc, order, grid)
            ip = volterra_part(v, order)
            fields.append(Field2D(grid, bp.values + ip.values))
    return JetField(grid, tuple(fields))

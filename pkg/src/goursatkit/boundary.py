"""Boundary data on the characteristic lines x1 = 0 and x2 = 0.

Two equivalent models are supported: the classical one (edge values phi_1,
phi_2 on x1 = 0 and psi_1..psi_4 on x2 = 0, with sampled derivatives) and the
non-classical one (eight corner scalars plus the six highest-order edge
traces).  The conversions between them are exact compositions: the recovered
highest derivatives are stored arrays, never differenced.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import GridMismatchError, InvalidParameterError
from .grids import Field1D, Grid1D, Grid2D, taylor_volterra_matrix

__all__ = [
    "Jet1D",
    "ClassicalData",
    "NonClassicalData",
    "CornerMismatch",
    "AgreementReport",
    "to_classical",
    "to_nonclassical",
    "check_agreement",
]

#: number of derivative orders carried by each edge function
PHI_ORDERS = 5  # values and derivatives 0..4 along x2
PSI_ORDERS = 3  # values and derivatives 0..2 along x1


@dataclass(frozen=True, eq=False)
class Jet1D:
    """A function on a 1-D grid together with its sampled derivatives.

    ``fields[k]`` holds the k-th derivative at the nodes.  Derivatives are
    stored, not computed, so exactness-based checks are meaningful.
    """

    fields: tuple[Field1D, ...]

    def __post_init__(self):
        if not self.fields:
            raise InvalidParameterError("a 1-D jet needs at least the value field")
        object.__setattr__(self, "fields", tuple(self.fields))
        g = self.fields[0].grid
        for f in self.fields[1:]:
            if not f.grid.matches(g):
                raise GridMismatchError("jet derivative fields live on different grids")

    @classmethod
    def zeros(cls, grid: Grid1D, orders: int) -> "Jet1D":
        return cls(tuple(Field1D.zeros(grid) for _ in range(orders)))

    @property
    def grid(self) -> Grid1D:
        return self.fields[0].grid

    @property
    def order_count(self) -> int:
        return len(self.fields)

    def derivative(self, k: int) -> Field1D:
        return self.fields[k]

    def at_zero(self, k: int) -> float:
        return float(self.fields[k].values[0])

    def __add__(self, other):
        if not isinstance(other, Jet1D):
            return NotImplemented
        if other.order_count != self.order_count:
            raise InvalidParameterError("jets carry different derivative orders")
        return Jet1D(tuple(a + b for a, b in zip(self.fields, other.fields)))

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return Jet1D(tuple(f * scalar for f in self.fields))

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class ClassicalData:
    """Classical edge data: phi = (phi1, phi2) on x1 = 0, psi_1..psi_4 on x2 = 0.

    phi_k carry derivatives 0..4 in x2; psi_k carry derivatives 0..2 in x1.
    Cross-derivative consistency at the corner is not a construction
    invariant; it is what ``check_agreement`` measures.
    """

    phi: tuple[Jet1D, Jet1D]
    psi: tuple[Jet1D, Jet1D, Jet1D, Jet1D]

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        object.__setattr__(self, "psi", tuple(self.psi))
        if len(self.phi) != 2 or len(self.psi) != 4:
            raise InvalidParameterError("classical data needs 2 phi and 4 psi functions")
        for p in self.phi:
            if p.order_count != PHI_ORDERS:
                raise InvalidParameterError("phi functions must carry derivatives 0..4")
            if not p.grid.matches(self.phi[0].grid):
                raise GridMismatchError("phi functions live on different grids")
        for q in self.psi:
            if q.order_count != PSI_ORDERS:
                raise InvalidParameterError("psi functions must carry derivatives 0..2")
            if not q.grid.matches(self.psi[0].grid):
                raise GridMismatchError("psi functions live on different grids")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "ClassicalData":
        return cls(
            phi=tuple(Jet1D.zeros(grid.g2, PHI_ORDERS) for _ in range(2)),
            psi=tuple(Jet1D.zeros(grid.g1, PSI_ORDERS) for _ in range(4)),
        )

    @property
    def grid1(self) -> Grid1D:
        return self.psi[0].grid

    @property
    def grid2(self) -> Grid1D:
        return self.phi[0].grid

    def __add__(self, other):
        if not isinstance(other, ClassicalData):
            return NotImplemented
        return ClassicalData(
            phi=tuple(a + b for a, b in zip(self.phi, other.phi)),
            psi=tuple(a + b for a, b in zip(self.psi, other.psi)),
        )

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return ClassicalData(
            phi=tuple(p * scalar for p in self.phi),
            psi=tuple(q * scalar for q in self.psi),
        )

    __rmul__ = __mul__


@dataclass(frozen=True)
class CornerMismatch:
    """Disagreement between the two stated sources of one corner scalar."""

    i: int
    j: int
    phi_value: float
    psi_value: float

    @property
    def gap(self) -> float:
        return abs(self.phi_value - self.psi_value)


@dataclass(frozen=True, eq=False)
class NonClassicalData:
    """Corner scalars and highest-order edge traces.

    ``corner[i, j]`` is the mixed derivative D1^i D2^j u at the origin for
    i <= 1, j <= 3.  ``edge_x1[j]`` samples D1^2 D2^j u on the line x2 = 0 and
    ``edge_x2[i]`` samples D1^i D2^4 u on the line x1 = 0.  ``warnings``
    records corner mismatches when the data came from non-agreeing classical
    data; it does not participate in arithmetic.
    """

    corner: np.ndarray
    edge_x1: tuple[Field1D, Field1D, Field1D, Field1D]
    edge_x2: tuple[Field1D, Field1D]
    warnings: tuple[CornerMismatch, ...] = ()

    def __post_init__(self):
        c = np.asarray(self.corner, dtype=float)
        if c.shape != (2, 4):
            raise InvalidParameterError(f"corner must be 2x4, got shape {c.shape}")
        if not np.all(np.isfinite(c)):
            raise InvalidParameterError("corner scalars must be finite")
        c = np.ascontiguousarray(c)
        c.flags.writeable = False
        object.__setattr__(self, "corner", c)
        object.__setattr__(self, "edge_x1", tuple(self.edge_x1))
        object.__setattr__(self, "edge_x2", tuple(self.edge_x2))
        object.__setattr__(self, "warnings", tuple(self.warnings))
        if len(self.edge_x1) != 4 or len(self.edge_x2) != 2:
            raise InvalidParameterError("need 4 edge traces on x2 = 0 and 2 on x1 = 0")
        for f in self.edge_x1[1:]:
            if not f.grid.matches(self.edge_x1[0].grid):
                raise GridMismatchError("edge_x1 traces live on different grids")
        if not self.edge_x2[1].grid.matches(self.edge_x2[0].grid):
            raise GridMismatchError("edge_x2 traces live on different grids")

    @classmethod
    def zeros(cls, grid: Grid2D) -> "NonClassicalData":
        return cls(
            corner=np.zeros((2, 4)),
            edge_x1=tuple(Field1D.zeros(grid.g1) for _ in range(4)),
            edge_x2=tuple(Field1D.zeros(grid.g2) for _ in range(2)),
        )

    @property
    def grid1(self) -> Grid1D:
        return self.edge_x1[0].grid

    @property
    def grid2(self) -> Grid1D:
        return self.edge_x2[0].grid

    def __add__(self, other):
        if not isinstance(other, NonClassicalData):
            return NotImplemented
        return NonClassicalData(
            corner=self.corner + other.corner,
            edge_x1=tuple(a + b for a, b in zip(self.edge_x1, other.edge_x1)),
            edge_x2=tuple(a + b for a, b in zip(self.edge_x2, other.edge_x2)),
        )

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return NonClassicalData(
            corner=self.corner * float(scalar),
            edge_x1=tuple(f * scalar for f in self.edge_x1),
            edge_x2=tuple(f * scalar for f in self.edge_x2),
        )

    __rmul__ = __mul__


@dataclass(frozen=True)
class AgreementReport:
    """Residuals of the eight corner compatibility equalities.

    Residual order follows the printed 4x2 layout row by row:
    phi1^(m)(0) - psi_{m+1}(0) then phi2^(m)(0) - psi_{m+1}'(0), m = 0..3.
    """

    residuals: np.ndarray
    tol: float
    max_residual: float = field(init=False)
    passed: bool = field(init=False)

    def __post_init__(self):
        r = np.asarray(self.residuals, dtype=float)
        if r.shape != (8,):
            raise InvalidParameterError("agreement report needs exactly 8 residuals")
        r = np.ascontiguousarray(r)
        r.flags.writeable = False
        object.__setattr__(self, "residuals", r)
        object.__setattr__(self, "max_residual", float(np.max(np.abs(r))))
        object.__setattr__(self, "passed", bool(self.max_residual <= self.tol))


def check_agreement(c: ClassicalData, tol: float = 1e-12) -> AgreementReport:
    """Evaluate the corner compatibility residuals of classical data."""
    if not (tol >= 0):
        raise InvalidParameterError("tolerance must be nonnegative")
    residuals = np.empty(8)
    for m in range(4):
        residuals[2 * m] = c.phi[0].at_zero(m) - c.psi[m].at_zero(0)
        residuals[2 * m + 1] = c.phi[1].at_zero(m) - c.psi[m].at_zero(1)
    return AgreementReport(residuals=residuals, tol=float(tol))


def to_nonclassical(c: ClassicalData, mismatch_tol: float = 1e-10) -> NonClassicalData:
    """Extract corner scalars and highest edge traces from classical data.

    Each corner scalar has two stated sources, phi_{i+1}^{(j)}(0) and
    psi_{j+1}^{(i)}(0); the phi-side value is taken.  A disagreement beyond
    ``mismatch_tol`` is recorded as a warning on the result, not an error:
    the equalities only coincide on agreement-compatible data, and the
    conversion must still operate outside that set.
    """
    corner = np.empty((2, 4))
    warnings = []
    for i in range(2):
        for j in range(4):
            phi_side = c.phi[i].at_zero(j)
            psi_side = c.psi[j].at_zero(i)
            corner[i, j] = phi_side
            if abs(phi_side - psi_side) > mismatch_tol:
                warnings.append(CornerMismatch(i, j, phi_side, psi_side))
    return NonClassicalData(
        corner=corner,
        edge_x1=tuple(c.psi[j].derivative(2) for j in range(4)),
        edge_x2=tuple(c.phi[i].derivative(4) for i in range(2)),
        warnings=tuple(warnings),
    )


def _taylor_with_remainder(
    nodes: np.ndarray,
    scalars: Iterable[float],
    remainder: np.ndarray,
) -> np.ndarray:
    """sum_m scalars[m] * x^m / m!  plus an already-integrated remainder."""
    out = remainder.copy()
    for m, z in enumerate(scalars):
        out += z * nodes**m / math.factorial(m)
    return out


def to_classical(nc: NonClassicalData) -> ClassicalData:
    """Rebuild classical edge data from corner scalars and edge traces.

    Values and derivatives come from the Taylor expansion at 0 with the
    integral remainder carried by the stored traces; each derivative order
    uses its own closed-form kernel, and the highest orders are the stored
    trace fields themselves, exactly.  The result satisfies the corner
    agreement conditions automatically.
    """
    g1, g2 = nc.grid1, nc.grid2
    t1, t2 = g1.nodes, g2.nodes

    phi = []
    for i in range(2):
        trace = nc.edge_x2[i]
        fields = []
        for k in range(4):
            remainder = taylor_volterra_matrix(g2, 3 - k) @ trace.values
            vals = _taylor_with_remainder(t2, nc.corner[i, k:4], remainder)
            fields.append(Field1D(g2, vals))
        fields.append(trace)
        phi.append(Jet1D(tuple(fields)))

    psi = []
    for j in range(4):
        trace = nc.edge_x1[j]
        fields = []
        for k in range(2):
            remainder = taylor_volterra_matrix(g1, 1 - k) @ trace.values
            vals = _taylor_with_remainder(t1, nc.corner[k:2, j], remainder)
            fields.append(Field1D(g1, vals))
        fields.append(trace)
        psi.append(Jet1D(tuple(fields)))

    return ClassicalData(phi=tuple(phi), psi=tuple(psi))

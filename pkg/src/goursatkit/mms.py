"""Manufactured-solution oracles, error reports, and convergence studies.

Two oracle families with closed-form derivative jets: bivariate polynomials
(index shifts on the coefficient matrix) and separable sine products (phase
shifts).  Polynomials probe the exact-quadrature regimes; the sine products
probe genuine discretization error.  No numerical differentiation appears
anywhere in the verification stack.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
from numpy.polynomial import polynomial as npoly

from .boundary import ClassicalData, Jet1D, NonClassicalData
from .errors import ConvergenceError, GridMismatchError, InvalidParameterError
from .grids import Field1D, Field2D, Grid2D, lp_norm
from .representation import (
    ALL_ORDERS,
    DENSITY_ORDER,
    JetField,
    MixedOrder,
    as_order,
    sobolev_norm_2_4,
)
from .solver import (
    COEFFICIENT_ORDERS,
    CoefficientSet,
    ProblemSpec,
    Solution,
    solve,
)

__all__ = [
    "PolySolution",
    "TrigSolution",
    "oracle_derivative",
    "oracle_jet",
    "nonclassical_from_oracle",
    "classical_from_oracle",
    "manufactured_rhs",
    "manufacture",
    "ErrorReport",
    "error_report",
    "ConvergenceLevel",
    "ConvergenceTable",
    "convergence_study",
    "self_convergence_study",
    "write_convergence_csv",
]

MAX_POLY_DEGREES = (8, 10)
#: below this error, order estimates are roundoff noise and are not reported
ORDER_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class PolySolution:
    """u(x1, x2) = sum c[m, n] x1^m x2^n with exact derivative jets."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.coefficients, dtype=float))
        if c.ndim != 2:
            raise InvalidParameterError("polynomial coefficients must be a 2-D array")
        if not np.all(np.isfinite(c)):
            raise InvalidParameterError("polynomial coefficients must be finite")
        if c.shape[0] - 1 > MAX_POLY_DEGREES[0] or c.shape[1] - 1 > MAX_POLY_DEGREES[1]:
            raise InvalidParameterError(
                f"polynomial degrees are capped at {MAX_POLY_DEGREES}"
            )
        c = np.ascontiguousarray(c)
        c.flags.writeable = False
        object.__setattr__(self, "coefficients", c)

    def differentiate(self, order) -> "PolySolution":
        i, j = as_order(order)
        c = self.coefficients
        if i >= c.shape[0] or j >= c.shape[1]:
            return PolySolution(np.zeros((1, 1)))
        rows = np.array([math.perm(r + i, i) for r in range(c.shape[0] - i)], float)
        cols = np.array([math.perm(s + j, j) for s in range(c.shape[1] - j)], float)
        return PolySolution(c[i:, j:] * np.outer(rows, cols))

    def sample(self, grid: Grid2D) -> Field2D:
        x1, x2 = grid.meshgrid()
        return Field2D(grid, npoly.polyval2d(x1, x2, self.coefficients))

    def derivative(self, order, grid: Grid2D) -> Field2D:
        return self.differentiate(order).sample(grid)


@dataclass(frozen=True)
class TrigSolution:
    """u(x1, x2) = A sin(k1 x1 + c1) sin(k2 x2 + c2); derivatives shift phases."""

    amplitude: float = 1.0
    wave1: float = 1.0
    wave2: float = 1.0
    phase1: float = 0.0
    phase2: float = 0.0

    def __post_init__(self):
        for name in ("amplitude", "wave1", "wave2", "phase1", "phase2"):
            if not math.isfinite(getattr(self, name)):
                raise InvalidParameterError(f"{name} must be finite")

    def differentiate(self, order) -> "TrigSolution":
        i, j = as_order(order)
        return TrigSolution(
            amplitude=self.amplitude * self.wave1**i * self.wave2**j,
            wave1=self.wave1,
            wave2=self.wave2,
            phase1=self.phase1 + i * math.pi / 2,
            phase2=self.phase2 + j * math.pi / 2,
        )

    def sample(self, grid: Grid2D) -> Field2D:
        x1, x2 = grid.meshgrid()
        vals = (
            self.amplitude
            * np.sin(self.wave1 * x1 + self.phase1)
            * np.sin(self.wave2 * x2 + self.phase2)
        )
        return Field2D(grid, vals)

    def derivative(self, order, grid: Grid2D) -> Field2D:
        return self.differentiate(order).sample(grid)


Oracle = Union[PolySolution, TrigSolution]


def oracle_derivative(solution: Oracle, order, grid: Grid2D) -> Field2D:
    """Exact mixed derivative of an oracle, sampled at the grid nodes."""
    return solution.derivative(as_order(order), grid)


def oracle_jet(solution: Oracle, grid: Grid2D) -> JetField:
    return JetField(
        grid, tuple(solution.derivative(order, grid) for order in ALL_ORDERS)
    )


def nonclassical_from_oracle(solution: Oracle, grid: Grid2D) -> NonClassicalData:
    """Exact non-classical data of an oracle: corner jet plus edge traces."""
    corner = np.empty((2, 4))
    for i in range(2):
        for j in range(4):
            corner[i, j] = solution.derivative((i, j), grid).values[0, 0]
    edge_x1 = tuple(
        Field1D(grid.g1, solution.derivative((2, j), grid).values[:, 0])
        for j in range(4)
    )
    edge_x2 = tuple(
        Field1D(grid.g2, solution.derivative((i, 4), grid).values[0, :])
        for i in range(2)
    )
    return NonClassicalData(corner=corner, edge_x1=edge_x1, edge_x2=edge_x2)


def classical_from_oracle(solution: Oracle, grid: Grid2D) -> ClassicalData:
    """Exact classical data of an oracle, with all derivative orders sampled."""
    phi = tuple(
        Jet1D(
            tuple(
                Field1D(grid.g2, solution.derivative((i, k), grid).values[0, :])
                for k in range(5)
            )
        )
        for i in range(2)
    )
    psi = tuple(
        Jet1D(
            tuple(
                Field1D(grid.g1, solution.derivative((m, j), grid).values[:, 0])
                for m in range(3)
            )
        )
        for j in range(4)
    )
    return ClassicalData(phi=phi, psi=psi)


def manufactured_rhs(
    solution: Oracle, coefficients: CoefficientSet, grid: Grid2D
) -> Field2D:
    """Forcing that makes the oracle the exact continuum solution.

    Pure node algebra: leading derivative plus coefficient-weighted lower
    derivatives, no quadrature.
    """
    if not coefficients.grid.matches(grid):
        raise GridMismatchError("coefficients live on a different grid")
    vals = solution.derivative(DENSITY_ORDER, grid).values.copy()
    for order in COEFFICIENT_ORDERS:
        a = coefficients.field(order).values
        if not a.any():
            continue
        vals += a * solution.derivative(order, grid).values
    return Field2D(grid, vals)


def manufacture(
    solution: Oracle,
    coefficients: CoefficientSet,
    grid: Grid2D,
    p: float = 2.0,
    tolerance: float = 1e-10,
    max_iterations: int = 100,
    method: str = "marching",
) -> ProblemSpec:
    """Fabricate a problem whose exact continuum solution is the oracle."""
    return ProblemSpec(
        grid=grid,
        coefficients=coefficients,
        data=nonclassical_from_oracle(solution, grid),
        rhs=manufactured_rhs(solution, coefficients, grid),
        p=p,
        tolerance=tolerance,
        max_iterations=max_iterations,
        method=method,
    )


@dataclass(frozen=True)
class ErrorOrderEntry:
    order: MixedOrder
    lp_error: float
    sup_error: float


@dataclass(frozen=True, eq=False)
class ErrorReport:
    """Solver jet vs oracle jet, order by order, plus solve residuals."""

    p: float
    entries: tuple[ErrorOrderEntry, ...]
    sobolev_error: float
    pde_residual: float
    boundary_residual: float

    def entry(self, order) -> ErrorOrderEntry:
        i, j = as_order(order)
        return self.entries[5 * i + j]

    @property
    def max_sup_error(self) -> float:
        return max(e.sup_error for e in self.entries)


def error_report(sol: Solution, solution: Oracle, p: float = 2.0) -> ErrorReport:
    grid = sol.v.grid
    diff = sol.jet - oracle_jet(solution, grid)
    entries = tuple(
        ErrorOrderEntry(
            order=order,
            lp_error=lp_norm(diff[order], p),
            sup_error=lp_norm(diff[order], math.inf),
        )
        for order in ALL_ORDERS
    )
    return ErrorReport(
        p=float(p),
        entries=entries,
        sobolev_error=sobolev_norm_2_4(diff, p),
        pde_residual=sol.diagnostics.pde_residual,
        boundary_residual=sol.diagnostics.boundary_residual,
    )


@dataclass(frozen=True)
class ConvergenceLevel:
    nodes: int
    h: float
    sup_error: float
    lp_error: float
    order: float | None
    iterations: int
    residual: float


@dataclass(frozen=True)
class ConvergenceTable:
    levels: tuple[ConvergenceLevel, ...]

    def orders(self) -> tuple[float, ...]:
        return tuple(lv.order for lv in self.levels if lv.order is not None)


def _check_level_chain(node_counts: Sequence[int]) -> list[int]:
    counts = [int(n) for n in node_counts]
    if not counts:
        raise InvalidParameterError("need at least one grid level")
    for n in counts:
        if n < 3 or (n - 1) & (n - 2):
            raise InvalidParameterError(
                f"node counts must be 2^k + 1 with k >= 1, got {n}"
            )
    for prev, cur in zip(counts, counts[1:]):
        if cur != 2 * prev - 1:
            raise InvalidParameterError(
                f"levels must refine by 2: {cur} does not follow {prev}"
            )
    return counts


def _estimate_order(prev_error: float, cur_error: float) -> float | None:
    if prev_error <= ORDER_FLOOR or cur_error <= ORDER_FLOOR:
        return None
    return math.log2(prev_error / cur_error)


def _study_levels(levels: list[ConvergenceLevel], exc: ConvergenceError):
    exc.partial_table = ConvergenceTable(levels=tuple(levels))
    raise exc


def convergence_study(
    solution: Oracle,
    coefficients: CoefficientSet | None,
    node_counts: Sequence[int],
    p: float = 2.0,
    lengths: tuple[float, float] = (1.0, 1.0),
    tolerance: float = 1e-10,
    max_iterations: int = 100,
    method: str = "marching",
) -> ConvergenceTable:
    """Manufactured-solution errors of u on a chain of dyadically refined grids.

    Errors are taken against the oracle itself; orders are log2 ratios of sup
    errors at successive levels, omitted below the roundoff floor.  A solver
    failure propagates with the partial table attached to the exception.
    """
    counts = _check_level_chain(node_counts)
    levels: list[ConvergenceLevel] = []
    prev_sup = None
    for n in counts:
        grid = Grid2D.from_lengths(lengths, (n, n))
        coeffs = (
            CoefficientSet.zeros(grid)
            if coefficients is None
            else coefficients.resample(grid)
        )
        spec = manufacture(
            solution, coeffs, grid, p=p,
            tolerance=tolerance, max_iterations=max_iterations, method=method,
        )
        try:
            sol = solve(spec)
        except ConvergenceError as exc:
            _study_levels(levels, exc)
        diff = sol.jet[(0, 0)] - solution.derivative((0, 0), grid)
        sup = lp_norm(diff, math.inf)
        levels.append(
            ConvergenceLevel(
                nodes=n,
                h=max(grid.g1.spacing, grid.g2.spacing),
                sup_error=sup,
                lp_error=lp_norm(diff, p),
                order=None if prev_sup is None else _estimate_order(prev_sup, sup),
                iterations=sol.diagnostics.iterations,
                residual=sol.diagnostics.pde_residual,
            )
        )
        prev_sup = sup
    return ConvergenceTable(levels=tuple(levels))


def _load_reference(path: Path, nodes: int, lengths) -> np.ndarray | None:
    if not path.exists():
        return None
    with np.load(path) as payload:
        if (
            int(payload["nodes"]) == nodes
            and np.array_equal(payload["lengths"], np.asarray(lengths, float))
        ):
            return np.array(payload["v"])
    return None


def self_convergence_study(
    solution: Oracle,
    coefficients: CoefficientSet | None,
    node_counts: Sequence[int],
    reference_nodes: int = 257,
    p: float = 2.0,
    lengths: tuple[float, float] = (1.0, 1.0),
    tolerance: float = 1e-10,
    max_iterations: int = 100,
    method: str = "marching",
    cache_path: str | Path | None = None,
) -> ConvergenceTable:
    """Density errors against an over-refined marching solve of the same problem.

    The honest oracle when no closed form is trustworthy (discontinuous
    coefficients): the reference is a marching solve on ``reference_nodes``
    squared, optionally cached to a file, and each level is compared on its
    own (nested) nodes.
    """
    counts = _check_level_chain(node_counts)
    ref_n = int(reference_nodes)
    _check_level_chain([ref_n])
    for n in counts:
        if (ref_n - 1) % (n - 1):
            raise InvalidParameterError(
                f"level {n} nodes are not nested in the {ref_n} reference"
            )

    ref_v = None
    cache = Path(cache_path) if cache_path is not None else None
    if cache is not None:
        ref_v = _load_reference(cache, ref_n, lengths)
    if ref_v is None:
        ref_grid = Grid2D.from_lengths(lengths, (ref_n, ref_n))
        ref_coeffs = (
            CoefficientSet.zeros(ref_grid)
            if coefficients is None
            else coefficients.resample(ref_grid)
        )
        ref_spec = manufacture(
            solution, ref_coeffs, ref_grid, p=p,
            tolerance=tolerance, max_iterations=max_iterations, method="marching",
        )
        ref_v = solve(ref_spec).v.values
        if cache is not None:
            cache.parent.mkdir(parents=True, exist_ok=True)
            np.savez(cache, v=ref_v, nodes=ref_n, lengths=np.asarray(lengths, float))

    levels: list[ConvergenceLevel] = []
    prev_sup = None
    for n in counts:
        grid = Grid2D.from_lengths(lengths, (n, n))
        coeffs = (
            CoefficientSet.zeros(grid)
            if coefficients is None
            else coefficients.resample(grid)
        )
        spec = manufacture(
            solution, coeffs, grid, p=p,
            tolerance=tolerance, max_iterations=max_iterations, method=method,
        )
        try:
            sol = solve(spec)
        except ConvergenceError as exc:
            _study_levels(levels, exc)
        stride = (ref_n - 1) // (n - 1)
        diff = Field2D(grid, sol.v.values - ref_v[::stride, ::stride])
        sup = lp_norm(diff, math.inf)
        levels.append(
            ConvergenceLevel(
                nodes=n,
                h=max(grid.g1.spacing, grid.g2.spacing),
                sup_error=sup,
                lp_error=lp_norm(diff, p),
                order=None if prev_sup is None else _estimate_order(prev_sup, sup),
                iterations=sol.diagnostics.iterations,
                residual=sol.diagnostics.pde_residual,
            )
        )
        prev_sup = sup
    return ConvergenceTable(levels=tuple(levels))


def write_convergence_csv(table: ConvergenceTable, path: str | Path) -> None:
    """Columns: nodes, h, sup_error, lp_error, order (empty when not applicable)."""
    lines = ["nodes,h,sup_error,lp_error,order"]
    for lv in table.levels:
        order = "" if lv.order is None else f"{lv.order:.17g}"
        lines.append(
            f"{lv.nodes},{lv.h:.17g},{lv.sup_error:.17g},{lv.lp_error:.17g},{order}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

"""Reduction to a second-kind 2-D Volterra equation and its solution.

Substituting the jet representation into the differential equation leaves a
single equation for the density v = D1^2 D2^4 u:

    v(x) + sum_{(i,j) != (2,4)} a_ij(x) * (I_ij v)(x) = f(x),

where I_ij is the causal integral of ``volterra_part`` and f collects the
prescribed highest-order trace minus the coefficient-weighted data terms.
Two solvers are provided: Picard iteration (successive substitution, the
Neumann-series realization) and a direct triangular marching sweep that
solves the discrete system exactly in one pass.  Both act on the same
trapezoid discretization, so they can cross-validate each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np
from scipy.linalg import solve_triangular

from .boundary import NonClassicalData
from .errors import (
    ConvergenceError,
    GridMismatchError,
    InvalidCoefficientError,
    InvalidParameterError,
    SingularNodeError,
)
from .grids import (
    MIXED_NORM_CONVENTION,
    Field2D,
    Grid2D,
    cumulative_weight_matrix,
    lp_norm,
    mixed_norm,
)
from .representation import (
    ALL_ORDERS,
    DENSITY_ORDER,
    JetField,
    MixedOrder,
    as_order,
    boundary_part,
    reconstruct_jet,
    volterra_part,
)

__all__ = [
    "COEFFICIENT_ORDERS",
    "class_tag",
    "step_x1",
    "CoefficientSet",
    "CoefficientNorm",
    "CoefficientReport",
    "ProblemSpec",
    "SolveDiagnostics",
    "Solution",
    "validate_coefficients",
    "assemble_forcing",
    "apply_volterra",
    "solve_picard",
    "solve_marching",
    "solve",
]

#: the 14 lower-order coefficient slots, everything below the leading (2, 4)
COEFFICIENT_ORDERS: tuple[MixedOrder, ...] = tuple(
    o for o in ALL_ORDERS if o != DENSITY_ORDER
)

CoefficientRule = Union[float, int, Callable]


def class_tag(order) -> str:
    """Integrability class of the coefficient slot at the given order."""
    i, j = as_order(order)
    if (i, j) == DENSITY_ORDER:
        raise InvalidParameterError("the leading order carries no coefficient")
    if i == 2:
        return "sup-x1-Lp-x2"
    if j == 4:
        return "Lp-x1-sup-x2"
    return "plain-Lp"


def step_x1(jump: float, left: float, right: float) -> Callable:
    """Piecewise-constant rule in x1; a node exactly on the jump takes the
    right-limit value."""

    def rule(x1, x2):
        return np.where(x1 < jump, float(left), float(right))

    return rule


def _sample_rule(grid: Grid2D, rule: CoefficientRule) -> np.ndarray:
    if callable(rule):
        x1, x2 = grid.meshgrid()
        with np.errstate(all="ignore"):  # finiteness is checked below
            vals = np.broadcast_to(np.asarray(rule(x1, x2), dtype=float), grid.shape)
    else:
        vals = np.full(grid.shape, float(rule))
    if not np.all(np.isfinite(vals)):
        raise InvalidCoefficientError("coefficient samples must be finite")
    return np.ascontiguousarray(vals)


@dataclass(frozen=True, eq=False)
class CoefficientSet:
    """The 14 lower-order coefficient fields, sampled on one grid.

    Sets built from closed-form rules (constants, callables, steps) remember
    them and can be resampled on refined grids; sets built from raw tables
    cannot.
    """

    grid: Grid2D
    fields: tuple[Field2D, ...]
    rules: tuple[CoefficientRule, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if len(self.fields) != len(COEFFICIENT_ORDERS):
            raise InvalidParameterError(
                f"need {len(COEFFICIENT_ORDERS)} coefficient fields"
            )
        for f in self.fields:
            if not f.grid.matches(self.grid):
                raise GridMismatchError("coefficient field lives on a different grid")
        if self.rules is not None:
            object.__setattr__(self, "rules", tuple(self.rules))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "CoefficientSet":
        return cls.from_rules(grid, {})

    @classmethod
    def from_rules(cls, grid: Grid2D, rules: Mapping) -> "CoefficientSet":
        normalized = {as_order(o): r for o, r in rules.items()}
        unknown = set(normalized) - set(COEFFICIENT_ORDERS)
        if unknown:
            raise InvalidParameterError(f"no coefficient slot at orders {sorted(unknown)}")
        full = tuple(normalized.get(o, 0.0) for o in COEFFICIENT_ORDERS)
        fields = tuple(Field2D(grid, _sample_rule(grid, r)) for r in full)
        return cls(grid, fields, rules=full)

    @classmethod
    def from_fields(cls, grid: Grid2D, entries: Mapping) -> "CoefficientSet":
        normalized = {as_order(o): f for o, f in entries.items()}
        unknown = set(normalized) - set(COEFFICIENT_ORDERS)
        if unknown:
            raise InvalidParameterError(f"no coefficient slot at orders {sorted(unknown)}")
        fields = tuple(
            normalized.get(o, Field2D.zeros(grid)) for o in COEFFICIENT_ORDERS
        )
        return cls(grid, fields, rules=None)

    def field(self, order) -> Field2D:
        return self.fields[COEFFICIENT_ORDERS.index(as_order(order))]

    def tag(self, order) -> str:
        return class_tag(order)

    def resample(self, grid: Grid2D) -> "CoefficientSet":
        if self.rules is None:
            raise InvalidParameterError(
                "coefficient set was built from raw tables and cannot be resampled"
            )
        fields = tuple(Field2D(grid, _sample_rule(grid, r)) for r in self.rules)
        return CoefficientSet(grid, fields, rules=self.rules)


@dataclass(frozen=True)
class CoefficientNorm:
    order: MixedOrder
    tag: str
    norm: float


@dataclass(frozen=True)
class CoefficientReport:
    """Discrete norms of all coefficient entries, one per class tag."""

    p: float
    entries: tuple[CoefficientNorm, ...]
    convention: str = MIXED_NORM_CONVENTION


def validate_coefficients(c: CoefficientSet, p: float = 2.0) -> CoefficientReport:
    """Report the class-matching discrete norm of every coefficient entry.

    Never rejects a finite coefficient: discontinuous entries are the
    intended use case.  Non-finite samples raise.
    """
    entries = []
    for order in COEFFICIENT_ORDERS:
        f = c.field(order)
        if not np.all(np.isfinite(f.values)):
            raise InvalidCoefficientError(f"coefficient {tuple(order)} is not finite")
        tag = class_tag(order)
        if tag == "plain-Lp":
            norm = lp_norm(f, p)
        elif tag == "sup-x1-Lp-x2":
            norm = mixed_norm(f, inner_axis=2, inner_p=p, outer_p=math.inf)
        else:
            norm = mixed_norm(f, inner_axis=2, inner_p=math.inf, outer_p=p)
        entries.append(CoefficientNorm(order=order, tag=tag, norm=norm))
    return CoefficientReport(p=float(p), entries=tuple(entries))


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A complete discrete problem: grid, coefficients, data, forcing, solver knobs."""

    grid: Grid2D
    coefficients: CoefficientSet
    data: NonClassicalData
    rhs: Field2D
    p: float = 2.0
    tolerance: float = 1e-10
    max_iterations: int = 100
    method: str = "marching"

    def __post_init__(self):
        if not (self.p >= 1):
            raise InvalidParameterError("p must be >= 1")
        if not (self.tolerance > 0):
            raise InvalidParameterError("tolerance must be positive")
        if self.max_iterations < 1:
            raise InvalidParameterError("max_iterations must be >= 1")
        if self.method not in ("picard", "marching"):
            raise InvalidParameterError(f"unknown method {self.method!r}")
        if not self.coefficients.grid.matches(self.grid):
            raise GridMismatchError("coefficients live on a different grid")
        if not self.rhs.grid.matches(self.grid):
            raise GridMismatchError("rhs lives on a different grid")
        if not (
            self.data.grid1.matches(self.grid.g1)
            and self.data.grid2.matches(self.grid.g2)
        ):
            raise GridMismatchError("boundary data lives on a different grid")


@dataclass(frozen=True)
class SolveDiagnostics:
    method: str
    iterations: int
    residual_history: tuple[float, ...]
    pde_residual: float
    boundary_residual: float


@dataclass(frozen=True, eq=False)
class Solution:
    """Solved density, the reconstructed jet, and solve diagnostics."""

    v: Field2D
    jet: JetField
    diagnostics: SolveDiagnostics


def assemble_forcing(spec: ProblemSpec) -> Field2D:
    """Forcing of the reduced equation: rhs minus coefficient-weighted data terms."""
    out = spec.rhs.values.copy()
    for order in COEFFICIENT_ORDERS:
        a = spec.coefficients.field(order).values
        if not a.any():
            continue
        out -= a * boundary_part(spec.data, order, spec.grid).values
    return Field2D(spec.grid, out)


def apply_volterra(spec: ProblemSpec, v: Field2D) -> Field2D:
    """The causal operator K: coefficient-weighted Volterra integrals of v.

    (Kv)(x) depends only on v restricted to the rectangle [0, x1] x [0, x2].
    """
    if not v.grid.matches(spec.grid):
        raise GridMismatchError("v lives on a different grid")
    out = np.zeros(spec.grid.shape)
    for order in COEFFICIENT_ORDERS:
        a = spec.coefficients.field(order).values
        if not a.any():
            continue
        out += a * volterra_part(v, order).values
    return Field2D(spec.grid, out)


def _boundary_residual(spec: ProblemSpec, jet: JetField) -> float:
    """Worst node-wise mismatch between jet traces and the prescribed data."""
    worst = 0.0
    for i in range(2):
        for j in range(4):
            worst = max(worst, abs(float(jet[(i, j)].values[0, 0]) - spec.data.corner[i, j]))
    for j in range(4):
        gap = np.abs(jet[(2, j)].values[:, 0] - spec.data.edge_x1[j].values)
        worst = max(worst, float(np.max(gap)))
    for i in range(2):
        gap = np.abs(jet[(i, 4)].values[0, :] - spec.data.edge_x2[i].values)
        worst = max(worst, float(np.max(gap)))
    return worst


def _package(
    spec: ProblemSpec,
    v: Field2D,
    method: str,
    iterations: int,
    history: list[float],
) -> Solution:
    jet = reconstruct_jet(spec.data, v)
    diag = SolveDiagnostics(
        method=method,
        iterations=iterations,
        residual_history=tuple(history),
        pde_residual=history[-1],
        boundary_residual=_boundary_residual(spec, jet),
    )
    return Solution(v=v, jet=jet, diagnostics=diag)


def solve_picard(spec: ProblemSpec) -> Solution:
    """Successive substitution v_{n+1} = f - K v_n starting from v_0 = f.

    Stops when the sup-norm defect ||v + Kv - f|| drops below the spec
    tolerance; raises ConvergenceError (with the full residual history) if
    the iteration budget runs out first.
    """
    f = assemble_forcing(spec)
    v = f
    history: list[float] = []
    for iteration in range(1, spec.max_iterations + 1):
        kv = apply_volterra(spec, v)
        defect = v.values + kv.values - f.values
        residual = float(np.max(np.abs(defect)))
        history.append(residual)
        if residual <= spec.tolerance:
            return _package(spec, v, "picard", iteration, history)
        v = Field2D(spec.grid, f.values - kv.values)
    raise ConvergenceError(
        f"picard did not reach tolerance {spec.tolerance:g} within "
        f"{spec.max_iterations} iterations (last defect {history[-1]:.3e})",
        history,
    )


def _binom(n: int, k: int) -> float:
    return float(math.comb(n, k))


def solve_marching(spec: ProblemSpec) -> Solution:
    """Direct solve of the discrete system in one lexicographic sweep.

    The trapezoid discretization of K is block lower triangular by x1 rows,
    and within a row lower triangular in the x2 index, so the sweep is exact
    forward substitution.  The separable kernels (x1 - s)^a (x2 - t)^b are
    expanded into moments s^alpha t^beta, whose cumulative integrals admit
    row-by-row trapezoid recurrences; this keeps the sweep at O(rows * n2^2).
    """
    grid = spec.grid
    g1, g2 = grid.g1, grid.g2
    n1, n2 = grid.shape
    t1, t2 = g1.nodes, g2.nodes
    h1, h2 = g1.spacing, g2.spacing

    f = assemble_forcing(spec)
    fv = f.values

    active = [
        (order, spec.coefficients.field(order).values)
        for order in COEFFICIENT_ORDERS
        if spec.coefficients.field(order).values.any()
    ]

    tw2 = cumulative_weight_matrix(g2)
    t2pow = np.vstack([t2**b for b in range(4)])  # beta row index
    # qb[b][beta][l] = binom(b, beta) (-1)^beta t2^{b-beta} / b!
    qb = [
        [_binom(b, beta) * (-1.0) ** beta * t2 ** (b - beta) / math.factorial(b)
         for beta in range(b + 1)]
        for b in range(4)
    ]

    # cumulative moment state: Mknown[alpha, beta, l] and dknown[alpha, l]
    mknown = np.zeros((2, 4, n2))
    dknown = np.zeros((2, n2))
    v = np.zeros((n1, n2))
    diag_idx = np.arange(n2)

    for k in range(n1):
        t1k = t1[k]
        # trapezoid weight of the current row inside the x1 cumulative sums
        ek = np.array([h1 / 2 * t1k**a for a in range(2)]) if k >= 1 else np.zeros(2)

        g_comb = np.zeros((2, 4, n2))
        h_comb = np.zeros((4, n2))
        j_comb = np.zeros((2, n2))
        for (i, j), avals in active:
            arow = avals[k, :]
            if i <= 1 and j <= 3:
                a_pow, b_pow = 1 - i, 3 - j
                for alpha in range(a_pow + 1):
                    qa = (
                        _binom(a_pow, alpha)
                        * (-1.0) ** alpha
                        * t1k ** (a_pow - alpha)
                        / math.factorial(a_pow)
                    )
                    for beta in range(b_pow + 1):
                        g_comb[alpha, beta] += arow * (qa * qb[b_pow][beta])
            elif i == 2:
                b_pow = 3 - j
                for beta in range(b_pow + 1):
                    h_comb[beta] += arow * qb[b_pow][beta]
            else:  # j == 4
                a_pow = 1 - i
                for alpha in range(a_pow + 1):
                    qa = (
                        _binom(a_pow, alpha)
                        * (-1.0) ** alpha
                        * t1k ** (a_pow - alpha)
                        / math.factorial(a_pow)
                    )
                    j_comb[alpha] += arow * qa

        known = np.einsum("abl,abl->l", g_comb, mknown) + np.einsum(
            "al,al->l", j_comb, dknown
        )
        pb = np.einsum("abl,a->bl", g_comb, ek) + h_comb
        jd = j_comb[0] * ek[0] + j_comb[1] * ek[1]

        rowmat = tw2 * (pb.T @ t2pow)
        rowmat[diag_idx, diag_idx] += 1.0 + jd
        diag = rowmat[diag_idx, diag_idx]
        bad = np.abs(diag) <= 1e-12
        if bad.any():
            l_bad = int(np.argmax(bad))
            raise SingularNodeError(
                f"near-singular diagonal 1 + d = {diag[l_bad]:.3e} at node "
                f"({k}, {l_bad}); refine the grid",
                (k, l_bad),
            )
        vrow = solve_triangular(rowmat, fv[k, :] - known, lower=True, check_finite=False)
        v[k, :] = vrow

        # row moments u[beta, l] = int_0^{x2_l} t^beta v(x1_k, t) dt
        u = np.empty((4, n2))
        for beta in range(4):
            integrand = t2pow[beta] * vrow
            u[beta, 0] = 0.0
            u[beta, 1:] = np.cumsum(h2 / 2 * (integrand[:-1] + integrand[1:]))

        for alpha in range(2):
            w = h1 / 2 * t1k**alpha
            inc = w + ek[alpha]  # ek is 0 for the first row
            mknown[alpha] += inc * u
            dknown[alpha] += inc * vrow

    vfield = Field2D(grid, v)
    kv = apply_volterra(spec, vfield)
    residual = float(np.max(np.abs(vfield.values + kv.values - fv)))
    if residual > spec.tolerance:
        raise ConvergenceError(
            f"marching defect {residual:.3e} exceeds tolerance {spec.tolerance:g}; "
            "the tolerance is below attainable precision on this grid",
            [residual],
        )
    return _package(spec, vfield, "marching", 1, [residual])


def solve(spec: ProblemSpec) -> Solution:
    """Solve the reduced Volterra equation with the method the spec selects."""
    if spec.method == "picard":
        return solve_picard(spec)
    return solve_marching(spec)

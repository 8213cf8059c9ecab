"""Uniform tensor grids, sampled fields, and discrete norms.

Everything downstream (boundary conversion, jet reconstruction, the
integral-equation solvers) is built on the composite trapezoid rule, so the
cumulative quadrature matrices live here too.  Node values are the only
representation of a function; no interpolation layer exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Union

import numpy as np

from .errors import GridMismatchError, InvalidParameterError

__all__ = [
    "Grid1D",
    "Grid2D",
    "Field1D",
    "Field2D",
    "lp_norm",
    "mixed_norm",
    "cumulative_volterra_1d",
    "trapezoid_weights",
    "cumulative_weight_matrix",
    "taylor_volterra_matrix",
    "MIXED_NORM_CONVENTION",
]

# The notation L_{q,r} with superscript (x1, x2) pairs exponents with axes in
# the written order: q acts along x1 (outermost), r along x2 (innermost).
# This is a documented convention of this package, surfaced in diagnostics.
MIXED_NORM_CONVENTION = (
    "mixed-norm exponents pair with axes in order: "
    "the first exponent acts along x1 (outer), the second along x2 (inner)"
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Grid1D:
    """Uniform grid on [0, length] with nodes k * length / (node_count - 1)."""

    length: float
    node_count: int
    nodes: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (math.isfinite(self.length) and self.length > 0):
            raise InvalidParameterError("grid length must be positive and finite")
        if int(self.node_count) != self.node_count or self.node_count < 3:
            raise InvalidParameterError("grid needs an integer node count >= 3")
        object.__setattr__(self, "node_count", int(self.node_count))
        object.__setattr__(
            self, "nodes", _frozen(np.linspace(0.0, self.length, self.node_count))
        )

    @property
    def spacing(self) -> float:
        return self.length / (self.node_count - 1)

    def matches(self, other: "Grid1D") -> bool:
        return self.node_count == other.node_count and self.length == other.length


@dataclass(frozen=True, eq=False)
class Grid2D:
    """Tensor product of two 1-D grids; axis 1 is x1, axis 2 is x2."""

    g1: Grid1D
    g2: Grid1D

    @classmethod
    def from_lengths(cls, lengths, node_counts) -> "Grid2D":
        return cls(
            Grid1D(float(lengths[0]), int(node_counts[0])),
            Grid1D(float(lengths[1]), int(node_counts[1])),
        )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.g1.node_count, self.g2.node_count)

    def matches(self, other: "Grid2D") -> bool:
        return self.g1.matches(other.g1) and self.g2.matches(other.g2)

    def meshgrid(self):
        return np.meshgrid(self.g1.nodes, self.g2.nodes, indexing="ij")


@dataclass(frozen=True, eq=False)
class Field1D:
    """Real node values on a 1-D grid."""

    grid: Grid1D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.grid.node_count,):
            raise GridMismatchError(
                f"expected {self.grid.node_count} values, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("field values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def zeros(cls, grid: Grid1D) -> "Field1D":
        return cls(grid, np.zeros(grid.node_count))

    @classmethod
    def from_callable(cls, grid: Grid1D, fn: Callable) -> "Field1D":
        vals = np.asarray(fn(grid.nodes), dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.node_count, float(vals))
        return cls(grid, vals)

    def _require_same_grid(self, other: "Field1D") -> None:
        if not self.grid.matches(other.grid):
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other):
        if not isinstance(other, Field1D):
            return NotImplemented
        self._require_same_grid(other)
        return Field1D(self.grid, self.values + other.values)

    def __sub__(self, other):
        if not isinstance(other, Field1D):
            return NotImplemented
        self._require_same_grid(other)
        return Field1D(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return Field1D(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Field1D(self.grid, -self.values)


@dataclass(frozen=True, eq=False)
class Field2D:
    """Real node values on a 2-D grid, indexed [x1 index, x2 index]."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise GridMismatchError(
                f"expected value shape {self.grid.shape}, got {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            raise InvalidParameterError("field values must be finite")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def zeros(cls, grid: Grid2D) -> "Field2D":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def from_callable(cls, grid: Grid2D, fn: Callable) -> "Field2D":
        x1, x2 = grid.meshgrid()
        vals = np.asarray(fn(x1, x2), dtype=float)
        if vals.ndim == 0:
            vals = np.full(grid.shape, float(vals))
        return cls(grid, np.broadcast_to(vals, grid.shape).copy())

    def _require_same_grid(self, other: "Field2D") -> None:
        if not self.grid.matches(other.grid):
            raise GridMismatchError("fields live on different grids")

    def __add__(self, other):
        if not isinstance(other, Field2D):
            return NotImplemented
        self._require_same_grid(other)
        return Field2D(self.grid, self.values + other.values)

    def __sub__(self, other):
        if not isinstance(other, Field2D):
            return NotImplemented
        self._require_same_grid(other)
        return Field2D(self.grid, self.values - other.values)

    def __mul__(self, scalar):
        if not isinstance(scalar, (int, float)):
            return NotImplemented
        return Field2D(self.grid, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return Field2D(self.grid, -self.values)


AnyField = Union[Field1D, Field2D]


def trapezoid_weights(grid: Grid1D) -> np.ndarray:
    """Composite-trapezoid weights over the whole interval [0, length]."""
    w = np.full(grid.node_count, grid.spacing)
    w[0] = w[-1] = grid.spacing / 2
    return w


def _checked_exponent(p: float) -> float:
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidParameterError(f"norm exponent must satisfy p >= 1, got {p!r}")
    return p


def lp_norm(f: AnyField, p: float = 2.0) -> float:
    """Discrete L_p norm with trapezoid weights; p = inf gives the sup norm."""
    p = _checked_exponent(p)
    v = f.values
    if math.isinf(p):
        return float(np.max(np.abs(v)))
    if isinstance(f, Field1D):
        w = trapezoid_weights(f.grid)
    else:
        w = np.outer(trapezoid_weights(f.grid.g1), trapezoid_weights(f.grid.g2))
    return float(np.sum(w * np.abs(v) ** p) ** (1.0 / p))


def mixed_norm(f: Field2D, inner_axis: int, inner_p: float, outer_p: float) -> float:
    """Iterated norm of a 2-D field.

    Takes the discrete L_{inner_p} norm along ``inner_axis`` (1 for x1, 2 for
    x2) at each node of the other axis, then the L_{outer_p} norm of the
    resulting 1-D field.  See ``MIXED_NORM_CONVENTION`` for how subscript
    pairs map onto axes.
    """
    inner_p = _checked_exponent(inner_p)
    outer_p = _checked_exponent(outer_p)
    if inner_axis not in (1, 2):
        raise InvalidParameterError(f"inner_axis must be 1 or 2, got {inner_axis!r}")
    axis = inner_axis - 1
    inner_grid = f.grid.g1 if inner_axis == 1 else f.grid.g2
    outer_grid = f.grid.g2 if inner_axis == 1 else f.grid.g1
    a = np.abs(f.values)
    if math.isinf(inner_p):
        inner = np.max(a, axis=axis)
    else:
        w = trapezoid_weights(inner_grid)
        w = w[:, None] if axis == 0 else w[None, :]
        inner = np.sum(w * a**inner_p, axis=axis) ** (1.0 / inner_p)
    return lp_norm(Field1D(outer_grid, inner), outer_p)


@lru_cache(maxsize=None)
def cumulative_weight_matrix(grid: Grid1D) -> np.ndarray:
    """W[k, m]: trapezoid weight of node m in the integral over [0, x_k].

    Row 0 is identically zero (empty integral), so applying the matrix always
    yields exact 0 at the left endpoint.
    """
    n = grid.node_count
    h = grid.spacing
    w = np.tril(np.full((n, n), h))
    w[:, 0] = h / 2
    np.fill_diagonal(w, h / 2)
    w[0, :] = 0.0
    return _frozen(w)


@lru_cache(maxsize=None)
def taylor_volterra_matrix(grid: Grid1D, power: int) -> np.ndarray:
    """Matrix form of f -> int_0^{x_k} (x_k - s)^power / power! * f(s) ds."""
    if power < 0:
        raise InvalidParameterError("kernel power must be nonnegative")
    x = grid.nodes
    diff = x[:, None] - x[None, :]
    kernel = np.where(diff >= 0, diff, 0.0) ** power / math.factorial(power)
    return _frozen(cumulative_weight_matrix(grid) * kernel)


def cumulative_volterra_1d(kernel: Callable, f: Field1D) -> Field1D:
    """Cumulative integral F(x_k) = int_0^{x_k} kernel(x_k, s) f(s) ds.

    ``kernel`` must accept numpy arrays and broadcast; it is only ever
    evaluated on the triangle 0 <= s <= x and must be finite there.  F(0) is
    exactly 0.
    """
    x = f.grid.nodes
    with np.errstate(all="ignore"):  # only the lower triangle is used below
        raw = np.asarray(kernel(x[:, None], x[None, :]), dtype=float)
    kmat = np.where(x[:, None] >= x[None, :], raw, 0.0)
    if not np.all(np.isfinite(kmat)):
        raise InvalidParameterError("kernel must be finite on the integration triangle")
    out = (cumulative_weight_matrix(f.grid) * kmat) @ f.values
    out[0] = 0.0
    return Field1D(f.grid, out)

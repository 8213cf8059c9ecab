import numpy as np
import pytest

import goursatkit as gk


def make_grid(n1=17, n2=17, l1=1.0, l2=1.0) -> gk.Grid2D:
    return gk.Grid2D.from_lengths((l1, l2), (n1, n2))


def poly_trace(rng: np.random.Generator, nodes: np.ndarray) -> np.ndarray:
    """Random polynomial of degree <= 3 sampled at the nodes."""
    c = rng.uniform(-1.0, 1.0, 4)
    return c[0] + c[1] * nodes + c[2] * nodes**2 + c[3] * nodes**3


def random_nonclassical(grid: gk.Grid2D, rng: np.random.Generator) -> gk.NonClassicalData:
    """Scalars uniform in [-1, 1]; traces random degree-<=3 polynomials."""
    return gk.NonClassicalData(
        corner=rng.uniform(-1.0, 1.0, (2, 4)),
        edge_x1=tuple(gk.Field1D(grid.g1, poly_trace(rng, grid.g1.nodes)) for _ in range(4)),
        edge_x2=tuple(gk.Field1D(grid.g2, poly_trace(rng, grid.g2.nodes)) for _ in range(2)),
    )


def random_field2d(grid: gk.Grid2D, rng: np.random.Generator) -> gk.Field2D:
    return gk.Field2D(grid, rng.uniform(-1.0, 1.0, grid.shape))


def nc_gap(a: gk.NonClassicalData, b: gk.NonClassicalData) -> float:
    """Largest absolute difference across scalars and trace nodes."""
    gaps = [float(np.max(np.abs(a.corner - b.corner)))]
    for fa, fb in zip(a.edge_x1 + a.edge_x2, b.edge_x1 + b.edge_x2):
        gaps.append(float(np.max(np.abs(fa.values - fb.values))))
    return max(gaps)


def classical_value_gap(a: gk.ClassicalData, b: gk.ClassicalData) -> float:
    """Largest node-wise difference over the six value fields (order 0)."""
    gaps = []
    for ja, jb in zip(a.phi + a.psi, b.phi + b.psi):
        gaps.append(float(np.max(np.abs(ja.derivative(0).values - jb.derivative(0).values))))
    return max(gaps)


@pytest.fixture
def grid17() -> gk.Grid2D:
    return make_grid(17, 17)


@pytest.fixture
def grid65() -> gk.Grid2D:
    return make_grid(65, 65)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260810)

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import goursatkit as gk
from goursatkit.errors import GridMismatchError, IncompleteJetError, InvalidParameterError

from conftest import make_grid, random_field2d, random_nonclassical

INF = float("inf")


def quartic_monomial():
    # u = x1^2 x2^4 / 48, whose density D1^2 D2^4 u is identically 1
    coeffs = np.zeros((3, 5))
    coeffs[2, 4] = 1.0 / 48.0
    return gk.PolySolution(coeffs)


class TestJetField:
    def test_missing_entry_rejected(self, grid17):
        entries = {order: gk.Field2D.zeros(grid17) for order in gk.ALL_ORDERS}
        del entries[(1, 2)]
        with pytest.raises(IncompleteJetError):
            gk.JetField.from_entries(grid17, entries)

    def test_grid_mismatch_rejected(self, grid17):
        entries = {order: gk.Field2D.zeros(grid17) for order in gk.ALL_ORDERS}
        entries[(0, 0)] = gk.Field2D.zeros(make_grid(9, 9))
        with pytest.raises(GridMismatchError):
            gk.JetField.from_entries(grid17, entries)

    def test_order_validation(self, grid17):
        jet = gk.JetField.zeros(grid17)
        with pytest.raises(InvalidParameterError):
            jet[(3, 0)]
        assert jet.density is jet[(2, 4)]


class TestSobolevNorm:
    def test_zero_jet(self, grid17):
        assert gk.sobolev_norm_2_4(gk.JetField.zeros(grid17), 2.0) == 0.0

    def test_constant_function(self, grid17):
        entries = {order: gk.Field2D.zeros(grid17) for order in gk.ALL_ORDERS}
        entries[(0, 0)] = gk.Field2D.from_callable(grid17, lambda x1, x2: 1.0)
        jet = gk.JetField.from_entries(grid17, entries)
        assert gk.sobolev_norm_2_4(jet, INF) == 1.0

    def test_bilinear_function(self, grid17):
        # u = x1 x2 on the unit square: the four nonzero derivatives
        # u, D1 u, D2 u, D1 D2 u all have sup 1
        jet = gk.oracle_jet(gk.PolySolution([[0.0, 0.0], [0.0, 1.0]]), grid17)
        assert gk.sobolev_norm_2_4(jet, INF) == 4.0


class TestBoundaryPart:
    def test_order_00_equals_base_with_zero_density(self, grid17, rng):
        nc = random_nonclassical(grid17, rng)
        base = gk.base_representation(nc, gk.Field2D.zeros(grid17))
        bp = gk.boundary_part(nc, (0, 0), grid17)
        assert np.array_equal(base.values, bp.values)

    def test_second_x1_derivatives_trace_exactly(self, grid17, rng):
        nc = random_nonclassical(grid17, rng)
        for j in range(4):
            bp = gk.boundary_part(nc, (2, j), grid17)
            assert np.array_equal(bp.values[:, 0], nc.edge_x1[j].values)

    def test_matches_polynomial_oracle_without_density(self, grid65):
        # u = x1^2 x2^4: at order (1, 2) both the data part and the density
        # part are trapezoid-exact, so their sum matches the oracle tightly
        coeffs = np.zeros((3, 5))
        coeffs[2, 4] = 1.0
        u = gk.PolySolution(coeffs)
        nc = gk.nonclassical_from_oracle(u, grid65)
        v = u.derivative((2, 4), grid65)
        oracle_12 = u.derivative((1, 2), grid65)
        volterra_12 = gk.volterra_part(v, (1, 2))
        bp = gk.boundary_part(nc, (1, 2), grid65)
        assert np.max(np.abs(bp.values - (oracle_12.values - volterra_12.values))) <= 1e-12
        # for this u* the data part of (1, 2) vanishes identically
        assert np.max(np.abs(bp.values)) <= 1e-13


class TestVolterraPart:
    def test_zero_density(self, grid17):
        z = gk.Field2D.zeros(grid17)
        for order in gk.ALL_ORDERS:
            assert np.array_equal(gk.volterra_part(z, order).values, z.values)

    def test_leading_order_is_identity(self, grid17, rng):
        v = random_field2d(grid17, rng)
        assert gk.volterra_part(v, (2, 4)) is v

    def test_unit_density_order_13(self, grid17):
        v = gk.Field2D.from_callable(grid17, lambda x1, x2: 1.0)
        x1, x2 = grid17.meshgrid()
        out = gk.volterra_part(v, (1, 3))
        assert np.max(np.abs(out.values - x1 * x2)) <= 1e-12

    def test_unit_density_order_00(self, grid65):
        v = gk.Field2D.from_callable(grid65, lambda x1, x2: 1.0)
        x1, x2 = grid65.meshgrid()
        out = gk.volterra_part(v, (0, 0))
        exact = x1**2 * x2**4 / 48.0
        assert np.max(np.abs(out.values - exact)) <= 2e-3
        assert np.array_equal(out.values[:, 0], np.zeros(65))


class TestBaseRepresentation:
    def test_all_zero(self, grid17):
        nc = gk.NonClassicalData.zeros(grid17)
        u = gk.base_representation(nc, gk.Field2D.zeros(grid17))
        assert np.array_equal(u.values, np.zeros(grid17.shape))

    def test_constant_corner(self, grid17):
        corner = np.zeros((2, 4))
        corner[0, 0] = 2.5
        nc = gk.NonClassicalData(
            corner=corner,
            edge_x1=tuple(gk.Field1D.zeros(grid17.g1) for _ in range(4)),
            edge_x2=tuple(gk.Field1D.zeros(grid17.g2) for _ in range(2)),
        )
        u = gk.base_representation(nc, gk.Field2D.zeros(grid17))
        assert np.all(u.values == 2.5)

    def test_restrictions_reproduce_edge_rebuild(self, grid17, rng):
        # the two restrictions are the same quadratures as to_classical
        nc = random_nonclassical(grid17, rng)
        v = random_field2d(grid17, rng)
        u = gk.base_representation(nc, v)
        c = gk.to_classical(nc)
        assert np.max(np.abs(u.values[0, :] - c.phi[0].derivative(0).values)) <= 1e-13
        assert np.max(np.abs(u.values[:, 0] - c.psi[0].derivative(0).values)) <= 1e-13


class TestReconstructJet:
    def test_zero_inputs(self, grid17):
        jet = gk.reconstruct_jet(gk.NonClassicalData.zeros(grid17), gk.Field2D.zeros(grid17))
        for order in gk.ALL_ORDERS:
            assert np.array_equal(jet[order].values, np.zeros(grid17.shape))

    def test_density_entry_is_v_itself(self, grid17, rng):
        nc = random_nonclassical(grid17, rng)
        v = random_field2d(grid17, rng)
        jet = gk.reconstruct_jet(nc, v)
        assert jet[(2, 4)] is v

    @settings(deadline=None, max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_trace_and_corner_recovery(self, seed):
        grid = make_grid(9, 9)
        rng = np.random.default_rng(seed)
        nc = random_nonclassical(grid, rng)
        v = random_field2d(grid, rng)
        jet = gk.reconstruct_jet(nc, v)
        for j in range(4):
            assert np.max(np.abs(jet[(2, j)].values[:, 0] - nc.edge_x1[j].values)) <= 1e-14
        for i in range(2):
            assert np.max(np.abs(jet[(i, 4)].values[0, :] - nc.edge_x2[i].values)) <= 1e-14
        for i in range(2):
            for j in range(4):
                assert abs(jet[(i, j)].values[0, 0] - nc.corner[i, j]) <= 1e-14

    def test_matches_polynomial_oracle_within_quadrature(self):
        u = quartic_monomial()
        errors = []
        for n in (33, 65):
            grid = make_grid(n, n)
            nc = gk.nonclassical_from_oracle(u, grid)
            v = u.derivative((2, 4), grid)
            jet = gk.reconstruct_jet(nc, v)
            oracle = gk.oracle_jet(u, grid)
            worst = max(
                float(np.max(np.abs(jet[o].values - oracle[o].values)))
                for o in gk.ALL_ORDERS
            )
            errors.append(worst)
        assert errors[-1] <= 2e-3
        assert math.log2(errors[0] / errors[1]) >= 1.8

    def test_exact_when_integrands_are_linear(self, grid17):
        # degrees (2, 3) kill the density and make every remaining
        # integrand at most linear per variable: the jet is exact
        coeffs = np.zeros((3, 4))
        coeffs[2, 3] = 1.0
        coeffs[1, 1] = 2.0
        coeffs[0, 2] = -3.0
        u = gk.PolySolution(coeffs)
        nc = gk.nonclassical_from_oracle(u, grid17)
        v = u.derivative((2, 4), grid17)
        assert np.array_equal(v.values, np.zeros(grid17.shape))
        jet = gk.reconstruct_jet(nc, v)
        oracle = gk.oracle_jet(u, grid17)
        worst = max(
            float(np.max(np.abs(jet[o].values - oracle[o].values)))
            for o in gk.ALL_ORDERS
        )
        assert worst <= 1e-12

    def test_edge_restriction_matches_classical_rebuild(self, grid17, rng):
        nc = random_nonclassical(grid17, rng)
        v = random_field2d(grid17, rng)
        jet = gk.reconstruct_jet(nc, v)
        c = gk.to_classical(nc)
        assert np.max(np.abs(jet[(0, 0)].values[0, :] - c.phi[0].derivative(0).values)) <= 1e-13

    @settings(deadline=None, max_examples=15)
    @given(seed=st.integers(0, 2**32 - 1), a=st.floats(-3, 3, allow_nan=False), b=st.floats(-3, 3, allow_nan=False))
    def test_joint_linearity(self, seed, a, b):
        grid = make_grid(9, 9)
        rng = np.random.default_rng(seed)
        nc1, nc2 = random_nonclassical(grid, rng), random_nonclassical(grid, rng)
        v1, v2 = random_field2d(grid, rng), random_field2d(grid, rng)
        combo = gk.reconstruct_jet(a * nc1 + b * nc2, a * v1 + b * v2)
        for order in gk.ALL_ORDERS:
            parts = a * gk.reconstruct_jet(nc1, v1)[order].values + b * gk.reconstruct_jet(nc2, v2)[order].values
            scale = max(1.0, float(np.max(np.abs(parts))))
            assert np.max(np.abs(combo[order].values - parts)) <= 1e-12 * scale

    def test_grid_mismatch_rejected(self, grid17, rng):
        nc = random_nonclassical(grid17, rng)
        with pytest.raises(GridMismatchError):
            gk.reconstruct_jet(nc, gk.Field2D.zeros(make_grid(9, 9)))

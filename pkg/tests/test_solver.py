import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import goursatkit as gk
from goursatkit.errors import (
    ConvergenceError,
    GridMismatchError,
    InvalidCoefficientError,
    InvalidParameterError,
    SingularNodeError,
)

from conftest import make_grid, random_field2d, random_nonclassical

INF = float("inf")


def random_spec(grid, rng, method="picard", **kwargs):
    rules = {}
    for order in gk.COEFFICIENT_ORDERS:
        lo, hi = rng.uniform(-0.4, 0.4, 2)
        rules[order] = (lambda lo=lo, hi=hi: (lambda x1, x2: lo + hi * x1 * x2))()
    return gk.ProblemSpec(
        grid=grid,
        coefficients=gk.CoefficientSet.from_rules(grid, rules),
        data=random_nonclassical(grid, rng),
        rhs=random_field2d(grid, rng),
        method=method,
        **kwargs,
    )


def quartic_monomial():
    coeffs = np.zeros((3, 5))
    coeffs[2, 4] = 1.0 / 48.0
    return gk.PolySolution(coeffs)


class TestCoefficientSet:
    def test_class_tags_follow_order(self):
        tags = [gk.class_tag(o) for o in gk.COEFFICIENT_ORDERS]
        assert tags.count("plain-Lp") == 8
        assert tags.count("sup-x1-Lp-x2") == 4
        assert tags.count("Lp-x1-sup-x2") == 2
        assert gk.class_tag((2, 1)) == "sup-x1-Lp-x2"
        assert gk.class_tag((1, 4)) == "Lp-x1-sup-x2"
        with pytest.raises(InvalidParameterError):
            gk.class_tag((2, 4))

    def test_exactly_14_slots(self, grid17):
        assert len(gk.COEFFICIENT_ORDERS) == 14
        cs = gk.CoefficientSet.zeros(grid17)
        assert len(cs.fields) == 14
        with pytest.raises(InvalidParameterError):
            gk.CoefficientSet.from_rules(grid17, {(2, 4): 1.0})

    def test_rule_backed_sets_resample(self, grid17):
        cs = gk.CoefficientSet.from_rules(grid17, {(0, 0): gk.step_x1(0.5, 1.0, 3.0)})
        fine = cs.resample(make_grid(33, 33))
        assert fine.grid.shape == (33, 33)
        assert float(fine.field((0, 0)).values.max()) == 3.0

    def test_table_sets_cannot_resample(self, grid17):
        cs = gk.CoefficientSet.from_fields(
            grid17, {(0, 0): gk.Field2D.from_callable(grid17, lambda a, b: a)}
        )
        with pytest.raises(InvalidParameterError):
            cs.resample(make_grid(33, 33))

    def test_nonfinite_rule_rejected(self, grid17):
        with pytest.raises(InvalidCoefficientError):
            gk.CoefficientSet.from_rules(grid17, {(0, 0): lambda a, b: 1.0 / (a + b)})

    def test_step_takes_right_limit_on_the_jump_node(self, grid17):
        rule = gk.step_x1(0.5, 1.0, 3.0)
        cs = gk.CoefficientSet.from_rules(grid17, {(0, 0): rule})
        vals = cs.field((0, 0)).values
        k_jump = 8  # x1 = 0.5 on a 17-node unit grid
        assert grid17.g1.nodes[k_jump] == 0.5
        assert np.all(vals[k_jump, :] == 3.0)
        assert np.all(vals[k_jump - 1, :] == 1.0)


class TestValidateCoefficients:
    def test_zero_set(self, grid17):
        report = gk.validate_coefficients(gk.CoefficientSet.zeros(grid17), 2.0)
        assert all(entry.norm == 0.0 for entry in report.entries)
        assert report.convention == gk.MIXED_NORM_CONVENTION

    def test_unit_constant_has_unit_l2(self, grid17):
        cs = gk.CoefficientSet.from_rules(grid17, {(0, 0): 1.0})
        report = gk.validate_coefficients(cs, 2.0)
        entry = next(e for e in report.entries if e.order == (0, 0))
        assert entry.tag == "plain-Lp"
        assert abs(entry.norm - 1.0) <= 1e-13

    def test_step_sup_norm(self, grid17):
        cs = gk.CoefficientSet.from_rules(grid17, {(0, 0): gk.step_x1(0.5, 1.0, 3.0)})
        report = gk.validate_coefficients(cs, INF)
        entry = next(e for e in report.entries if e.order == (0, 0))
        assert entry.norm == 3.0

    def test_mixed_tags_use_mixed_norms(self, grid17):
        # a_{2,0} = x2 has sup over x1 of the L2 in x2 equal to 1/sqrt(3)
        cs = gk.CoefficientSet.from_rules(grid17, {(2, 0): lambda a, b: b})
        report = gk.validate_coefficients(cs, 2.0)
        entry = next(e for e in report.entries if e.order == (2, 0))
        assert entry.tag == "sup-x1-Lp-x2"
        assert abs(entry.norm - 1.0 / math.sqrt(3.0)) < 1e-3


class TestAssembleForcing:
    def test_zero_coefficients_pass_rhs_through(self, grid17, rng):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.zeros(grid17),
            data=random_nonclassical(grid17, rng),
            rhs=random_field2d(grid17, rng),
        )
        f = gk.assemble_forcing(spec)
        assert np.array_equal(f.values, spec.rhs.values)

    def test_zero_data_and_rhs(self, grid17):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.from_rules(grid17, {(0, 0): 1.0, (1, 3): 2.0}),
            data=gk.NonClassicalData.zeros(grid17),
            rhs=gk.Field2D.zeros(grid17),
        )
        assert np.array_equal(gk.assemble_forcing(spec).values, np.zeros(grid17.shape))

    def test_manufactured_polynomial_algebra(self, grid65):
        # u* = x1^2 x2^4 / 48 has vanishing boundary data, so with a00 = 1
        # the forcing must equal the manufactured rhs = 1 + a00 u* exactly
        u = quartic_monomial()
        cs = gk.CoefficientSet.from_rules(grid65, {(0, 0): 1.0})
        spec = gk.manufacture(u, cs, grid65)
        x1, x2 = grid65.meshgrid()
        expected_rhs = 1.0 + x1**2 * x2**4 / 48.0
        assert np.max(np.abs(spec.rhs.values - expected_rhs)) <= 1e-14
        f = gk.assemble_forcing(spec)
        b00 = gk.boundary_part(spec.data, (0, 0), grid65)
        assert np.max(np.abs(b00.values)) == 0.0
        assert np.array_equal(f.values, spec.rhs.values)


class TestApplyVolterra:
    def test_zero_density(self, grid17, rng):
        spec = random_spec(grid17, rng)
        out = gk.apply_volterra(spec, gk.Field2D.zeros(grid17))
        assert np.array_equal(out.values, np.zeros(grid17.shape))

    def test_zero_coefficients(self, grid17, rng):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.zeros(grid17),
            data=gk.NonClassicalData.zeros(grid17),
            rhs=gk.Field2D.zeros(grid17),
        )
        out = gk.apply_volterra(spec, random_field2d(grid17, rng))
        assert np.array_equal(out.values, np.zeros(grid17.shape))

    def test_single_kernel_closed_form(self, grid17):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.from_rules(grid17, {(1, 3): 1.0}),
            data=gk.NonClassicalData.zeros(grid17),
            rhs=gk.Field2D.zeros(grid17),
        )
        ones = gk.Field2D.from_callable(grid17, lambda a, b: 1.0)
        x1, x2 = grid17.meshgrid()
        out = gk.apply_volterra(spec, ones)
        assert np.max(np.abs(out.values - x1 * x2)) <= 1e-12

    @settings(deadline=None, max_examples=20)
    @given(seed=st.integers(0, 2**32 - 1), cut=st.integers(1, 15))
    def test_causality_in_both_axes(self, seed, cut):
        grid = make_grid(17, 17)
        rng = np.random.default_rng(seed)
        spec = random_spec(grid, rng)
        v = random_field2d(grid, rng)
        kv = gk.apply_volterra(spec, v)

        trunc1 = v.values.copy()
        trunc1[cut + 1 :, :] = 0.0
        kv1 = gk.apply_volterra(spec, gk.Field2D(grid, trunc1))
        assert np.max(np.abs(kv.values[: cut + 1, :] - kv1.values[: cut + 1, :])) <= 1e-14

        trunc2 = v.values.copy()
        trunc2[:, cut + 1 :] = 0.0
        kv2 = gk.apply_volterra(spec, gk.Field2D(grid, trunc2))
        assert np.max(np.abs(kv.values[:, : cut + 1] - kv2.values[:, : cut + 1])) <= 1e-14

    def test_grid_mismatch(self, grid17, rng):
        spec = random_spec(grid17, rng)
        with pytest.raises(GridMismatchError):
            gk.apply_volterra(spec, gk.Field2D.zeros(make_grid(9, 9)))


class TestPicard:
    def test_zero_coefficients_converge_in_one_iteration(self, grid17, rng):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.zeros(grid17),
            data=random_nonclassical(grid17, rng),
            rhs=random_field2d(grid17, rng),
            method="picard",
        )
        sol = gk.solve_picard(spec)
        assert sol.diagnostics.iterations == 1
        assert sol.diagnostics.pde_residual == 0.0
        assert np.array_equal(sol.v.values, spec.rhs.values)

    def test_zero_problem(self, grid17):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.zeros(grid17),
            data=gk.NonClassicalData.zeros(grid17),
            rhs=gk.Field2D.zeros(grid17),
            method="picard",
        )
        sol = gk.solve_picard(spec)
        assert np.array_equal(sol.v.values, np.zeros(grid17.shape))

    def test_manufactured_quartic(self):
        u = quartic_monomial()
        errors = []
        for n in (33, 65):
            grid = make_grid(n, n)
            cs = gk.CoefficientSet.from_rules(grid, {(0, 0): 1.0})
            spec = gk.manufacture(u, cs, grid, method="picard", tolerance=1e-10)
            sol = gk.solve_picard(spec)
            assert sol.diagnostics.pde_residual <= 1e-10
            errors.append(float(np.max(np.abs(sol.v.values - 1.0))))
        assert errors[-1] <= 5e-3
        assert math.log2(errors[0] / errors[1]) >= 1.8

    def test_failure_carries_history(self, grid17, rng):
        spec = random_spec(grid17, rng, max_iterations=1)
        with pytest.raises(ConvergenceError) as excinfo:
            gk.solve_picard(spec)
        assert len(excinfo.value.residual_history) == 1
        assert excinfo.value.residual_history[0] > 0


class TestMarching:
    def test_zero_coefficients_bit_for_bit(self, grid17, rng):
        spec = gk.ProblemSpec(
            grid=grid17,
            coefficients=gk.CoefficientSet.zeros(grid17),
            data=random_nonclassical(grid17, rng),
            rhs=random_field2d(grid17, rng),
            method="marching",
        )
        sol = gk.solve_marching(spec)
        assert np.array_equal(sol.v.values, spec.rhs.values)
        assert sol.diagnostics.pde_residual == 0.0

    @settings(deadline=None, max_examples=10)
    @given(seed=st.integers(0, 2**32 - 1))
    def test_agrees_with_picard(self, seed):
        grid = make_grid(17, 17)
        rng = np.random.default_rng(seed)
        spec_p = random_spec(grid, rng, method="picard", tolerance=1e-11)
        spec_m = gk.ProblemSpec(
            grid=grid,
            coefficients=spec_p.coefficients,
            data=spec_p.data,
            rhs=spec_p.rhs,
            method="marching",
        )
        vp = gk.solve_picard(spec_p).v.values
        vm = gk.solve_marching(spec_m).v.values
        assert np.max(np.abs(vp - vm)) <= 10 * spec_p.tolerance

    def test_solves_discrete_system_exactly(self, grid17, rng):
        # the defect of the marching solution under the matrix-form operator
        # is pure roundoff: both paths discretize the same system
        spec = random_spec(grid17, rng, method="marching")
        sol = gk.solve_marching(spec)
        assert sol.diagnostics.pde_residual <= 1e-12

    def test_singular_node_is_named(self):
        # a_{1,4} = c makes the diagonal 1 + c h1/2 for every row past the
        # first; c = -2/h1 lands it exactly on zero at node (1, 0)
        grid = make_grid(5, 5)
        c = -2.0 / grid.g1.spacing
        spec = gk.ProblemSpec(
            grid=grid,
            coefficients=gk.CoefficientSet.from_rules(grid, {(1, 4): c}),
            data=gk.NonClassicalData.zeros(grid),
            rhs=gk.Field2D.from_callable(grid, lambda a, b: 1.0),
            method="marching",
        )
        with pytest.raises(SingularNodeError) as excinfo:
            gk.solve_marching(spec)
        assert excinfo.value.node == (1, 0)

    def test_step_coefficient_self_convergence(self):
        u = quartic_monomial()
        probe = make_grid(17, 17)
        cs = gk.CoefficientSet.from_rules(probe, {(0, 0): gk.step_x1(0.5, 1.0, 3.0)})
        table = gk.self_convergence_study(u, cs, [17, 33], reference_nodes=65)
        orders = table.orders()
        assert len(orders) == 1
        assert orders[0] >= 0.9


class TestSolveDispatch:
    def test_unknown_method_rejected(self, grid17):
        with pytest.raises(InvalidParameterError):
            gk.ProblemSpec(
                grid=grid17,
                coefficients=gk.CoefficientSet.zeros(grid17),
                data=gk.NonClassicalData.zeros(grid17),
                rhs=gk.Field2D.zeros(grid17),
                method="gauss",
            )

    @pytest.mark.parametrize("method", ["picard", "marching"])
    def test_boundary_residual_is_structural(self, method, grid17, rng):
        spec = random_spec(grid17, rng, method=method)
        sol = gk.solve(spec)
        assert sol.diagnostics.method == method
        assert sol.diagnostics.boundary_residual <= 1e-13

    def test_trig_convergence_through_solve(self):
        u = gk.TrigSolution()
        errors = []
        for n in (17, 33):
            grid = make_grid(n, n)
            cs = gk.CoefficientSet.from_rules(grid, {(0, 0): 1.0, (1, 2): 1.0})
            sol = gk.solve(gk.manufacture(u, cs, grid, method="marching"))
            diff = sol.jet[(0, 0)] - u.derivative((0, 0), grid)
            errors.append(gk.lp_norm(diff, INF))
        assert 1.8 <= math.log2(errors[0] / errors[1]) <= 2.2

    @settings(deadline=None, max_examples=10)
    @given(seed=st.integers(0, 2**32 - 1), a=st.floats(-2, 2, allow_nan=False), b=st.floats(-2, 2, allow_nan=False))
    def test_linearity_in_rhs_and_data(self, seed, a, b):
        grid = make_grid(9, 9)
        rng = np.random.default_rng(seed)
        cs = gk.CoefficientSet.from_rules(grid, {(0, 0): 1.0, (2, 3): 0.5})
        nc1, nc2 = random_nonclassical(grid, rng), random_nonclassical(grid, rng)
        rhs1, rhs2 = random_field2d(grid, rng), random_field2d(grid, rng)

        def run(nc, rhs):
            return gk.solve(
                gk.ProblemSpec(grid=grid, coefficients=cs, data=nc, rhs=rhs, method="marching")
            ).v.values

        combo = run(a * nc1 + b * nc2, gk.Field2D(grid, a * rhs1.values + b * rhs2.values))
        parts = a * run(nc1, rhs1) + b * run(nc2, rhs2)
        scale = max(1.0, float(np.max(np.abs(parts))))
        assert np.max(np.abs(combo - parts)) <= 1e-10 * scale

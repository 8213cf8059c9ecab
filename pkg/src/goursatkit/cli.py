"""Batch front door: JSON configs in, CSV fields, text reports, PGM heatmaps out.

Commands and exit statuses:

* ``solve <config>``: 0 ok, 2 config error, 3 solver failure (report still
  written, with the residual history), 4 I/O failure.
* ``convert --to classical|nonclassical <in> <out>``: 0 ok, 2 schema error.
* ``check-agreement <in> [--tol T]``: 0 pass, 1 fail, 2 schema error.
* ``mms <config>`` / ``convergence <config>`` (aliases): 0 ok or verdict
  pass, 1 verdict fail, 2 config error, 3 solver failure, 4 I/O failure.

Outputs are deterministic: identical inputs give byte-identical files.  The
environment variable ``GOURSATKIT_OUTDIR`` overrides the configured output
directory.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import mms as mms_mod
from .boundary import check_agreement, to_classical, to_nonclassical
from .errors import (
    ConvergenceError,
    GoursatKitError,
    SchemaError,
    SingularNodeError,
)
from .grids import Field2D, Grid2D, lp_norm
from .representation import sobolev_norm_2_4
from .serialize import (
    SCHEMA_VERSION,
    classical_from_doc,
    classical_to_doc,
    dumps_document,
    format_float,
    grid_from_doc,
    load_document,
    nonclassical_from_doc,
    nonclassical_to_doc,
    save_document,
)
from .solver import (
    CoefficientSet,
    ProblemSpec,
    Solution,
    solve,
    validate_coefficients,
)

OUTDIR_ENV = "GOURSATKIT_OUTDIR"

STATUS_OK = 0
STATUS_CHECK_FAILED = 1
STATUS_CONFIG_ERROR = 2
STATUS_SOLVER_FAILURE = 3
STATUS_IO_ERROR = 4


# ---------------------------------------------------------------------------
# config parsing


def _fail(message: str) -> SchemaError:
    return SchemaError(message)


def _parse_order_key(key) -> tuple[int, int]:
    try:
        i_str, j_str = str(key).split(",")
        return (int(i_str), int(j_str))
    except ValueError:
        raise _fail(f"coefficient keys must look like 'i,j', got {key!r}") from None


def _oracle_from_doc(doc) -> mms_mod.PolySolution | mms_mod.TrigSolution:
    if not isinstance(doc, dict):
        raise _fail("oracle section must be an object")
    kind = doc.get("kind")
    try:
        if kind == "poly":
            return mms_mod.PolySolution(np.asarray(doc["coefficients"], dtype=float))
        if kind == "trig":
            waves = doc.get("wavenumbers", [1.0, 1.0])
            phases = doc.get("phases", [0.0, 0.0])
            return mms_mod.TrigSolution(
                amplitude=float(doc.get("amplitude", 1.0)),
                wave1=float(waves[0]),
                wave2=float(waves[1]),
                phase1=float(phases[0]),
                phase2=float(phases[1]),
            )
    except (KeyError, TypeError, ValueError, GoursatKitError) as exc:
        raise _fail(f"bad oracle section: {exc}") from None
    raise _fail(f"unknown oracle kind {kind!r}")


#: constant-coefficient smoke-test preset loosely patterned on moisture
#: transfer models; the label is historical, the values are just constants
ALLER_PRESET = {(0, 1): 1.0, (0, 2): 1.0, (1, 0): 1.0}


def _coefficients_from_doc(grid: Grid2D, doc, config_dir: Path) -> CoefficientSet:
    if doc is None:
        return CoefficientSet.zeros(grid)
    if not isinstance(doc, dict):
        raise _fail("coefficients section must be an object")
    preset = doc.get("preset", "zero")
    try:
        if preset == "zero":
            return CoefficientSet.zeros(grid)
        if preset == "constant":
            rules = {
                _parse_order_key(k): float(v)
                for k, v in doc.get("values", {}).items()
            }
            return CoefficientSet.from_rules(grid, rules)
        if preset == "aller":
            rules = dict(ALLER_PRESET)
            for k, v in doc.get("values", {}).items():
                rules[_parse_order_key(k)] = float(v)
            return CoefficientSet.from_rules(grid, rules)
        if preset == "step":
            from .solver import step_x1

            rules = {
                _parse_order_key(k): float(v)
                for k, v in doc.get("values", {}).items()
            }
            rules[_parse_order_key(doc["order"])] = step_x1(
                float(doc["jump"]), float(doc["left"]), float(doc["right"])
            )
            return CoefficientSet.from_rules(grid, rules)
        if preset == "table":
            table_doc = load_document(config_dir / doc["path"])
            entries = {}
            for key, raw in table_doc.items():
                order = _parse_order_key(key)
                entries[order] = Field2D(grid, np.asarray(raw, dtype=float))
            return CoefficientSet.from_fields(grid, entries)
    except (KeyError, TypeError, ValueError, GoursatKitError) as exc:
        raise _fail(f"bad coefficients section: {exc}") from None
    raise _fail(f"unknown coefficient preset {preset!r}")


def _data_from_doc(grid: Grid2D, doc, config, config_dir: Path):
    """Returns (NonClassicalData, corner mismatch warnings)."""
    from .boundary import NonClassicalData

    if doc is None:
        return NonClassicalData.zeros(grid), ()
    if not isinstance(doc, dict):
        raise _fail("data section must be an object")
    source = doc.get("source", "zero")
    if source == "zero":
        return NonClassicalData.zeros(grid), ()
    if source == "inline":
        inline = {
            "schema_version": SCHEMA_VERSION,
            "kind": "nonclassical",
            "grid": {
                "lengths": [grid.g1.length, grid.g2.length],
                "node_counts": [grid.g1.node_count, grid.g2.node_count],
            },
            "corner": doc.get("corner"),
            "edge_x1": doc.get("edge_x1"),
            "edge_x2": doc.get("edge_x2"),
        }
        return nonclassical_from_doc(inline), ()
    if source == "nonclassical_file":
        nc = nonclassical_from_doc(load_document(config_dir / doc["path"]))
        _require_grid(grid, nc.grid1.node_count, nc.grid2.node_count)
        return nc, nc.warnings
    if source == "classical_file":
        c = classical_from_doc(load_document(config_dir / doc["path"]))
        _require_grid(grid, c.grid1.node_count, c.grid2.node_count)
        nc = to_nonclassical(c)
        return nc, nc.warnings
    if source == "oracle":
        oracle = _oracle_from_doc(doc.get("oracle", config.get("oracle")))
        return mms_mod.nonclassical_from_oracle(oracle, grid), ()
    raise _fail(f"unknown data source {source!r}")


def _require_grid(grid: Grid2D, n1: int, n2: int) -> None:
    if (n1, n2) != grid.shape:
        raise _fail(
            f"data file grid {n1}x{n2} does not match the configured grid "
            f"{grid.shape[0]}x{grid.shape[1]}"
        )


def _rhs_from_doc(grid: Grid2D, doc, config, coefficients: CoefficientSet) -> Field2D:
    if doc is None:
        return Field2D.zeros(grid)
    if not isinstance(doc, dict):
        raise _fail("rhs section must be an object")
    source = doc.get("source", "zero")
    try:
        if source == "zero":
            return Field2D.zeros(grid)
        if source == "inline":
            return Field2D(grid, np.asarray(doc["values"], dtype=float))
        if source == "oracle":
            oracle = _oracle_from_doc(doc.get("oracle", config.get("oracle")))
            return mms_mod.manufactured_rhs(oracle, coefficients, grid)
    except (KeyError, TypeError, ValueError, GoursatKitError) as exc:
        raise _fail(f"bad rhs section: {exc}") from None
    raise _fail(f"unknown rhs source {source!r}")


def _load_config(path: str) -> dict:
    doc = load_document(path)
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise _fail(f"unsupported schema_version {doc.get('schema_version')!r}")
    return doc


def _grid_from_config(config) -> Grid2D:
    domain = config.get("domain")
    if not isinstance(domain, dict):
        raise _fail("config needs a domain section")
    return grid_from_doc(domain)


def _spec_from_config(config, config_dir: Path):
    grid = _grid_from_config(config)
    p = float(config.get("p", 2.0))
    coefficients = _coefficients_from_doc(grid, config.get("coefficients"), config_dir)
    data, warnings = _data_from_doc(grid, config.get("data"), config, config_dir)
    rhs = _rhs_from_doc(grid, config.get("rhs"), config, coefficients)
    solver_doc = config.get("solver") or {}
    try:
        spec = ProblemSpec(
            grid=grid,
            coefficients=coefficients,
            data=data,
            rhs=rhs,
            p=p,
            tolerance=float(solver_doc.get("tolerance", 1e-10)),
            max_iterations=int(solver_doc.get("max_iterations", 100)),
            method=str(solver_doc.get("method", "marching")),
        )
    except GoursatKitError as exc:
        raise _fail(f"bad problem configuration: {exc}") from None
    return spec, warnings


def _output_dir(config) -> Path:
    out_doc = config.get("output") or {}
    directory = os.environ.get(OUTDIR_ENV) or out_doc.get("directory", ".")
    return Path(directory)


# ---------------------------------------------------------------------------
# output writers


def _write_field_csv(path: Path, field: Field2D) -> None:
    t1 = field.grid.g1.nodes
    t2 = field.grid.g2.nodes
    vals = field.values
    lines = ["x1,x2,value"]
    for k in range(len(t1)):
        x1s = format_float(t1[k])
        row = vals[k]
        for l in range(len(t2)):
            lines.append(f"{x1s},{format_float(t2[l])},{format_float(row[l])}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _write_pgm(path: Path, field: Field2D) -> None:
    vals = field.values
    lo = float(np.min(vals))
    hi = float(np.max(vals))
    if hi > lo:
        gray = np.rint((vals - lo) / (hi - lo) * 255.0).astype(int)
    else:
        gray = np.zeros(vals.shape, dtype=int)
    n1, n2 = vals.shape
    lines = ["P2", f"{n1} {n2}", "255"]
    for l in range(n2 - 1, -1, -1):  # top row = largest x2
        lines.append(" ".join(str(int(g)) for g in gray[:, l]))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _solve_report(
    spec: ProblemSpec,
    solution: Solution | None,
    failure: Exception | None,
    history,
    warnings,
    written: list[str],
) -> str:
    grid = spec.grid
    lines = ["goursatkit solve report", "======================="]
    lines.append(
        f"grid: {grid.g1.node_count} x {grid.g2.node_count} nodes on "
        f"[0, {format_float(grid.g1.length)}] x [0, {format_float(grid.g2.length)}]"
    )
    lines.append(f"p: {format_float(spec.p)}")
    lines.append(f"method: {spec.method}")
    lines.append(f"tolerance: {format_float(spec.tolerance)}")
    lines.append(f"max_iterations: {spec.max_iterations}")
    if solution is not None:
        diag = solution.diagnostics
        lines.append("status: converged")
        lines.append(f"iterations: {diag.iterations}")
        lines.append(f"pde residual (sup): {format_float(diag.pde_residual)}")
        lines.append(f"boundary residual (sup): {format_float(diag.boundary_residual)}")
    else:
        lines.append(f"status: failed ({failure})")
    lines.append("residual history:")
    for r in history:
        lines.append(f"  {format_float(r)}")
    if solution is not None:
        lines.append("solution norms:")
        lines.append(f"  u sup: {format_float(lp_norm(solution.jet[(0, 0)], float('inf')))}")
        lines.append(
            f"  jet anisotropic sobolev (p={format_float(spec.p)}): "
            f"{format_float(sobolev_norm_2_4(solution.jet, spec.p))}"
        )
    report = validate_coefficients(spec.coefficients, spec.p)
    lines.append(f"coefficient norms ({report.convention}):")
    for entry in report.entries:
        lines.append(
            f"  a[{entry.order.i},{entry.order.j}] {entry.tag} = {format_float(entry.norm)}"
        )
    if warnings:
        lines.append("data warnings (corner mismatches in classical source):")
        for w in warnings:
            lines.append(
                f"  corner ({w.i},{w.j}): phi side {format_float(w.phi_value)}, "
                f"psi side {format_float(w.psi_value)}"
            )
    if written:
        lines.append("outputs:")
        for name in written:
            lines.append(f"  {name}")
    lines.append("heatmap scaling: linear, field min -> 0, field max -> 255; flat fields map to 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# commands


def cmd_solve(args) -> int:
    try:
        config = _load_config(args.config)
        config_dir = Path(args.config).resolve().parent
        spec, warnings = _spec_from_config(config, config_dir)
        outdir = _output_dir(config)
        out_doc = config.get("output") or {}
        dump_orders = [_parse_order_key(k) for k in out_doc.get("fields", [])]
        heatmaps = bool(out_doc.get("heatmaps", False))
    except (SchemaError, GoursatKitError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return STATUS_CONFIG_ERROR

    solution = None
    failure = None
    try:
        solution = solve(spec)
        history = solution.diagnostics.residual_history
    except (ConvergenceError, SingularNodeError) as exc:
        failure = exc
        history = getattr(exc, "residual_history", ())

    written: list[str] = []
    try:
        outdir.mkdir(parents=True, exist_ok=True)
        if solution is not None:
            fields = [("u", solution.jet[(0, 0)])]
            for order in sorted(set(dump_orders)):
                fields.append((f"jet_{order[0]}_{order[1]}", solution.jet[order]))
            for name, field in fields:
                _write_field_csv(outdir / f"{name}.csv", field)
                written.append(f"{name}.csv")
                if heatmaps:
                    _write_pgm(outdir / f"{name}.pgm", field)
                    written.append(f"{name}.pgm")
        report = _solve_report(spec, solution, failure, history, warnings, written)
        (outdir / "report.txt").write_text(report, encoding="utf-8")
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return STATUS_IO_ERROR

    if failure is not None:
        print(f"solver failure: {failure}", file=sys.stderr)
        return STATUS_SOLVER_FAILURE
    print(f"solved; report written to {outdir / 'report.txt'}")
    return STATUS_OK


def cmd_convert(args) -> int:
    try:
        doc = load_document(args.input)
        if args.to == "classical":
            nc = nonclassical_from_doc(doc)
            out_doc = classical_to_doc(to_classical(nc))
        else:
            c = classical_from_doc(doc)
            nc = to_nonclassical(c)
            out_doc = nonclassical_to_doc(nc)
            for w in nc.warnings:
                print(
                    f"warning: corner ({w.i},{w.j}) mismatch: phi side "
                    f"{format_float(w.phi_value)}, psi side {format_float(w.psi_value)}",
                    file=sys.stderr,
                )
    except (SchemaError, GoursatKitError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return STATUS_CONFIG_ERROR
    try:
        save_document(out_doc, args.output)
    except OSError as exc:
        print(f"write error: {exc}", file=sys.stderr)
        return STATUS_IO_ERROR
    return STATUS_OK


_AGREEMENT_ROWS = (
    ("phi1(0)    - psi1(0)  ", "phi2(0)    - psi1'(0) "),
    ("phi1'(0)   - psi2(0)  ", "phi2'(0)   - psi2'(0) "),
    ("phi1''(0)  - psi3(0)  ", "phi2''(0)  - psi3'(0) "),
    ("phi1'''(0) - psi4(0)  ", "phi2'''(0) - psi4'(0) "),
)


def cmd_check_agreement(args) -> int:
    try:
        c = classical_from_doc(load_document(args.input))
        report = check_agreement(c, tol=args.tol)
    except (SchemaError, GoursatKitError) as exc:
        print(f"schema error: {exc}", file=sys.stderr)
        return STATUS_CONFIG_ERROR
    print(f"corner agreement residuals (tol {format_float(args.tol)}):")
    for m, (left, right) in enumerate(_AGREEMENT_ROWS):
        r_left = format_float(report.residuals[2 * m])
        r_right = format_float(report.residuals[2 * m + 1])
        print(f"  {left}= {r_left:<24} {right}= {r_right}")
    print(f"max residual: {format_float(report.max_residual)}")
    print("PASS" if report.passed else "FAIL")
    return STATUS_OK if report.passed else STATUS_CHECK_FAILED


def cmd_study(args) -> int:
    try:
        config = _load_config(args.config)
        config_dir = Path(args.config).resolve().parent
        domain = config.get("domain") or {}
        lengths = tuple(float(x) for x in domain.get("lengths", [1.0, 1.0]))
        node_counts = config.get("node_counts")
        if not isinstance(node_counts, list) or not node_counts:
            raise _fail("config needs a non-empty node_counts list")
        p = float(config.get("p", 2.0))
        oracle = _oracle_from_doc(config.get("oracle"))
        probe = Grid2D.from_lengths(lengths, (int(node_counts[0]), int(node_counts[0])))
        coefficients = _coefficients_from_doc(probe, config.get("coefficients"), config_dir)
        solver_doc = config.get("solver") or {}
        mode = config.get("mode", "oracle")
        if mode not in ("oracle", "self"):
            raise _fail(f"unknown study mode {mode!r}")
        thresholds = config.get("thresholds") or {}
        outdir = _output_dir(config)
        out_doc = config.get("output") or {}
        csv_name = out_doc.get("csv", "study.csv")
        common = dict(
            p=p,
            lengths=lengths,
            tolerance=float(solver_doc.get("tolerance", 1e-10)),
            max_iterations=int(solver_doc.get("max_iterations", 100)),
            method=str(solver_doc.get("method", "marching")),
        )
        reference_doc = config.get("reference") or {}
    except (SchemaError, GoursatKitError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return STATUS_CONFIG_ERROR

    table = None
    try:
        if mode == "self":
            cache = reference_doc.get("cache")
            table = mms_mod.self_convergence_study(
                oracle,
                coefficients,
                node_counts,
                reference_nodes=int(reference_doc.get("node_count", 257)),
                cache_path=(outdir / cache) if cache else None,
                **common,
            )
        else:
            table = mms_mod.convergence_study(oracle, coefficients, node_counts, **common)
    except (ConvergenceError, SingularNodeError) as exc:
        table = getattr(exc, "partial_table", None)
        print(f"solver failure: {exc}", file=sys.stderr)
        status = STATUS_SOLVER_FAILURE
    except GoursatKitError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return STATUS_CONFIG_ERROR
    else:
        status = STATUS_OK

    if table is not None:
        try:
            outdir.mkdir(parents=True, exist_ok=True)
            mms_mod.write_convergence_csv(table, outdir / csv_name)
        except OSError as exc:
            print(f"write error: {exc}", file=sys.stderr)
            return STATUS_IO_ERROR
        for lv in table.levels:
            order = "" if lv.order is None else f" order={format_float(lv.order)}"
            print(
                f"nodes={lv.nodes} h={format_float(lv.h)} "
                f"sup_error={format_float(lv.sup_error)} "
                f"lp_error={format_float(lv.lp_error)}{order}"
            )

    if status != STATUS_OK:
        return status

    min_order = thresholds.get("min_order")
    max_order = thresholds.get("max_order")
    if table is not None and (min_order is not None or max_order is not None):
        orders = table.orders()
        ok = all(
            (min_order is None or o >= float(min_order))
            and (max_order is None or o <= float(max_order))
            for o in orders
        )
        print("verdict: PASS" if ok else "verdict: FAIL")
        if not ok:
            return STATUS_CHECK_FAILED
    return STATUS_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="goursatkit",
        description="Characteristic-data solver kit driven by JSON configs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a configured problem")
    p_solve.add_argument("config")
    p_solve.set_defaults(handler=cmd_solve)

    p_convert = sub.add_parser("convert", help="convert boundary data files")
    p_convert.add_argument("--to", required=True, choices=("classical", "nonclassical"))
    p_convert.add_argument("input")
    p_convert.add_argument("output")
    p_convert.set_defaults(handler=cmd_convert)

    p_check = sub.add_parser("check-agreement", help="evaluate corner residuals")
    p_check.add_argument("input")
    p_check.add_argument("--tol", type=float, default=1e-12)
    p_check.set_defaults(handler=cmd_check_agreement)

    for name in ("mms", "convergence"):
        p_study = sub.add_parser(name, help="manufactured-solution study")
        p_study.add_argument("config")
        p_study.set_defaults(handler=cmd_study)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())

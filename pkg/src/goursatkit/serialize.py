"""JSON serialization of boundary data, with lossless float formatting.

Every number is written with 17 significant digits so values round-trip
through files bit for bit.  Documents carry a ``schema_version`` and a
``kind`` discriminator ("nonclassical" or "classical"); the exact layouts
are documented in the README.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .boundary import ClassicalData, CornerMismatch, Jet1D, NonClassicalData
from .errors import SchemaError
from .grids import Field1D, Grid2D

__all__ = [
    "SCHEMA_VERSION",
    "format_float",
    "dumps_document",
    "grid_to_doc",
    "grid_from_doc",
    "nonclassical_to_doc",
    "nonclassical_from_doc",
    "classical_to_doc",
    "classical_from_doc",
    "load_document",
    "save_document",
    "boundary_data_from_doc",
]

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    """Shortest-of-17-significant-digits decimal that parses back exactly."""
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError("cannot serialize a non-finite number")
    return format(x, ".17g")


def _render(obj, out: list[str]) -> None:
    if isinstance(obj, dict):
        out.append("{")
        for n, (key, val) in enumerate(obj.items()):
            if n:
                out.append(", ")
            out.append(json.dumps(str(key)))
            out.append(": ")
            _render(val, out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for n, val in enumerate(np.asarray(obj).tolist() if isinstance(obj, np.ndarray) else obj):
            if n:
                out.append(", ")
            _render(val, out)
        out.append("]")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif obj is None:
        out.append("null")
    else:
        raise SchemaError(f"cannot serialize value of type {type(obj).__name__}")


def dumps_document(doc: dict) -> str:
    out: list[str] = []
    _render(doc, out)
    return "".join(out) + "\n"


def grid_to_doc(grid: Grid2D) -> dict:
    return {
        "lengths": [grid.g1.length, grid.g2.length],
        "node_counts": [grid.g1.node_count, grid.g2.node_count],
    }


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise SchemaError(message)


def _number_list(raw, count: int, what: str) -> np.ndarray:
    _require(isinstance(raw, list) and len(raw) == count, f"{what} must be a list of {count} numbers")
    try:
        vals = np.array([float(x) for x in raw])
    except (TypeError, ValueError):
        raise SchemaError(f"{what} contains a non-numeric entry") from None
    _require(bool(np.all(np.isfinite(vals))), f"{what} must be finite")
    return vals


def grid_from_doc(doc) -> Grid2D:
    _require(isinstance(doc, dict), "grid section must be an object")
    lengths = _number_list(doc.get("lengths"), 2, "grid.lengths")
    counts = doc.get("node_counts")
    _require(
        isinstance(counts, list) and len(counts) == 2
        and all(isinstance(n, int) and n >= 3 for n in counts),
        "grid.node_counts must be two integers >= 3",
    )
    try:
        return Grid2D.from_lengths(lengths, counts)
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def _check_header(doc, kind: str) -> None:
    _require(isinstance(doc, dict), "document must be a JSON object")
    _require(doc.get("schema_version") == SCHEMA_VERSION,
             f"unsupported schema_version {doc.get('schema_version')!r}")
    _require(doc.get("kind") == kind, f"expected kind {kind!r}, got {doc.get('kind')!r}")


def nonclassical_to_doc(nc: NonClassicalData, grid: Grid2D | None = None) -> dict:
    if grid is None:
        grid = Grid2D(nc.grid1, nc.grid2)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "kind": "nonclassical",
        "grid": grid_to_doc(grid),
        "corner": nc.corner.tolist(),
        "edge_x1": [f.values.tolist() for f in nc.edge_x1],
        "edge_x2": [f.values.tolist() for f in nc.edge_x2],
    }
    if nc.warnings:
        doc["warnings"] = [
            {"i": w.i, "j": w.j, "phi_value": w.phi_value, "psi_value": w.psi_value}
            for w in nc.warnings
        ]
    return doc


def nonclassical_from_doc(doc) -> NonClassicalData:
    _check_header(doc, "nonclassical")
    grid = grid_from_doc(doc.get("grid"))
    raw_corner = doc.get("corner")
    _require(isinstance(raw_corner, list) and len(raw_corner) == 2,
             "corner must be a 2x4 array")
    corner = np.vstack([_number_list(row, 4, "corner row") for row in raw_corner])
    raw_e1 = doc.get("edge_x1")
    _require(isinstance(raw_e1, list) and len(raw_e1) == 4, "edge_x1 must hold 4 traces")
    raw_e2 = doc.get("edge_x2")
    _require(isinstance(raw_e2, list) and len(raw_e2) == 2, "edge_x2 must hold 2 traces")
    edge_x1 = tuple(
        Field1D(grid.g1, _number_list(row, grid.g1.node_count, f"edge_x1[{j}]"))
        for j, row in enumerate(raw_e1)
    )
    edge_x2 = tuple(
        Field1D(grid.g2, _number_list(row, grid.g2.node_count, f"edge_x2[{i}]"))
        for i, row in enumerate(raw_e2)
    )
    warnings = []
    for w in doc.get("warnings", []):
        _require(isinstance(w, dict), "warnings entries must be objects")
        warnings.append(
            CornerMismatch(int(w["i"]), int(w["j"]),
                           float(w["phi_value"]), float(w["psi_value"]))
        )
    return NonClassicalData(
        corner=corner, edge_x1=edge_x1, edge_x2=edge_x2, warnings=tuple(warnings)
    )


def classical_to_doc(c: ClassicalData, grid: Grid2D | None = None) -> dict:
    if grid is None:
        grid = Grid2D(c.grid1, c.grid2)
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": "classical",
        "grid": grid_to_doc(grid),
        "phi": [[f.values.tolist() for f in jet.fields] for jet in c.phi],
        "psi": [[f.values.tolist() for f in jet.fields] for jet in c.psi],
    }


def classical_from_doc(doc) -> ClassicalData:
    _check_header(doc, "classical")
    grid = grid_from_doc(doc.get("grid"))

    def read_jet(raw, orders: int, g, what: str) -> Jet1D:
        _require(isinstance(raw, list) and len(raw) == orders,
                 f"{what} must carry {orders} derivative arrays")
        return Jet1D(tuple(
            Field1D(g, _number_list(row, g.node_count, f"{what}[{k}]"))
            for k, row in enumerate(raw)
        ))

    raw_phi = doc.get("phi")
    _require(isinstance(raw_phi, list) and len(raw_phi) == 2, "phi must hold 2 functions")
    raw_psi = doc.get("psi")
    _require(isinstance(raw_psi, list) and len(raw_psi) == 4, "psi must hold 4 functions")
    phi = tuple(read_jet(raw, 5, grid.g2, f"phi[{i}]") for i, raw in enumerate(raw_phi))
    psi = tuple(read_jet(raw, 3, grid.g1, f"psi[{j}]") for j, raw in enumerate(raw_psi))
    return ClassicalData(phi=phi, psi=psi)


def load_document(path: str | Path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from None
    _require(isinstance(doc, dict), "document must be a JSON object")
    return doc


def save_document(doc: dict, path: str | Path) -> None:
    Path(path).write_text(dumps_document(doc), encoding="utf-8")


def boundary_data_from_doc(doc):
    """Dispatch on the ``kind`` discriminator; returns the matching data object."""
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "nonclassical":
        return nonclassical_from_doc(doc)
    if kind == "classical":
        return classical_from_doc(doc)
    raise SchemaError(f"unknown boundary data kind {kind!r}")

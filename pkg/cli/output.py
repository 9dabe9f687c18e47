import csv
import json
import math
from typing import Any, Iterable, Optional, TextIO

import numpy as np

from scan.engine import EntanglementCurve, EntanglementGrid
from scan.features import FeatureReport

# header lines are part of the output contract; the axis column comes first
CURVE_COLUMNS = ("ev", "z", "u_plus", "u_minus", "w", "n_up", "n_down", "degenerate", "failed")
GRID_COLUMNS = ("U", "V", "ev", "degenerate", "failed")


def fmt(x: Any) -> str:
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "nan" if math.isnan(x) else "%.12g" % x
    return str(x)


def number(x: Any) -> Any:
    """JSON value rounded to 12 significant digits; NaN becomes null."""
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return None if math.isnan(x) else float("%.12g" % x)
    if isinstance(x, dict):
        return {k: number(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [number(v) for v in x]
    return x


'''
CSV
'''


def _write_rows(stream: TextIO, header: Iterable[str], rows: Iterable[Iterable[Any]]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])


def curve_header(curve: EntanglementCurve) -> list[str]:
    return [curve.axis_name, *CURVE_COLUMNS, *curve.extra]


def _curve_rows(curve: EntanglementCurve) -> list[list[Any]]:
    rows = []
    for i, x in enumerate(curve.axis_values):
        n_up, n_down = curve.sectors[i]
        rows.append([
            x,
            curve.ev_values[i],
            *curve.populations[i],
            n_up,
            n_down,
            curve.degenerate[i],
            curve.failed[i],
            *(column[i] for column in curve.extra.values()),
        ])
    return rows


def write_curve_csv(curve: EntanglementCurve, stream: TextIO) -> None:
    _write_rows(stream, curve_header(curve), _curve_rows(curve))


def write_grid_csv(grid: EntanglementGrid, stream: TextIO) -> None:
    rows = [
        [u, v, grid.ev_matrix[i, j], grid.degenerate[i, j], grid.failed[i, j]]
        for i, u in enumerate(grid.u_values)
        for j, v in enumerate(grid.v_values)
    ]
    _write_rows(stream, GRID_COLUMNS, rows)


def write_record_csv(record: dict[str, Any], stream: TextIO) -> None:
    write_records_csv([record], stream)


def write_records_csv(records: list[dict[str, Any]], stream: TextIO) -> None:
    """One row per record, scalar fields only, header from the first record."""
    flat = [{k: v for k, v in r.items() if not isinstance(v, (dict, list, np.ndarray))} for r in records]
    _write_rows(stream, flat[0].keys(), [row.values() for row in flat])


def write_matrix(grid: EntanglementGrid, stream: TextIO) -> None:
    """
    Nonuniform matrix block: first line is the V count then the V values,
    every following line is U then E_v along V.
    """
    stream.write(" ".join([str(len(grid.v_values)), *(fmt(v) for v in grid.v_values)]) + "\n")
    for i, u in enumerate(grid.u_values):
        stream.write(" ".join([fmt(u), *(fmt(e) for e in grid.ev_matrix[i])]) + "\n")


'''
JSON
'''


def curve_payload(curve: EntanglementCurve, report: Optional[FeatureReport] = None) -> dict[str, Any]:
    payload: dict[str, Any] = {
        "axis": curve.axis_name,
        "points": [dict(zip(curve_header(curve), row)) for row in _curve_rows(curve)],
        "metadata": curve.metadata,
        "errors": {str(i): e for i, e in curve.errors.items()},
    }
    if report is not None:
        payload["features"] = [
            {"location": f.location, "kind": f.kind, "magnitude": f.magnitude, "extremum": f.extremum}
            for f in report.features
        ]
        payload["dominant"] = report.dominant()
        payload["steepest"] = report.steepest
        if report.warning:
            payload["feature_warning"] = report.warning
    return payload


def grid_payload(grid: EntanglementGrid) -> dict[str, Any]:
    return {
        "u_values": grid.u_values,
        "v_values": grid.v_values,
        "ev": grid.ev_matrix.tolist(),
        "degenerate": grid.degenerate.tolist(),
        "failed": grid.failed.tolist(),
        "metadata": grid.metadata,
        "errors": {f"{i},{j}": e for (i, j), e in grid.errors.items()},
    }


def write_json(config: dict[str, Any], result: dict[str, Any], stream: TextIO) -> None:
    document = {"config": config, "result": number(result)}
    stream.write(json.dumps(document, indent=2, ensure_ascii=False) + "\n")

"""Writers for run outputs: legacy VTK snapshots, CSV tables and the TOML run manifest."""

from __future__ import annotations
from collections.abc import Iterable
import csv
from datetime import datetime
from logging import getLogger
from pathlib import Path

import numpy as np
import tomlkit

from nematiq.business.diagnostics import ConvergenceRow, director
from nematiq.model.tensor import COMPONENT_NAMES
from nematiq.version import __version__

logger = getLogger(__name__)

SERIES_COLUMNS = (
    'step',
    't',
    'energy',
    'grad_u_norm2',
    'G_norm2',
    'r',
    'r_consistency',
    'linf_Q',
    'dissipation_residual',
    'trace_work',
    'krylov_iterations',
)
AUDIT_COLUMNS = ('dt', 'step', 'energy', 'dissipation_residual', 'audit_tol', 'passed')


def format_float(value: float) -> str:
    return f"{value:.6e}"


def format_order(order: float | None) -> str:
    return '/' if order is None else f"{order:.2f}"


def snapshot_name(t: float) -> str:
    """snap_<t>.vtk with t in its shortest round-tripping decimal form."""
    return f"snap_{t:g}.vtk"


def _vtk_values(values: np.ndarray) -> str:
    # VTK wants x varying fastest
    return "\n".join(f"{v:.8e}" for v in np.ravel(values, order='F'))


def _vtk_vectors(components: np.ndarray) -> str:
    padded = list(components) + [np.zeros_like(components[0])] * (3 - len(components))
    flat = [np.ravel(c, order='F') for c in padded]
    return "\n".join(f"{x:.8e} {y:.8e} {z:.8e}" for x, y, z in zip(*flat))


def write_vtk_snapshot(path: Path, state, title: str = 'nematiq snapshot') -> Path:
    """
    Legacy ASCII STRUCTURED_POINTS file with cell centres as points: one SCALARS block
    per Q component, the order parameter s, and VECTORS for velocity and director.
    """
    grid = state.Q.grid
    dims = list(grid.n) + [1] * (3 - grid.dim)
    spacing = list(grid.h) + [1.0] * (3 - grid.dim)
    origin = [0.5 * h for h in grid.h] + [0.0] * (3 - grid.dim)
    info = director(state.Q.tensor)

    lines = [
        "# vtk DataFile Version 3.0",
        f"{title}, t = {state.t:g}",
        "ASCII",
        "DATASET STRUCTURED_POINTS",
        f"DIMENSIONS {dims[0]} {dims[1]} {dims[2]}",
        f"ORIGIN {origin[0]:.8e} {origin[1]:.8e} {origin[2]:.8e}",
        f"SPACING {spacing[0]:.8e} {spacing[1]:.8e} {spacing[2]:.8e}",
        f"POINT_DATA {int(np.prod(grid.n))}",
    ]
    scalars = list(zip(COMPONENT_NAMES[grid.dim], state.Q.data)) + [('s', info.s)]
    for name, values in scalars:
        lines += [f"SCALARS {name} double 1", "LOOKUP_TABLE default", _vtk_values(values)]
    lines += ["VECTORS velocity double", _vtk_vectors(state.u.data)]
    lines += ["VECTORS director double", _vtk_vectors(info.n)]

    path = Path(path)
    path.write_text("\n".join(lines) + "\n", encoding='ascii')
    logger.info(f"Wrote snapshot {path} (t = {state.t:g})")
    return path


def convergence_rows_as_dicts(rows: Iterable[ConvergenceRow]) -> list[dict[str, str]]:
    out = []
    for row in rows:
        record = {'dt': format_float(row.dt)}
        for name, error in row.errors.items():
            record[f"{name}_err"] = format_float(error)
            record[f"{name}_order"] = format_order(row.orders[name])
        out.append(record)
    return out


def write_convergence_table(path: Path, rows: list[ConvergenceRow]) -> Path:
    """table.csv: dt, then <var>_err, <var>_order for each variable in table order."""
    records = convergence_rows_as_dicts(rows)
    fieldnames = list(records[0].keys())
    with open(path, 'w', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=fieldnames)
        writer.writeheader()
        writer.writerows(records)
    logger.info(f"Wrote convergence table {path} ({len(records)} rows)")
    return Path(path)


def write_run_manifest(path: Path, manifest: dict[str, object], started: datetime | None = None) -> Path:
    """TOML record of the resolved configuration, package version and start time."""
    doc = tomlkit.document()
    doc.add(tomlkit.comment("Resolved configuration of this run"))
    run = tomlkit.table()
    run.add('version', __version__)
    run.add('started', (started or datetime.now()).isoformat(timespec='seconds'))
    doc.add('run', run)
    config = tomlkit.table()
    for key, value in manifest.items():
        config.add(key, value)
    doc.add('config', config)
    path = Path(path)
    path.write_text(tomlkit.dumps(doc), encoding='utf-8')
    logger.debug(f"Wrote run manifest {path}")
    return path


def read_run_manifest(path: Path) -> dict:
    return tomlkit.parse(Path(path).read_text(encoding='utf-8')).unwrap()

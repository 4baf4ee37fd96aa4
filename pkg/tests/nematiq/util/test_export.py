# test_export.py
"""Tests for the VTK, CSV and manifest writers."""
import csv
from datetime import datetime

import pytest
import numpy as np

from nematiq.business.diagnostics import ConvergenceRow
from nematiq.business.sav_stepper import SchemeState
from nematiq.grid.fields import GridSpec, QTensorField, ScalarField, VectorField
from nematiq.util.export import (
    format_float,
    format_order,
    read_run_manifest,
    snapshot_name,
    write_convergence_table,
    write_run_manifest,
    write_vtk_snapshot,
)
from nematiq.version import __version__

pytestmark = pytest.mark.unit


def make_state(grid, t=0.0):
    q = np.zeros(QTensorField.component_shape(grid) + grid.n)
    q[0] = 0.5
    return SchemeState(
        Q=QTensorField(grid, q),
        u=VectorField.zeros(grid),
        p=ScalarField.zeros(grid),
        r=1.0,
        t=t,
    )


class TestFormatting:
    def test_float(self):
        assert format_float(0.000123456789) == '1.234568e-04'

    def test_order(self):
        assert format_order(None) == '/'
        assert format_order(1.0049) == '1.00'

    @pytest.mark.parametrize("t, name", [(0.0, 'snap_0.vtk'), (1.0, 'snap_1.vtk'), (200.0, 'snap_200.vtk'), (0.5, 'snap_0.5.vtk')])
    def test_snapshot_name(self, t, name):
        assert snapshot_name(t) == name


class TestVtkSnapshot:
    def test_2d_layout(self, tmp_path):
        grid = GridSpec(n=(4, 6), L=(1.0, 1.5))
        path = write_vtk_snapshot(tmp_path / 'snap_0.vtk', make_state(grid))
        lines = path.read_text().splitlines()
        assert lines[0] == "# vtk DataFile Version 3.0"
        assert lines[2] == "ASCII"
        assert lines[3] == "DATASET STRUCTURED_POINTS"
        assert lines[4] == "DIMENSIONS 4 6 1"
        assert lines[7] == "POINT_DATA 24"
        names = [line.split()[1] for line in lines if line.startswith("SCALARS")]
        assert names == ['Q11', 'Q12', 's']
        vectors = [line.split()[1] for line in lines if line.startswith("VECTORS")]
        assert vectors == ['velocity', 'director']

    def test_block_lengths_and_values(self, tmp_path):
        grid = GridSpec(n=(4, 4), L=1.0)
        lines = write_vtk_snapshot(tmp_path / 'snap.vtk', make_state(grid)).read_text().splitlines()
        start = lines.index("SCALARS s double 1") + 2
        values = [float(v) for v in lines[start : start + 16]]
        # q11 = 0.5, q12 = 0: uniaxial along x with s = 1
        assert values == pytest.approx([1.0] * 16)
        start = lines.index("VECTORS director double") + 1
        assert lines[start + 15].split() == ['1.00000000e+00', '0.00000000e+00', '0.00000000e+00']
        assert len(lines) == start + 16

    def test_3d_dimensions(self, tmp_path, periodic_grid_3d):
        lines = write_vtk_snapshot(tmp_path / 'snap.vtk', make_state(periodic_grid_3d)).read_text().splitlines()
        assert lines[4] == "DIMENSIONS 6 6 6"
        assert sum(line.startswith("SCALARS") for line in lines) == 6


class TestConvergenceTable:
    def test_columns_and_placeholders(self, tmp_path):
        rows = [
            ConvergenceRow(dt=8e-5, errors={'Q11': 1e-3, 'r': 2e-4}, orders={'Q11': None, 'r': None}),
            ConvergenceRow(dt=4e-5, errors={'Q11': 5e-4, 'r': 1e-4}, orders={'Q11': 1.0, 'r': 1.0}),
        ]
        path = write_convergence_table(tmp_path / 'table.csv', rows)
        with open(path, newline='') as f:
            records = list(csv.reader(f))
        assert records[0] == ['dt', 'Q11_err', 'Q11_order', 'r_err', 'r_order']
        assert records[1] == ['8.000000e-05', '1.000000e-03', '/', '2.000000e-04', '/']
        assert records[2][2] == '1.00'


class TestRunManifest:
    def test_round_trip(self, tmp_path):
        started = datetime(2024, 6, 1, 12, 30, 0)
        manifest = {'experiment': 'defect', 'n': [16, 16], 'gamma': 1.0, 'audit_mode': 'warn'}
        path = write_run_manifest(tmp_path / 'run.toml', manifest, started)
        data = read_run_manifest(path)
        assert data['run']['version'] == __version__
        assert data['run']['started'] == '2024-06-01T12:30:00'
        assert data['config'] == manifest

"""
Fixtures for validation tests.

Each experiment runs once per module on a reduced grid and time span; the tests then
inspect the reports and the files in the run directory. Set NEMATIQ_FULL_ACCEPTANCE=1
to also run the full-size experiments (128^2 sweeps to t = 0.1, defect run to t = 200).
"""

import os
import pytest

from nematiq.business.experiment_service import ExperimentService
from nematiq.business.run_context import RunContext
from nematiq.util.config_file import parse_config

FULL_ACCEPTANCE = os.environ.get('NEMATIQ_FULL_ACCEPTANCE', '') not in ('', '0')

ORDER_RANGE = (0.85, 1.15)

# Reduced sweep: 16^2 walls, dt = 1e-3 / 2^k, k = 0..5, to t = 0.02
ACCURACY_SWEEP = "grid = 16\ndt = 1e-3\ndt_halvings = 5\nt_end = 0.02\n"

AUDIT_DTS = (1e-4, 1e-2, 0.1, 1.0)


def run_experiment(text, output_dir):
    cfg = parse_config(text)
    with RunContext(cfg, output_dir) as ctx:
        return ExperimentService(ctx).run()


@pytest.fixture(scope="module")
def accuracy1_report(tmp_path_factory):
    return run_experiment("experiment = accuracy1\n" + ACCURACY_SWEEP, tmp_path_factory.mktemp('accuracy1'))


@pytest.fixture(scope="module")
def accuracy2_report(tmp_path_factory):
    return run_experiment("experiment = accuracy2\n" + ACCURACY_SWEEP, tmp_path_factory.mktemp('accuracy2'))


@pytest.fixture(scope="module")
def audit_report(tmp_path_factory):
    text = (
        "experiment = energy_audit\ngrid = 32\n"
        f"audit_dts = {', '.join(map(str, AUDIT_DTS))}\naudit_steps = 50\naudit_mode = abort\n"
    )
    return run_experiment(text, tmp_path_factory.mktemp('audit'))


@pytest.fixture(scope="module")
def defect_report(tmp_path_factory):
    text = "experiment = defect\ngrid = 32\ndt = 0.01\nt_end = 1\nsnapshot_times = 0, 0.5, 1\nseries_every = 10\n"
    return run_experiment(text, tmp_path_factory.mktemp('defect'))

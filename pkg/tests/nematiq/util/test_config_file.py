# test_config_file.py
"""Tests for experiment configuration parsing and validation."""
import pytest

from nematiq.business.sav_stepper import AuditMode
from nematiq.errors import ConfigError
from nematiq.grid.fields import BoundaryKind
from nematiq.util.config_file import (
    Experiment,
    InitialConditionName,
    QBoundary,
    load_config,
    parse_config,
)

pytestmark = pytest.mark.unit


class TestParseConfig:
    """Reading key = value files."""

    def test_empty_file_needs_experiment(self):
        with pytest.raises(ConfigError, match="experiment required"):
            parse_config("")

    def test_defect_defaults(self):
        cfg = parse_config("experiment = defect\n")
        assert cfg.experiment is Experiment.DEFECT
        assert cfg.n == (128, 128)
        assert cfg.bc is BoundaryKind.PERIODIC
        assert cfg.dt == pytest.approx(1e-3)
        assert cfg.t_end == pytest.approx(200.0)
        assert cfg.snapshot_times == (0.0, 1.0, 10.0, 20.0, 60.0, 200.0)
        assert cfg.initial_condition is InitialConditionName.DEFECT
        assert cfg.params.S_Q == 30.0 and cfg.params.C0 == 10.0

    def test_accuracy_defaults(self):
        cfg = parse_config("experiment = accuracy2\n")
        assert cfg.bc is BoundaryKind.WALL
        assert cfg.q_bc is QBoundary.DIRICHLET
        assert cfg.dt_levels == pytest.approx([8e-5, 4e-5, 2e-5, 1e-5, 5e-6])

    def test_comments_blank_lines_and_lists(self):
        text = """
        # a comment line
        experiment = custom   # trailing comment

        grid = 8, 12
        L = 2.0
        gamma = 2.5
        audit_mode = Abort
        """
        cfg = parse_config(text)
        assert cfg.n == (8, 12)
        assert cfg.L == (2.0, 2.0)
        assert cfg.params.gamma == 2.5
        assert cfg.audit_mode is AuditMode.ABORT

    def test_single_grid_value_broadcasts_to_dim(self):
        cfg = parse_config("experiment = custom\ndim = 3\ngrid = 6\n")
        assert cfg.n == (6, 6, 6)
        assert cfg.dim == 3

    def test_experiment_name_accepts_hyphen(self):
        assert parse_config("experiment = energy-audit").experiment is Experiment.ENERGY_AUDIT


class TestConfigErrors:
    """Every rejection names the key and, when known, the line."""

    def test_bad_parameter_names_key_and_line(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\ngamma = -1\n")
        assert error.value.key == 'gamma'
        assert error.value.line == 2
        assert "line 2" in str(error.value)

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\nviscosity = 2\n")
        assert error.value.key == 'viscosity'
        assert error.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ConfigError, match="duplicate"):
            parse_config("experiment = defect\ndt = 1e-3\ndt = 2e-3\n")

    def test_unparsable_value(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\ndt = fast\n")
        assert error.value.key == 'dt'

    def test_missing_equals(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\ngrid 64\n")
        assert error.value.line == 2

    def test_snapshot_outside_run(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\nt_end = 1\nsnapshot_times = 0, 2\n")
        assert error.value.key == 'snapshot_times'

    def test_accuracy_needs_three_levels(self):
        with pytest.raises(ConfigError, match="dt_halvings"):
            parse_config("experiment = accuracy1\ndt_halvings = 1\n")

    def test_defect_needs_periodic_grid(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\nbc = wall\n")
        assert error.value.key == 'bc'

    def test_3d_limited_to_random_custom_runs(self):
        with pytest.raises(ConfigError):
            parse_config("experiment = custom\ndim = 3\ngrid = 6\ninitial_condition = defect\n")

    def test_too_small_grid(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = custom\ngrid = 2\n")
        assert error.value.key == 'grid'

    @pytest.mark.parametrize("line", ["dt = 0", "t_end = -1", "krylov_tol = 0", "workers = 0"])
    def test_nonpositive_values(self, line):
        with pytest.raises(ConfigError):
            parse_config(f"experiment = custom\n{line}\n")


class TestOverrides:
    """Command-line values win over the file."""

    def test_string_overrides(self):
        cfg = parse_config("experiment = defect\ngrid = 128\n", {'grid': '32', 'dt': '0.01'})
        assert cfg.n == (32, 32)
        assert cfg.dt == pytest.approx(0.01)

    def test_none_overrides_are_ignored(self):
        cfg = parse_config("experiment = defect\ngrid = 64\n", {'grid': None})
        assert cfg.n == (64, 64)

    def test_override_error_has_no_line(self):
        with pytest.raises(ConfigError) as error:
            parse_config("experiment = defect\n", {'dt': '-1'})
        assert error.value.key == 'dt'
        assert error.value.line is None


class TestLoadConfig:
    def test_reads_file(self, tmp_path):
        path = tmp_path / 'run.conf'
        path.write_text("experiment = energy_audit\ngrid = 16\naudit_dts = 0.01, 0.1\n")
        cfg = load_config(path)
        assert cfg.audit_dts == (0.01, 0.1)
        assert cfg.grid.n == (16, 16)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot read"):
            load_config(tmp_path / 'absent.conf')

    def test_manifest_is_plain_data(self):
        manifest = parse_config("experiment = defect\ngrid = 16\n").as_manifest()
        assert manifest['experiment'] == 'defect'
        assert manifest['n'] == [16, 16]
        assert manifest['gamma'] == 1.0
        assert 'params' not in manifest
        assert 'defect_eps' not in manifest

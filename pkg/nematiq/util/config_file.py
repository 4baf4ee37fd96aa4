"""
Experiment configuration files.

Format: one `key = value` pair per line, `#` starts a comment, lists are comma
separated. Example:

    experiment = defect
    grid = 128
    snapshot_times = 0, 1, 10, 20, 60, 200

Omitted keys take the defaults of the chosen experiment.
"""

from __future__ import annotations
from collections.abc import Callable
from dataclasses import asdict, dataclass, field
from enum import Enum
from logging import getLogger
from pathlib import Path

from nematiq.business.sav_stepper import AuditMode, StepperSettings
from nematiq.config import AUDIT_MODE, KRYLOV_MAX_ITER, KRYLOV_RESTART, KRYLOV_TOL
from nematiq.errors import ConfigError
from nematiq.grid.fields import BoundaryKind, GridSpec
from nematiq.model.params import ModelParams

logger = getLogger(__name__)


class Experiment(str, Enum):
    ACCURACY1 = 'accuracy1'
    ACCURACY2 = 'accuracy2'
    DEFECT = 'defect'
    ENERGY_AUDIT = 'energy_audit'
    CUSTOM = 'custom'

    @classmethod
    def parse(cls, text: str) -> Experiment:
        return cls(text.strip().lower().replace('-', '_'))

    @property
    def is_accuracy(self) -> bool:
        return self in (Experiment.ACCURACY1, Experiment.ACCURACY2)


class QBoundary(str, Enum):
    DIRICHLET = 'dirichlet'
    NEUMANN = 'neumann'


class InitialConditionName(str, Enum):
    ACCURACY1 = 'accuracy1'
    ACCURACY2 = 'accuracy2'
    DEFECT = 'defect'
    RANDOM = 'random'


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(',') if v.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(',') if v.strip())


def _enum(cls) -> Callable[[str], Enum]:
    return lambda text: cls(text.strip().lower())


PARAM_KEYS = ('alpha', 'beta', 'gamma', 'K', 'M', 'eta', 'a', 'S_Q', 'C0')

KEYS: dict[str, Callable[[str], object]] = {
    'experiment': Experiment.parse,
    'grid': _int_list,
    'dim': int,
    'L': _float_list,
    'bc': _enum(BoundaryKind),
    'q_bc': _enum(QBoundary),
    **{name: float for name in PARAM_KEYS},
    'dt': float,
    'dt_halvings': int,
    't_end': float,
    'snapshot_times': _float_list,
    'output_dir': lambda text: Path(text.strip()),
    'krylov_tol': float,
    'krylov_max_iter': int,
    'krylov_restart': int,
    'audit_mode': _enum(AuditMode),
    'audit_factor': float,
    'audit_dts': _float_list,
    'audit_steps': int,
    'initial_condition': _enum(InitialConditionName),
    'seed': int,
    'defect_eps': float,
    'series_every': int,
    'workers': int,
}

EXPERIMENT_DEFAULTS: dict[Experiment, dict[str, object]] = {
    Experiment.ACCURACY1: {
        'bc': BoundaryKind.WALL,
        'q_bc': QBoundary.DIRICHLET,
        'dt': 8e-5,
        'dt_halvings': 4,
        't_end': 0.1,
        'initial_condition': InitialConditionName.ACCURACY1,
    },
    Experiment.ACCURACY2: {
        'bc': BoundaryKind.WALL,
        'q_bc': QBoundary.DIRICHLET,
        'dt': 8e-5,
        'dt_halvings': 4,
        't_end': 0.1,
        'initial_condition': InitialConditionName.ACCURACY2,
    },
    Experiment.DEFECT: {
        'bc': BoundaryKind.PERIODIC,
        'dt': 1e-3,
        't_end': 200.0,
        'snapshot_times': (0.0, 1.0, 10.0, 20.0, 60.0, 200.0),
        'initial_condition': InitialConditionName.DEFECT,
    },
    Experiment.ENERGY_AUDIT: {
        'bc': BoundaryKind.PERIODIC,
        'audit_dts': (1e-4, 1e-2, 0.1, 1.0),
        'audit_steps': 50,
        'initial_condition': InitialConditionName.DEFECT,
    },
    Experiment.CUSTOM: {
        'bc': BoundaryKind.PERIODIC,
        'dt': 1e-3,
        't_end': 0.01,
        'initial_condition': InitialConditionName.RANDOM,
    },
}


@dataclass
class ExperimentConfig:
    experiment: Experiment
    n: tuple[int, ...] = (128, 128)
    L: tuple[float, ...] = (1.0, 1.0)
    bc: BoundaryKind = BoundaryKind.PERIODIC
    q_bc: QBoundary = QBoundary.NEUMANN
    params: ModelParams = field(default_factory=ModelParams)
    dt: float = 1e-3
    dt_halvings: int = 0
    t_end: float = 0.01
    snapshot_times: tuple[float, ...] = ()
    output_dir: Path | None = None
    krylov_tol: float = KRYLOV_TOL
    krylov_max_iter: int = KRYLOV_MAX_ITER
    krylov_restart: int = KRYLOV_RESTART
    audit_mode: AuditMode = AuditMode(AUDIT_MODE)
    audit_factor: float = 100.0
    audit_dts: tuple[float, ...] = ()
    audit_steps: int = 50
    initial_condition: InitialConditionName = InitialConditionName.RANDOM
    seed: int = 0
    defect_eps: float | None = None
    series_every: int = 1
    workers: int = 1

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(n=self.n, L=self.L, bc=self.bc)

    @property
    def dt_levels(self) -> list[float]:
        """dt_k = dt / 2^k for k = 0..dt_halvings."""
        return [self.dt / 2**k for k in range(self.dt_halvings + 1)]

    def stepper_settings(self, audit_mode: AuditMode | None = None) -> StepperSettings:
        return StepperSettings(
            krylov_tol=self.krylov_tol,
            krylov_max_iter=self.krylov_max_iter,
            krylov_restart=self.krylov_restart,
            audit_mode=audit_mode or self.audit_mode,
            audit_factor=self.audit_factor,
        )

    def as_manifest(self) -> dict[str, object]:
        """Plain, TOML-friendly view of the resolved configuration."""
        out = {}
        for key, value in asdict(self).items():
            if key == 'params':
                out.update(self.params.as_dict())
                continue
            if isinstance(value, Enum):
                value = value.value
            elif isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            if value is not None:
                out[key] = value
        return out


def _convert(key: str, raw, line: int | None):
    if key not in KEYS:
        raise ConfigError("unknown key", key=key, line=line)
    if not isinstance(raw, str):
        return raw
    try:
        return KEYS[key](raw)
    except ValueError as e:
        raise ConfigError(f"cannot parse '{raw.strip()}': {e}", key=key, line=line)


def _read_pairs(text: str) -> tuple[dict[str, object], dict[str, int]]:
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition('=')
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got '{line}'", line=lineno)
        if key in values:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", key=key, line=lineno)
        values[key] = _convert(key, value, lineno)
        lines[key] = lineno
    logger.debug(f"Read {len(values)} configuration keys")
    return values, lines


def parse_config(text: str, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    """
    Parse and validate a configuration. `overrides` (raw strings or typed values) win
    over the file and are applied before validation.
    """
    values, lines = _read_pairs(text)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        values[key] = _convert(key, value, None)
        lines.pop(key, None)

    def fail(message: str, key: str):
        raise ConfigError(message, key=key, line=lines.get(key))

    if 'experiment' not in values:
        raise ConfigError("experiment required", key='experiment')
    experiment = values['experiment']
    merged = {**EXPERIMENT_DEFAULTS[experiment], **values}

    dim = merged.pop('dim', 2)
    if dim not in (2, 3):
        fail(f"dim must be 2 or 3, got {dim}", 'dim')
    cells = merged.pop('grid', (128,))
    n = cells * dim if len(cells) == 1 else cells
    length = merged.pop('L', (1.0,))
    L = length * len(n) if len(length) == 1 else length
    try:
        GridSpec(n=n, L=L, bc=merged.get('bc', BoundaryKind.PERIODIC))
    except ValueError as e:
        fail(str(e), 'grid')

    param_values = {name: merged.pop(name) for name in PARAM_KEYS if name in merged}
    try:
        params = ModelParams(**param_values)
    except ValueError as e:
        fail(str(e), str(e).split()[0])

    cfg = ExperimentConfig(n=tuple(n), L=tuple(L), params=params, **merged)
    _validate(cfg, fail)
    logger.info(f"Configuration: {cfg.experiment.value} on {'x'.join(map(str, cfg.n))} ({cfg.bc.value})")
    return cfg


def _validate(cfg: ExperimentConfig, fail) -> None:
    if not cfg.dt > 0:
        fail(f"dt must be > 0, got {cfg.dt}", 'dt')
    if not cfg.t_end > 0:
        fail(f"t_end must be > 0, got {cfg.t_end}", 't_end')
    if cfg.dt_halvings < 0:
        fail(f"dt_halvings must be >= 0, got {cfg.dt_halvings}", 'dt_halvings')
    if cfg.experiment.is_accuracy and cfg.dt_halvings < 2:
        fail("an accuracy sweep needs dt_halvings >= 2 to report orders", 'dt_halvings')
    outside = [t for t in cfg.snapshot_times if not 0 <= t <= cfg.t_end]
    if outside:
        fail(f"snapshot times {outside} lie outside [0, t_end={cfg.t_end}]", 'snapshot_times')
    if not cfg.krylov_tol > 0:
        fail(f"krylov_tol must be > 0, got {cfg.krylov_tol}", 'krylov_tol')
    for key in ('krylov_max_iter', 'krylov_restart', 'audit_steps', 'series_every', 'workers'):
        if getattr(cfg, key) < 1:
            fail(f"{key} must be >= 1, got {getattr(cfg, key)}", key)
    if not cfg.audit_factor > 0:
        fail(f"audit_factor must be > 0, got {cfg.audit_factor}", 'audit_factor')
    if any(not dt > 0 for dt in cfg.audit_dts):
        fail(f"audit_dts must all be > 0, got {list(cfg.audit_dts)}", 'audit_dts')
    if cfg.experiment is Experiment.ENERGY_AUDIT and not cfg.audit_dts:
        fail("energy_audit needs at least one time step", 'audit_dts')
    if cfg.experiment in (Experiment.DEFECT, Experiment.ENERGY_AUDIT) and cfg.bc is not BoundaryKind.PERIODIC:
        fail(f"{cfg.experiment.value} runs on a periodic grid", 'bc')
    if cfg.defect_eps is not None and not cfg.defect_eps > 0:
        fail(f"defect_eps must be > 0, got {cfg.defect_eps}", 'defect_eps')
    if cfg.dim == 3 and (
        cfg.experiment is not Experiment.CUSTOM or cfg.initial_condition is not InitialConditionName.RANDOM
    ):
        fail("3D grids are supported for custom runs from a random initial condition only", 'grid')


def load_config(path: str | Path, overrides: dict[str, object] | None = None) -> ExperimentConfig:
    path = Path(path)
    logger.debug(f"Reading configuration file: {path}")
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read configuration file {path}: {e}")
    return parse_config(text, overrides)

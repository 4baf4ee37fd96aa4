# experiment_service.py
"""
The reproduction experiments: temporal accuracy sweeps, defect dynamics, the energy
audit and free-form custom runs.

Usage:
    with RunContext(cfg) as ctx:
        report = ExperimentService(ctx).run()
"""
from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
import math
from pathlib import Path

from nematiq.business.diagnostics import (
    ConvergenceRow,
    LinfMonitor,
    convergence_table,
    plateau_ratio,
    winding_number,
)
from nematiq.business.run_context import RunContext
from nematiq.business.sav_stepper import AuditMode, SavStepper, SchemeState
from nematiq.errors import SolverConvergenceError
from nematiq.grid.operators import linf_norm
from nematiq.util.config_file import Experiment, ExperimentConfig, InitialConditionName
from nematiq.util.export import (
    AUDIT_COLUMNS,
    SERIES_COLUMNS,
    format_float,
    write_convergence_table,
)
from nematiq.util.initial_conditions import build_initial_condition

logger = getLogger(__name__)

TIME_RTOL = 1e-9


class ExperimentResult(Enum):
    """Outcome of an experiment."""

    COMPLETED = "completed"
    AUDIT_FAILED = "audit_failed"


@dataclass
class TrajectoryResult:
    dt: float
    state: SchemeState
    steps: int
    linf_initial: float
    linf_peak: float
    r_consistency: float
    audit_failures: int
    max_iterations: int


@dataclass
class AccuracyReport:
    result: ExperimentResult
    rows: list[ConvergenceRow]
    trajectories: list[TrajectoryResult]
    table_path: Path

    @property
    def linf_within_bound(self) -> bool:
        return all(t.linf_peak <= t.linf_initial + 2.0 for t in self.trajectories)


@dataclass
class DefectReport:
    result: ExperimentResult
    steps: int
    final_time: float
    energy_initial: float
    energy_final: float
    energy_monotone: bool
    winding_initial: float | None
    plateau: float | None
    linf_initial: float
    linf_peak: float
    audit_failures: int
    series_path: Path
    snapshots: list[Path] = field(default_factory=list)

    @property
    def linf_within_bound(self) -> bool:
        return self.linf_peak <= self.linf_initial + 2.0


@dataclass
class AuditSummary:
    dt: float
    steps: int
    max_residual: float
    failures: int
    energy_non_increasing: bool


@dataclass
class AuditReport:
    result: ExperimentResult
    summaries: list[AuditSummary]
    audit_path: Path


def step_count(t_end: float, dt: float) -> int:
    """Number of dt steps to reach t_end, rounding up when dt does not divide it."""
    steps = t_end / dt
    nearest = round(steps)
    if math.isclose(steps, nearest, rel_tol=TIME_RTOL):
        return int(nearest)
    logger.warning(f"dt={dt:g} does not divide t_end={t_end:g}; stopping at {math.ceil(steps) * dt:g}")
    return math.ceil(steps)


def _make_stepper(cfg: ExperimentConfig, audit_mode: AuditMode | None = None):
    ic = build_initial_condition(
        cfg.initial_condition, cfg.grid, cfg.q_bc, seed=cfg.seed, defect_eps=cfg.defect_eps
    )
    stepper = SavStepper(cfg.grid, cfg.params, cfg.stepper_settings(audit_mode), ic.q_boundary)
    return stepper, stepper.init_state(ic.Q0, ic.u0)


def run_trajectory(cfg: ExperimentConfig, dt: float) -> TrajectoryResult:
    """One silent trajectory to t_end; module level so worker processes can run it."""
    stepper, state = _make_stepper(cfg)
    monitor = LinfMonitor(initial=linf_norm(state.Q))
    steps = step_count(cfg.t_end, dt)
    failures = 0
    max_iterations = 0
    logger.info(f"Trajectory dt={dt:g}: {steps} steps")
    try:
        for _ in range(steps):
            state, report = stepper.advance(state, dt)
            monitor.record(report.linf_Q)
            failures += not report.passed
            max_iterations = max(max_iterations, report.solver.iterations)
    except SolverConvergenceError as e:
        raise SolverConvergenceError(f"dt={dt:g}: {e}", e.report) from e
    return TrajectoryResult(
        dt=dt,
        state=state,
        steps=steps,
        linf_initial=monitor.initial,
        linf_peak=monitor.peak,
        r_consistency=stepper.r_consistency(state),
        audit_failures=failures,
        max_iterations=max_iterations,
    )


class ExperimentService:
    """Runs the configured experiment inside a RunContext."""

    def __init__(self, ctx: RunContext):
        self._ctx = ctx

    @property
    def cfg(self) -> ExperimentConfig:
        return self._ctx.cfg

    def run(self):
        experiment = self.cfg.experiment
        logger.info(f"Starting experiment '{experiment.value}'")
        if experiment.is_accuracy:
            report = self.run_accuracy()
        elif experiment is Experiment.DEFECT:
            report = self.run_defect()
        elif experiment is Experiment.ENERGY_AUDIT:
            report = self.run_energy_audit()
        else:
            report = self.run_custom()
        logger.info(f"Experiment '{experiment.value}' finished: {report.result.value}")
        return report

    def run_accuracy(self) -> AccuracyReport:
        """Halve dt down the sweep, integrate each level to t_end, tabulate Cauchy errors."""
        cfg = self.cfg
        levels = cfg.dt_levels
        if cfg.workers > 1:
            logger.info(f"Running {len(levels)} sweep levels on {cfg.workers} processes")
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                trajectories = list(pool.map(run_trajectory, [cfg] * len(levels), levels))
        else:
            trajectories = [run_trajectory(cfg, dt) for dt in levels]

        rows = convergence_table([(t.dt, t.state) for t in trajectories])
        table_path = self._ctx.record(write_convergence_table(self._ctx.path('table.csv'), rows))
        for row in rows:
            orders = ', '.join(
                f"{name}={'/' if order is None else f'{order:.2f}'}" for name, order in row.orders.items()
            )
            logger.info(f"dt={row.dt:.3e}: {orders}")
        return AccuracyReport(
            result=ExperimentResult.COMPLETED,
            rows=rows,
            trajectories=trajectories,
            table_path=table_path,
        )

    def run_defect(self) -> DefectReport:
        return self._run_series()

    def run_custom(self) -> DefectReport:
        """Same outputs as the defect run, from the configured initial condition."""
        return self._run_series()

    def _run_series(self) -> DefectReport:
        cfg = self.cfg
        dt = cfg.dt
        stepper, state = _make_stepper(cfg)
        series = self._ctx.open_csv('series.csv', SERIES_COLUMNS)
        monitor = LinfMonitor(initial=linf_norm(state.Q))

        winding = None
        if cfg.dim == 2 and cfg.initial_condition is InitialConditionName.DEFECT:
            centre = (0.25 * cfg.L[0], 0.25 * cfg.L[1])
            winding = winding_number(state.Q, centre, radius=0.1 * min(cfg.L))
            logger.info(f"Initial winding number around {centre}: {winding:+.3f}")

        energy = stepper.modified_energy(state, dt)
        times, energies = [0.0], [energy]
        series.writerow(
            {
                'step': 0,
                't': format_float(0.0),
                'energy': format_float(energy),
                'grad_u_norm2': format_float(0.0),
                'G_norm2': format_float(0.0),
                'r': format_float(state.r),
                'r_consistency': format_float(stepper.r_consistency(state)),
                'linf_Q': format_float(monitor.initial),
                'dissipation_residual': format_float(0.0),
                'trace_work': format_float(0.0),
                'krylov_iterations': 0,
            }
        )

        pending = sorted(cfg.snapshot_times)
        snapshots = []
        while pending and pending[0] <= 0.5 * dt:
            snapshots.append(self._ctx.snapshot(state))
            pending.pop(0)

        steps = step_count(cfg.t_end, dt)
        monotone = True
        failures = 0
        for step in range(1, steps + 1):
            state, report = stepper.advance(state, dt)
            state.t = step * dt
            monitor.record(report.linf_Q)
            monotone &= report.energy_after <= report.energy_before + report.audit_tol
            failures += not report.passed
            times.append(state.t)
            energies.append(report.energy_after)
            if step % cfg.series_every == 0 or step == steps:
                series.writerow(
                    {
                        'step': step,
                        't': format_float(state.t),
                        'energy': format_float(report.energy_after),
                        'grad_u_norm2': format_float(report.grad_u_norm2),
                        'G_norm2': format_float(report.G_norm2),
                        'r': format_float(state.r),
                        'r_consistency': format_float(report.r_consistency),
                        'linf_Q': format_float(report.linf_Q),
                        'dissipation_residual': format_float(report.dissipation_residual),
                        'trace_work': format_float(report.trace_work),
                        'krylov_iterations': report.solver.iterations,
                    }
                )
            while pending and pending[0] <= state.t + 0.5 * dt:
                snapshots.append(self._ctx.snapshot(state))
                pending.pop(0)

        plateau = plateau_ratio(times, energies) if steps >= 2 else None
        if failures:
            logger.warning(f"{failures} of {steps} steps exceeded the audit tolerance")
        return DefectReport(
            result=ExperimentResult.COMPLETED,
            steps=steps,
            final_time=state.t,
            energy_initial=energies[0],
            energy_final=energies[-1],
            energy_monotone=bool(monotone),
            winding_initial=winding,
            plateau=plateau,
            linf_initial=monitor.initial,
            linf_peak=monitor.peak,
            audit_failures=failures,
            series_path=self._ctx.path('series.csv'),
            snapshots=snapshots,
        )

    def run_energy_audit(self) -> AuditReport:
        """audit_steps steps at every audit dt; a violation fails the run in abort mode."""
        cfg = self.cfg
        audit = self._ctx.open_csv('audit.csv', AUDIT_COLUMNS)
        summaries = []
        for dt in cfg.audit_dts:
            logger.info(f"Energy audit at dt={dt:g} ({cfg.audit_steps} steps)")
            stepper, state = _make_stepper(cfg, AuditMode.WARN)
            failures = 0
            max_residual = -math.inf
            non_increasing = True
            for _ in range(cfg.audit_steps):
                state, report = stepper.advance(state, dt)
                failures += not report.passed
                max_residual = max(max_residual, report.dissipation_residual)
                non_increasing &= report.energy_after <= report.energy_before + report.audit_tol
                audit.writerow(
                    {
                        'dt': format_float(dt),
                        'step': state.step,
                        'energy': format_float(report.energy_after),
                        'dissipation_residual': format_float(report.dissipation_residual),
                        'audit_tol': format_float(report.audit_tol),
                        'passed': str(report.passed).lower(),
                    }
                )
            summaries.append(
                AuditSummary(
                    dt=dt,
                    steps=cfg.audit_steps,
                    max_residual=max_residual,
                    failures=failures,
                    energy_non_increasing=bool(non_increasing),
                )
            )
            logger.info(
                f"dt={dt:g}: max residual {max_residual:.3e}, {failures} violation(s), "
                f"energy {'non-increasing' if non_increasing else 'INCREASED'}"
            )

        failed = any(s.failures for s in summaries)
        if failed and cfg.audit_mode is AuditMode.WARN:
            logger.warning("Energy audit found violations (warn mode: run still completes)")
        result = (
            ExperimentResult.AUDIT_FAILED
            if failed and cfg.audit_mode is AuditMode.ABORT
            else ExperimentResult.COMPLETED
        )
        return AuditReport(result=result, summaries=summaries, audit_path=self._ctx.path('audit.csv'))

#!/usr/bin/env python3
import argparse
import sys

from nematiq.version import __version__
from nematiq.business.experiment_service import (
    AccuracyReport,
    AuditReport,
    DefectReport,
    ExperimentResult,
    ExperimentService,
)
from nematiq.business.run_context import RunContext
from nematiq.errors import AuditViolationError, NematiqError
from nematiq.logging_config import configure_logging
from nematiq.util.config_file import Experiment, load_config

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_AUDIT_FAILED = 2

'''
CLI program for the `nematiq` Q-tensor flow solver.

usage: nematiq [-h] [--version] COMMAND --config PATH [--output DIR] [--grid N] [--dt X] [--quiet]

COMMAND is one of: {
    accuracy1,accuracy2,defect,energy-audit,custom
}

    accuracy1       Temporal convergence sweep, first accuracy initial condition
    accuracy2       Temporal convergence sweep, second accuracy initial condition
    defect          +1 defect dynamics on a periodic domain (series + snapshots)
    energy-audit    Discrete energy law check over a range of time steps
    custom          Single trajectory from a named initial condition

Exit codes: 0 success, 2 energy audit failure, 1 configuration or solver error.

Examples:

1) Reproduce the first convergence table on a coarser grid:
    nematiq accuracy1 --config etc/accuracy1.conf --grid 64

2) Run the defect experiment into a chosen directory:
    nematiq defect --config etc/defect.conf --output runs/defect

3) Audit the energy law quietly:
    nematiq energy-audit --config etc/energy_audit.conf --quiet
'''

COMMANDS = {
    'accuracy1': Experiment.ACCURACY1,
    'accuracy2': Experiment.ACCURACY2,
    'defect': Experiment.DEFECT,
    'energy-audit': Experiment.ENERGY_AUDIT,
    'custom': Experiment.CUSTOM,
}


def main(argv=None):
    args = parse_arguments(argv)

    configure_logging(quiet=args.quiet)

    experiment = COMMANDS[args.command]
    if experiment.is_accuracy:
        return do_accuracy(args, experiment)
    elif experiment is Experiment.DEFECT:
        return do_defect(args)
    elif experiment is Experiment.ENERGY_AUDIT:
        return do_energy_audit(args)
    return do_custom(args)


def parse_arguments(argv=None):
    parser = argparse.ArgumentParser(prog='nematiq', description="Q-tensor nematic flow solver")

    parser.add_argument("--version", action="version", version=__version__, help="Show version.")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", "-c", required=True, help="Experiment configuration file")
    common.add_argument("--output", "-o", help="Output directory (overrides output_dir)")
    common.add_argument("--grid", "-g", type=int, help="Cells per axis (overrides grid)")
    common.add_argument("--dt", type=float, help="Time step (overrides dt)")
    common.add_argument("--quiet", "-q", action="store_true", help="Only log warnings and errors")

    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser(
        "accuracy1", parents=[common], help="Temporal convergence sweep, first initial condition"
    )
    subparsers.add_parser(
        "accuracy2", parents=[common], help="Temporal convergence sweep, second initial condition"
    )
    subparsers.add_parser("defect", parents=[common], help="+1 defect dynamics on a periodic domain")
    subparsers.add_parser(
        "energy-audit", parents=[common], help="Check the discrete energy law over several time steps"
    )
    subparsers.add_parser("custom", parents=[common], help="Single trajectory from a named initial condition")

    return parser.parse_args(argv)


def _overrides(args, experiment: Experiment) -> dict:
    return {
        'experiment': experiment.value,
        'grid': None if args.grid is None else str(args.grid),
        'dt': None if args.dt is None else str(args.dt),
        'output_dir': args.output,
    }


def _run(args, experiment: Experiment):
    """Load the configuration and run the experiment; returns (exit code, report or None)."""
    try:
        cfg = load_config(args.config, _overrides(args, experiment))
        with RunContext(cfg) as ctx:
            report = ExperimentService(ctx).run()
    except AuditViolationError as e:
        print(f"Error: {e}")
        return EXIT_AUDIT_FAILED, None
    except (NematiqError, ValueError) as e:
        print(f"Error: {e}")
        return EXIT_ERROR, None
    code = EXIT_AUDIT_FAILED if report.result is ExperimentResult.AUDIT_FAILED else EXIT_OK
    return code, report


def do_accuracy(args, experiment):
    code, report = _run(args, experiment)
    if report is None:
        return code
    display_accuracy_report(report)
    return code


def display_accuracy_report(report: AccuracyReport):
    print(f"Convergence table written to {report.table_path}")
    for row in report.rows:
        cells = '  '.join(
            f"{name}: {row.errors[name]:.3e} ({'/' if order is None else f'{order:.2f}'})"
            for name, order in row.orders.items()
        )
        print(f"  dt={row.dt:.3e}  {cells}")
    print(f"  L-infinity bound held: {'yes' if report.linf_within_bound else 'NO'}")


def do_defect(args):
    code, report = _run(args, Experiment.DEFECT)
    if report is None:
        return code
    display_series_report(report)
    return code


def do_custom(args):
    code, report = _run(args, Experiment.CUSTOM)
    if report is None:
        return code
    display_series_report(report)
    return code


def display_series_report(report: DefectReport):
    print(f"Completed {report.steps} steps to t={report.final_time:g}")
    print(f"  Energy: {report.energy_initial:.6e} -> {report.energy_final:.6e}", end='')
    print(" (monotone)" if report.energy_monotone else " (NOT monotone)")
    if report.winding_initial is not None:
        print(f"  Initial winding number: {report.winding_initial:+.3f}")
    if report.plateau is not None:
        print(f"  Plateau ratio: {report.plateau:.3e}")
    print(f"  max linf(Q): {report.linf_peak:.4f} (bound {report.linf_initial + 2.0:.4f})")
    if report.audit_failures:
        print(f"  Audit violations: {report.audit_failures}")
    print(f"  Series: {report.series_path}; snapshots: {len(report.snapshots)}")


def do_energy_audit(args):
    code, report = _run(args, Experiment.ENERGY_AUDIT)
    if report is None:
        return code
    display_audit_report(report)
    return code


def display_audit_report(report: AuditReport):
    print(f"Energy audit ({report.result.value}), details in {report.audit_path}")
    for s in report.summaries:
        status = 'ok' if not s.failures else f'{s.failures} violation(s)'
        trend = 'non-increasing' if s.energy_non_increasing else 'INCREASING'
        print(f"  dt={s.dt:g}: {s.steps} steps, max residual {s.max_residual:.3e}, {status}, energy {trend}")


if __name__ == '__main__':
    sys.exit(main())

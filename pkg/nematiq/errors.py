"""Exception hierarchy shared by the solver layers and the experiment harness."""

from __future__ import annotations
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from nematiq.solver.krylov import SolveReport
    from nematiq.business.sav_stepper import StepReport


class NematiqError(Exception):
    pass


class ConfigError(NematiqError, ValueError):
    """Invalid experiment configuration; names the offending key and line when known."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        self.key = key
        self.line = line
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(f"{prefix}{message}")


class BoundaryDataError(NematiqError, ValueError):
    pass


class FieldMismatchError(NematiqError, ValueError):
    pass


class SingularSymbolError(NematiqError, ZeroDivisionError):
    pass


class KrylovBreakdownError(NematiqError, ArithmeticError):
    pass


class EnergyFunctionalError(NematiqError, ValueError):
    pass


class SolverConvergenceError(NematiqError, RuntimeError):
    def __init__(self, message: str, report: SolveReport | None = None):
        self.report = report
        super().__init__(message)


class AuditViolationError(NematiqError, RuntimeError):
    def __init__(self, message: str, report: StepReport | None = None):
        self.report = report
        super().__init__(message)

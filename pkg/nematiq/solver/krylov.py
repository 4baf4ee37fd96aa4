# krylov.py
"""
Matrix-free restarted GMRES with a residual contract.

Right preconditioning is done by solving (A P) y = b - A x0 and returning
x = x0 + P y, so the residual GMRES monitors is the true residual of A x = b.
After every GMRES call the true relative residual is recomputed; if round-off left it
above tol, another cycle starts from the current iterate while budget remains. A cycle
that makes no progress falls back to a single minimal-residual step and stops if that
stalls too.
"""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from logging import getLogger
import math

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from nematiq.config import KRYLOV_MAX_ITER, KRYLOV_RESTART, KRYLOV_TOL
from nematiq.errors import KrylovBreakdownError

logger = getLogger(__name__)


@dataclass
class LinOp:
    apply: Callable[[np.ndarray], np.ndarray]
    size: int

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.apply(x), dtype=float).ravel()


@dataclass
class SolveReport:
    iterations: int
    relative_residual: float
    converged: bool


def _check_finite(value: float, what: str) -> None:
    if not math.isfinite(value):
        raise KrylovBreakdownError(f"Non-finite {what} ({value}) in Krylov solve")


def _minimal_residual_step(op, apply_p, b, x, residual, b_norm):
    """x + alpha P r with alpha = (A P r, r) / ||A P r||^2."""
    w = np.asarray(apply_p(residual), dtype=float).ravel()
    z = op(w)
    zz = float(z @ z)
    if zz == 0.0:
        return x, residual, float(np.linalg.norm(residual)) / b_norm
    x = x + (float(z @ residual) / zz) * w
    residual = b - op(x)
    rel = float(np.linalg.norm(residual)) / b_norm
    _check_finite(rel, 'residual')
    return x, residual, rel


def krylov_solve(
    op: LinOp,
    rhs: np.ndarray,
    precond: LinOp | None = None,
    tol: float = KRYLOV_TOL,
    max_iter: int = KRYLOV_MAX_ITER,
    restart: int = KRYLOV_RESTART,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, SolveReport]:
    """Solve op(x) = rhs to relative residual tol; never raises on mere non-convergence."""
    if tol <= 0:
        raise ValueError(f"tol must be positive, got {tol}")
    b = np.asarray(rhs, dtype=float).ravel()
    if b.size != op.size:
        raise ValueError(f"rhs has {b.size} entries, operator expects {op.size}")
    b_norm = float(np.linalg.norm(b))
    _check_finite(b_norm, 'right-hand side')
    if b_norm == 0.0:
        return np.zeros_like(b), SolveReport(iterations=0, relative_residual=0.0, converged=True)

    x = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).ravel().copy()
    apply_p = precond if precond is not None else (lambda y: y)
    ap = LinearOperator((op.size, op.size), matvec=lambda y: op(apply_p(y)), dtype=float)

    iterations = 0

    def count(_residual_norm):
        nonlocal iterations
        iterations += 1

    residual = b - op(x)
    rel = float(np.linalg.norm(residual)) / b_norm
    _check_finite(rel, 'residual')

    while rel > tol and iterations < max_iter:
        before, x_prev, residual_prev, counted = rel, x, residual, iterations
        remaining = max_iter - iterations
        cycle = min(restart, remaining)
        r_norm = float(np.linalg.norm(residual))
        # Absolute target tol * ||b|| expressed relative to the current residual
        local_tol = min(tol * b_norm / r_norm, 0.5)
        y, info = gmres(
            ap,
            residual,
            rtol=local_tol,
            atol=0.0,
            restart=cycle,
            maxiter=max(1, math.ceil(remaining / cycle)),
            callback=count,
            callback_type='pr_norm',
        )
        x = x + np.asarray(apply_p(y), dtype=float).ravel()
        residual = b - op(x)
        rel = float(np.linalg.norm(residual)) / b_norm
        _check_finite(rel, 'residual')
        logger.debug(f"GMRES cycle: info={info}, iterations={iterations}, rel_residual={rel:.3e}")
        if rel < before:
            continue
        # Breakdown on the first Arnoldi step returns y = 0; take the one-dimensional
        # minimal-residual step along P r from the pre-cycle iterate instead.
        x, residual, rel = _minimal_residual_step(op, apply_p, b, x_prev, residual_prev, b_norm)
        if iterations == counted:
            iterations += 1
        if rel >= before:
            x, residual, rel = x_prev, residual_prev, before
            logger.debug(f"GMRES stagnated at rel_residual={rel:.3e}")
            break

    report = SolveReport(iterations=iterations, relative_residual=rel, converged=rel <= tol)
    if not report.converged:
        logger.warning(
            f"GMRES stopped after {iterations} iterations at relative residual {rel:.3e} (tol={tol:.1e})"
        )
    return x, report

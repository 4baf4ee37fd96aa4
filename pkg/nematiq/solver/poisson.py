# poisson.py
"""Pressure-correction Poisson problem of the projection step."""
from __future__ import annotations

from logging import getLogger

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from nematiq.config import KRYLOV_MAX_ITER, KRYLOV_TOL
from nematiq.errors import SolverConvergenceError
from nematiq.grid.fields import BoundarySpec, GhostRule, ScalarField
from nematiq.grid.operators import laplace5
from nematiq.solver.krylov import SolveReport
from nematiq.solver.spectral import (
    central_poisson_symbol,
    dct_diag_solve,
    dft_diag_solve,
    neumann_laplace5_symbol,
    null_modes,
)

logger = getLogger(__name__)

PRESSURE_BC = BoundarySpec(GhostRule.NEUMANN)


def pressure_poisson_solve(
    rhs: ScalarField, tol: float = KRYLOV_TOL, max_iter: int = KRYLOV_MAX_ITER
) -> ScalarField:
    """
    Solve for the pressure increment psi.

    Periodic grids invert div_c(grad_c psi) = rhs exactly in Fourier space, dropping the
    mean and the checkerboard modes the wide stencil cannot see. Wall grids solve
    laplace5 psi = rhs - mean(rhs) with homogeneous Neumann ghosts by preconditioned CG,
    returning the mean-zero solution.
    """
    grid = rhs.grid
    if grid.periodic:
        symbol = central_poisson_symbol(grid)
        psi = dft_diag_solve(symbol, rhs.values, null_modes(symbol))
        return ScalarField(grid, psi, PRESSURE_BC)
    return _wall_poisson(rhs, tol, max_iter)


def _wall_poisson(rhs: ScalarField, tol: float, max_iter: int) -> ScalarField:
    grid = rhs.grid
    size = int(np.prod(grid.n))
    b = -(rhs.values - rhs.values.mean()).ravel()
    if not np.any(b):
        return ScalarField.zeros(grid, PRESSURE_BC)

    def apply(x):
        f = ScalarField(grid, x.reshape(grid.n), PRESSURE_BC)
        return (-laplace5(f).values + x.mean()).ravel()

    # -laplace5 plus the mean pins the constant mode; both are diagonal in the DCT basis
    symbol = -neumann_laplace5_symbol(grid)
    symbol.flat[0] = 1.0

    def precondition(y):
        return dct_diag_solve(symbol, y.reshape(grid.n)).ravel()

    iterations = 0

    def count(_xk):
        nonlocal iterations
        iterations += 1

    op = LinearOperator((size, size), matvec=apply, dtype=float)
    pre = LinearOperator((size, size), matvec=precondition, dtype=float)
    x, info = cg(op, b, rtol=tol, atol=0.0, maxiter=max_iter, M=pre, callback=count)

    rel = float(np.linalg.norm(b - apply(x)) / np.linalg.norm(b))
    report = SolveReport(iterations=iterations, relative_residual=rel, converged=rel <= tol)
    logger.debug(f"Wall Poisson: {iterations} CG iterations, info={info}, rel_residual={rel:.3e}")
    if not report.converged:
        raise SolverConvergenceError(
            f"Pressure Poisson CG did not converge: relative residual {rel:.3e} after "
            f"{iterations} iterations",
            report,
        )
    return ScalarField(grid, x.reshape(grid.n), PRESSURE_BC)

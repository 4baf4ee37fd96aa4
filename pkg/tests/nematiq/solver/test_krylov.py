"""Tests for the matrix-free GMRES wrapper."""

import pytest
import numpy as np

from nematiq.errors import KrylovBreakdownError
from nematiq.solver import krylov
from nematiq.solver.krylov import LinOp, krylov_solve

pytestmark = pytest.mark.unit


def diagonal(values):
    values = np.asarray(values, dtype=float)
    return LinOp(lambda x: values * x, values.size)


class TestKrylovSolve:
    def test_identity_converges_immediately(self, rng):
        b = rng.normal(size=10)
        x, report = krylov_solve(LinOp(lambda v: v, 10), b, tol=1e-12)
        assert report.converged
        assert 1 <= report.iterations <= 2
        np.testing.assert_allclose(x, b, rtol=1e-12)

    def test_diagonal_spd(self, rng):
        d = np.linspace(1.0, 50.0, 50)
        b = rng.normal(size=50)
        x, report = krylov_solve(diagonal(d), b, tol=1e-10, restart=60)
        assert report.converged
        assert report.relative_residual <= 1e-10
        assert report.iterations <= 50
        np.testing.assert_allclose(x, b / d, rtol=1e-8)

    def test_nonsymmetric_system(self, rng):
        """Upper bidiagonal matrix with a dominant diagonal."""
        n = 30
        a = 3.0 * np.eye(n) + np.diag(np.ones(n - 1), 1)
        b = rng.normal(size=n)
        x, report = krylov_solve(LinOp(lambda v: a @ v, n), b, tol=1e-11)
        assert report.converged
        np.testing.assert_allclose(a @ x, b, atol=1e-9)

    def test_zero_rhs(self):
        x, report = krylov_solve(diagonal(np.arange(1.0, 6.0)), np.zeros(5))
        np.testing.assert_array_equal(x, 0.0)
        assert report.iterations == 0 and report.converged

    def test_exact_initial_guess(self, rng):
        d = np.arange(1.0, 11.0)
        b = rng.normal(size=10)
        _, report = krylov_solve(diagonal(d), b, x0=b / d)
        assert report.iterations == 0 and report.converged

    def test_exact_preconditioner(self, rng):
        d = np.logspace(0, 6, 40)
        b = rng.normal(size=40)
        x, report = krylov_solve(diagonal(d), b, precond=diagonal(1.0 / d), tol=1e-12)
        assert report.converged
        assert report.iterations <= 2
        np.testing.assert_allclose(x, b / d, rtol=1e-10)

    def test_budget_exhaustion_is_reported(self, rng):
        """Non-convergence comes back in the report, never as an exception."""
        d = np.logspace(0, 8, 200)
        b = rng.normal(size=200)
        _, report = krylov_solve(diagonal(d), b, tol=1e-14, max_iter=3, restart=3)
        assert not report.converged
        assert report.iterations <= 3
        assert report.relative_residual > 1e-14

    def test_first_step_breakdown_takes_minimal_residual_step(self, rng, monkeypatch):
        """A GMRES cycle that returns y = 0 still solves a scaled identity in one iteration."""

        def breakdown(a, b, callback=None, **kwargs):
            callback(0.0)
            return np.zeros_like(b), 1

        monkeypatch.setattr(krylov, 'gmres', breakdown)
        b = rng.normal(size=10)
        x, report = krylov_solve(LinOp(lambda v: 4.0 * v, 10), b, tol=1e-12)
        assert report.converged
        assert report.iterations == 1
        np.testing.assert_allclose(x, b / 4.0, rtol=1e-12)

    def test_stagnation_stops_before_budget(self, rng, monkeypatch):
        """A zero operator gives no progress; the solve stops instead of spending max_iter."""

        def breakdown(a, b, callback=None, **kwargs):
            callback(0.0)
            return np.zeros_like(b), 1

        monkeypatch.setattr(krylov, 'gmres', breakdown)
        b = rng.normal(size=6)
        x, report = krylov_solve(LinOp(lambda v: 0.0 * v, 6), b, max_iter=500)
        assert not report.converged
        assert report.iterations == 1
        assert report.relative_residual == pytest.approx(1.0)
        np.testing.assert_array_equal(x, 0.0)

    def test_solution_is_linear_in_rhs(self, rng):
        d = np.linspace(2.0, 9.0, 20)
        b1, b2 = rng.normal(size=20), rng.normal(size=20)
        x1, _ = krylov_solve(diagonal(d), b1, tol=1e-12)
        x2, _ = krylov_solve(diagonal(d), b2, tol=1e-12)
        x12, _ = krylov_solve(diagonal(d), 2.0 * b1 - b2, tol=1e-12)
        np.testing.assert_allclose(x12, 2.0 * x1 - x2, atol=1e-9)

    def test_nan_operator_raises(self):
        op = LinOp(lambda v: np.full_like(v, np.nan), 4)
        with pytest.raises(KrylovBreakdownError):
            krylov_solve(op, np.ones(4))

    def test_nan_rhs_raises(self):
        with pytest.raises(KrylovBreakdownError):
            krylov_solve(diagonal(np.ones(3)), np.array([1.0, np.nan, 0.0]))

    @pytest.mark.parametrize("kwargs", [{'tol': 0.0}, {'tol': -1e-3}])
    def test_rejects_bad_tolerance(self, kwargs):
        with pytest.raises(ValueError):
            krylov_solve(diagonal(np.ones(3)), np.ones(3), **kwargs)

    def test_rejects_size_mismatch(self):
        with pytest.raises(ValueError):
            krylov_solve(diagonal(np.ones(3)), np.ones(4))

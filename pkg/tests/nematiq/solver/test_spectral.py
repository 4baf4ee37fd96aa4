"""Tests for the Fourier and cosine diagonal solves."""

import pytest
import numpy as np

from nematiq.errors import SingularSymbolError
from nematiq.grid.fields import BoundarySpec, GhostRule, GridSpec, QTensorField, ScalarField
from nematiq.grid.operators import div_c, gradient, laplace5
from nematiq.solver.spectral import (
    central_poisson_symbol,
    dct_diag_solve,
    dft_diag_solve,
    laplace5_symbol,
    neumann_laplace5_symbol,
    null_modes,
)

pytestmark = pytest.mark.unit


class TestSymbols:
    def test_laplace5_symbol_matches_operator(self, periodic_grid, random_scalar):
        """Applying the symbol in Fourier space reproduces laplace5."""
        f = random_scalar(periodic_grid)
        spectral = np.real(np.fft.ifftn(laplace5_symbol(periodic_grid) * np.fft.fftn(f.values)))
        np.testing.assert_allclose(spectral, laplace5(f).values, atol=1e-9)

    def test_central_symbol_matches_operator(self, periodic_grid, random_scalar):
        f = random_scalar(periodic_grid)
        spectral = np.real(np.fft.ifftn(central_poisson_symbol(periodic_grid) * np.fft.fftn(f.values)))
        np.testing.assert_allclose(spectral, div_c(gradient(f)).values, atol=1e-9)

    def test_null_modes_of_wide_stencil(self, periodic_grid):
        """Mean plus the three checkerboards on an even grid."""
        mask = null_modes(central_poisson_symbol(periodic_grid))
        assert np.count_nonzero(mask) == 4
        assert mask[0, 0] and mask[8, 8] and mask[0, 8] and mask[8, 0]

    def test_compact_symbol_has_only_the_mean(self, periodic_grid):
        assert np.count_nonzero(null_modes(laplace5_symbol(periodic_grid))) == 1


class TestDftDiagSolve:
    def test_identity_symbol(self, periodic_grid, random_scalar):
        f = random_scalar(periodic_grid)
        out = dft_diag_solve(np.ones(periodic_grid.n), f.values)
        np.testing.assert_allclose(out, f.values, atol=1e-13)

    def test_helmholtz_residual(self, periodic_grid, random_q):
        """(I - laplace5) x = b solved for every Q component at once."""
        b = random_q(periodic_grid)
        x = dft_diag_solve(1.0 - laplace5_symbol(periodic_grid), b)
        assert isinstance(x, QTensorField)
        residual = x.data - laplace5(x).data - b.data
        assert np.max(np.abs(residual)) <= 1e-10 * np.max(np.abs(b.data))

    def test_single_mode_amplitude(self):
        """sin(2 pi x) is an eigenfunction of div_c grad_c with eigenvalue -(sin(2 pi h)/h)^2."""
        grid = GridSpec.uniform(16)
        x, _ = grid.cell_centers()
        h = grid.h[0]
        rhs = np.sin(2 * np.pi * x)
        symbol = central_poisson_symbol(grid)
        psi = dft_diag_solve(symbol, rhs, null_modes(symbol))
        np.testing.assert_allclose(psi, -rhs * h**2 / np.sin(2 * np.pi * h) ** 2, atol=1e-12)

    def test_masked_modes_are_zeroed(self, periodic_grid):
        symbol = central_poisson_symbol(periodic_grid)
        psi = dft_diag_solve(symbol, np.ones(periodic_grid.n), null_modes(symbol))
        np.testing.assert_allclose(psi, 0.0, atol=1e-14)

    def test_unmasked_zero_raises(self, periodic_grid, random_scalar):
        with pytest.raises(SingularSymbolError):
            dft_diag_solve(central_poisson_symbol(periodic_grid), random_scalar(periodic_grid).values)

    def test_zero_symbol_raises(self, periodic_grid):
        with pytest.raises(SingularSymbolError):
            dft_diag_solve(np.zeros(periodic_grid.n), np.ones(periodic_grid.n))


class TestDctDiagSolve:
    def test_inverts_neumann_laplacian(self, wall_grid, rng):
        """The DCT-II symbol is exact for copy-interior ghosts."""
        rhs = rng.normal(size=wall_grid.n)
        rhs -= rhs.mean()
        symbol = neumann_laplace5_symbol(wall_grid)
        symbol.flat[0] = 1.0
        psi = dct_diag_solve(symbol, rhs)
        assert abs(psi.mean()) <= 1e-12
        applied = laplace5(ScalarField(wall_grid, psi, BoundarySpec(GhostRule.NEUMANN))).values
        np.testing.assert_allclose(applied, rhs, atol=1e-9)

    def test_zero_entry_raises(self, wall_grid):
        with pytest.raises(SingularSymbolError):
            dct_diag_solve(neumann_laplace5_symbol(wall_grid), np.ones(wall_grid.n))

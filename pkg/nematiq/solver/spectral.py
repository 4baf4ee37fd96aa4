# spectral.py
"""
Constant-coefficient solves on periodic grids by DFT diagonalisation.

Each stencil operator on a periodic grid is diagonal in the discrete Fourier basis;
its per-mode multiplier (the symbol) is built here from the modified wavenumbers.
"""
from __future__ import annotations

from logging import getLogger

import numpy as np
from scipy.fft import dctn, idctn

from nematiq.errors import SingularSymbolError
from nematiq.grid.fields import Field, GridSpec

logger = getLogger(__name__)

# |symbol| below this fraction of max|symbol| counts as zero
NULL_RTOL = 1e-12


def mode_angles(grid: GridSpec) -> list[np.ndarray]:
    """theta_k = 2 pi m / n_k for every DFT index m, shaped to broadcast over the grid."""
    angles = []
    for k, cells in enumerate(grid.n):
        shape = [1] * grid.dim
        shape[k] = cells
        angles.append((2.0 * np.pi * np.fft.fftfreq(cells)).reshape(shape))
    return angles


def laplace5_symbol(grid: GridSpec) -> np.ndarray:
    """Eigenvalues of the compact Laplacian: -sum_k (2/h_k^2)(1 - cos theta_k)."""
    symbol = np.zeros(grid.n)
    for theta, h in zip(mode_angles(grid), grid.h):
        symbol = symbol - 2.0 / h**2 * (1.0 - np.cos(theta))
    return symbol


def central_poisson_symbol(grid: GridSpec) -> np.ndarray:
    """Eigenvalues of div_c(grad_c): -sum_k (sin theta_k / h_k)^2, zero at Nyquist."""
    symbol = np.zeros(grid.n)
    for theta, h in zip(mode_angles(grid), grid.h):
        symbol = symbol - (np.sin(theta) / h) ** 2
    return symbol


def null_modes(symbol: np.ndarray, rtol: float = NULL_RTOL) -> np.ndarray:
    """Boolean mask of the modes where the symbol vanishes."""
    magnitude = np.abs(symbol)
    scale = magnitude.max() if magnitude.size else 0.0
    return magnitude <= rtol * scale


def dft_diag_solve(
    symbol: np.ndarray, rhs: np.ndarray | Field, modes_to_zero: np.ndarray | None = None
):
    """
    Invert a diagonal-in-Fourier operator.

    The transform runs over the trailing symbol.ndim axes of rhs, so component-first
    field data is solved for every component at once. Modes flagged in modes_to_zero
    are set to zero in the result; any other zero of the symbol is an error.
    """
    as_field = isinstance(rhs, Field)
    data = rhs.data if as_field else np.asarray(rhs, dtype=float)

    symbol = np.asarray(symbol)
    if modes_to_zero is None:
        modes_to_zero = np.zeros(symbol.shape, dtype=bool)
    scale = np.abs(symbol).max()
    singular = (np.abs(symbol) <= NULL_RTOL * scale) & ~modes_to_zero
    if scale == 0 or np.any(singular):
        raise SingularSymbolError(
            f"Symbol vanishes on {int(np.count_nonzero(singular))} mode(s) outside the null set"
        )

    axes = tuple(range(data.ndim - symbol.ndim, data.ndim))
    spectrum = np.fft.fftn(data, axes=axes)
    safe = np.where(modes_to_zero, 1.0, symbol)
    spectrum = np.where(modes_to_zero, 0.0, spectrum / safe)
    result = np.real(np.fft.ifftn(spectrum, axes=axes))
    return rhs.with_data(result) if as_field else result


def neumann_laplace5_symbol(grid: GridSpec) -> np.ndarray:
    """
    Eigenvalues of laplace5 with copy-interior ghosts on a wall grid.

    The cell-centred Neumann stencil is diagonalised by the type-II DCT with angles
    pi m / n_k; the constant mode carries eigenvalue 0.
    """
    symbol = np.zeros(grid.n)
    for k, (cells, h) in enumerate(zip(grid.n, grid.h)):
        shape = [1] * grid.dim
        shape[k] = cells
        theta = (np.pi * np.arange(cells) / cells).reshape(shape)
        symbol = symbol - 2.0 / h**2 * (1.0 - np.cos(theta))
    return symbol


def dct_diag_solve(symbol: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Invert an operator that is diagonal in the orthonormal type-II DCT basis."""
    if np.any(symbol == 0):
        raise SingularSymbolError("DCT symbol has zero entries")
    spectrum = dctn(rhs, type=2, norm='ortho')
    return idctn(spectrum / symbol, type=2, norm='ortho')

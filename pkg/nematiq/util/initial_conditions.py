"""
Initial Q-tensor and velocity fields for the reproduction runs.

All Q fields are built from a director field n through
    Q = (n n^T - |n|^2 / d I) / (|n|^2 + eps^2)   (normalised)
    Q = n n^T - |n|^2 / d I                        (raw)
so they are symmetric and trace-free by construction.
"""

from __future__ import annotations
from collections.abc import Callable
from dataclasses import dataclass
from logging import getLogger

import numpy as np

from nematiq.grid.boundary import dirichlet_boundary
from nematiq.grid.fields import BoundarySpec, GhostRule, GridSpec, QTensorField, VectorField
from nematiq.model.tensor import SymTracelessTensor
from nematiq.util.config_file import InitialConditionName, QBoundary

logger = getLogger(__name__)

RANDOM_ORDER = 0.5

DirectorFunction = Callable[[list[np.ndarray]], np.ndarray]


def q_from_director(n: np.ndarray, normalise: bool = False, eps: float = 0.0) -> np.ndarray:
    """Independent Q components from a director array of shape (d, ...)."""
    n = np.asarray(n, dtype=float)
    dim = n.shape[0]
    outer = np.einsum('i...,j...->ij...', n, n)
    length2 = np.einsum('i...,i...->...', n, n)
    eye = np.eye(dim).reshape((dim, dim) + (1,) * (n.ndim - 1))
    q = outer - length2 / dim * eye
    if normalise:
        q = q / (length2 + eps**2)
    return SymTracelessTensor.from_matrix(q).comps


def accuracy1_director(coords: list[np.ndarray]) -> np.ndarray:
    x, y = coords[:2]
    return np.array([np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y), np.zeros_like(x)])


def accuracy2_director(coords: list[np.ndarray]) -> np.ndarray:
    x, y = coords[:2]
    return np.array(
        [np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y), np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y)]
    )


def defect_director(L: tuple[float, ...]) -> DirectorFunction:
    """Radial (+1) director centred at a quarter of each domain length."""

    def director(coords: list[np.ndarray]) -> np.ndarray:
        return np.array([c - 0.25 * length for c, length in zip(coords, L)])

    return director


def random_q(grid: GridSpec, seed: int, order: float = RANDOM_ORDER) -> np.ndarray:
    """Uniaxial Q with order `order` and an independent random director per cell."""
    rng = np.random.default_rng(seed)
    n = rng.normal(size=(grid.dim,) + grid.n)
    n /= np.linalg.norm(n, axis=0)
    return order * q_from_director(n)


@dataclass
class InitialCondition:
    Q0: QTensorField
    u0: VectorField
    q_boundary: BoundarySpec | None


def build_initial_condition(
    name: InitialConditionName,
    grid: GridSpec,
    q_bc: QBoundary = QBoundary.NEUMANN,
    seed: int = 0,
    defect_eps: float | None = None,
) -> InitialCondition:
    """
    Q0 and u0 = 0 for a named initial condition, with the matching Q wall data.

    Accuracy runs use the raw construction; the defect uses the normalised one,
    regularised over eps (default: the grid spacing) at its core.
    """
    name = InitialConditionName(name)
    if name is not InitialConditionName.RANDOM and grid.dim != 2:
        raise ValueError(f"Initial condition '{name.value}' is defined in 2D only")

    if name is InitialConditionName.RANDOM:

        def q_function(coords):
            raise ValueError("A random initial condition has no wall data; use q_bc = neumann")

        data = random_q(grid, seed)
    else:
        if name is InitialConditionName.DEFECT:
            eps = min(grid.h) if defect_eps is None else defect_eps
            director = defect_director(grid.L)

            def q_function(coords):
                return q_from_director(director(coords), normalise=True, eps=eps)

        else:
            director = accuracy1_director if name is InitialConditionName.ACCURACY1 else accuracy2_director

            def q_function(coords):
                return q_from_director(director(coords))

        data = q_function(grid.cell_centers())

    q_boundary = None
    if not grid.periodic:
        if q_bc is QBoundary.DIRICHLET:
            q_boundary = dirichlet_boundary(grid, q_function)
        else:
            q_boundary = BoundarySpec(GhostRule.NEUMANN)

    logger.info(f"Initial condition '{name.value}' on {'x'.join(map(str, grid.n))}")
    return InitialCondition(
        Q0=QTensorField(grid, data, q_boundary),
        u0=VectorField.zeros(grid, BoundarySpec(GhostRule.NO_SLIP)),
        q_boundary=q_boundary,
    )

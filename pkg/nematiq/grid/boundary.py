# boundary.py
"""Ghost-layer construction for periodic and wall grids."""
from __future__ import annotations

from collections.abc import Callable
from logging import getLogger

import numpy as np

from nematiq.errors import BoundaryDataError
from nematiq.grid.fields import BoundarySpec, Field, GhostRule, GridSpec

logger = getLogger(__name__)


def _at(ndim: int, axis: int, index) -> tuple:
    """Index tuple selecting `index` along `axis` and everything elsewhere."""
    key = [slice(None)] * ndim
    key[axis] = index
    return tuple(key)


def fill_ghosts(field: Field, spec: BoundarySpec | None = None) -> np.ndarray:
    """
    Return the field data padded by one ghost cell per side along every grid axis.

    Periodic grids wrap. On wall grids the ghost rule of `spec` (default: the field's
    own boundary) decides the ghost values; corners are filled axis by axis.
    """
    spec = spec or field.boundary
    grid = field.grid
    data = field.data
    lead = data.ndim - grid.dim
    pad_width = [(0, 0)] * lead + [(1, 1)] * grid.dim

    if grid.periodic or spec.rule is GhostRule.PERIODIC:
        return np.pad(data, pad_width, mode='wrap')

    padded = np.pad(data, pad_width, mode='edge')
    if spec.rule is GhostRule.NEUMANN:
        return padded

    values = spec.values
    if spec.rule is GhostRule.DIRICHLET:
        if values is None:
            raise BoundaryDataError(
                f"Dirichlet ghost fill on {type(field).__name__} needs boundary values"
            )
        if values.shape != padded.shape:
            raise BoundaryDataError(
                f"Dirichlet boundary values have shape {values.shape}, expected {padded.shape}"
            )

    ndim = padded.ndim
    for axis in range(lead, ndim):
        for ghost, inner, inner2 in ((0, 1, 2), (-1, -2, -3)):
            g = _at(ndim, axis, ghost)
            i1 = _at(ndim, axis, inner)
            if spec.rule is GhostRule.NO_SLIP:
                padded[g] = -padded[i1]
            elif spec.rule is GhostRule.DIRICHLET:
                padded[g] = 2.0 * values[g] - padded[i1]
            elif spec.rule is GhostRule.EXTRAPOLATE:
                padded[g] = 2.0 * padded[i1] - padded[_at(ndim, axis, inner2)]
            else:
                raise ValueError(f"Unsupported ghost rule {spec.rule}")
    return padded


def dirichlet_boundary(
    grid: GridSpec, function: Callable[[list[np.ndarray]], np.ndarray]
) -> BoundarySpec:
    """
    Dirichlet spec whose wall values come from `function` evaluated on the wall faces.

    `function` maps a list of coordinate arrays to component-first values, the same
    callable used to build the initial condition, so Q|wall = Q0|wall.
    """
    values = np.asarray(function(grid.face_clamped_centers()), dtype=float)
    logger.debug(f"Built Dirichlet wall data with shape {values.shape}")
    return BoundarySpec(GhostRule.DIRICHLET, values)

# fields.py
"""
Uniform cell-centred grids and the fields that live on them.

Field data is stored component-first: shape (*component_shape, n_1, ..., n_d).
Ghost cells are never stored; operators pad on demand through fill_ghosts using
the field's BoundarySpec, so ghosts always agree with the boundary rule.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field, replace
from enum import Enum
from typing import ClassVar

import numpy as np

from nematiq.model.tensor import DOF, SymTracelessTensor


class BoundaryKind(str, Enum):
    PERIODIC = 'periodic'
    WALL = 'wall'


class GhostRule(str, Enum):
    """How the one-cell ghost layer is derived from interior values."""

    PERIODIC = 'periodic'
    NO_SLIP = 'no_slip'  # ghost = -interior, zero at the wall face
    DIRICHLET = 'dirichlet'  # ghost = 2 b - interior
    NEUMANN = 'neumann'  # ghost = interior
    EXTRAPOLATE = 'extrapolate'  # ghost = 2 interior - next interior


@dataclass(frozen=True)
class BoundarySpec:
    rule: GhostRule
    # For DIRICHLET: an array with the padded shape; ghost positions hold the face value
    values: np.ndarray | None = dc_field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class GridSpec:
    n: tuple[int, ...]
    L: tuple[float, ...]
    bc: BoundaryKind = BoundaryKind.PERIODIC

    def __post_init__(self):
        n = tuple(int(v) for v in np.atleast_1d(self.n))
        L = tuple(float(v) for v in np.atleast_1d(self.L))
        if len(L) == 1 and len(n) > 1:
            L = L * len(n)
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'L', L)
        object.__setattr__(self, 'bc', BoundaryKind(self.bc))
        if len(n) not in (2, 3):
            raise ValueError(f"Grid dimension must be 2 or 3, got {len(n)}")
        if len(L) != len(n):
            raise ValueError(f"Got {len(n)} cell counts but {len(L)} domain lengths")
        if min(n) < 4:
            raise ValueError(f"Need at least 4 cells per axis, got {n}")
        if min(L) <= 0:
            raise ValueError(f"Domain lengths must be positive, got {L}")

    @classmethod
    def uniform(cls, cells: int, dim: int = 2, length: float = 1.0, bc=BoundaryKind.PERIODIC):
        return cls(n=(cells,) * dim, L=(length,) * dim, bc=bc)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def h(self) -> tuple[float, ...]:
        return tuple(length / cells for length, cells in zip(self.L, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.h))

    @property
    def periodic(self) -> bool:
        return self.bc is BoundaryKind.PERIODIC

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(cells + 2 for cells in self.n)

    def axis_centers(self, axis: int) -> np.ndarray:
        return (np.arange(self.n[axis]) + 0.5) * self.h[axis]

    def cell_centers(self) -> list[np.ndarray]:
        """Coordinate arrays (indexing='ij') of the cell centres."""
        return np.meshgrid(*(self.axis_centers(k) for k in range(self.dim)), indexing='ij')

    def face_clamped_centers(self) -> list[np.ndarray]:
        """
        Coordinates of the padded grid with ghost centres clamped onto the wall.

        Evaluating a function here gives the value at the wall face next to each ghost.
        """
        axes = []
        for k in range(self.dim):
            coords = (np.arange(-1, self.n[k] + 1) + 0.5) * self.h[k]
            axes.append(np.clip(coords, 0.0, self.L[k]))
        return np.meshgrid(*axes, indexing='ij')


@dataclass
class Field:
    """Base class; subclasses fix the per-cell component shape."""

    grid: GridSpec
    data: np.ndarray
    bc: BoundarySpec | None = None

    kind: ClassVar[str] = 'field'

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        expected = self.component_shape(self.grid) + self.grid.n
        if data.shape == self.grid.n and self.component_shape(self.grid) == (1,):
            data = data[np.newaxis]
        if data.shape != expected:
            raise ValueError(f"{type(self).__name__} expects shape {expected}, got {data.shape}")
        self.data = data

    @classmethod
    def component_shape(cls, grid: GridSpec) -> tuple[int, ...]:
        raise NotImplementedError

    @classmethod
    def zeros(cls, grid: GridSpec, bc: BoundarySpec | None = None):
        return cls(grid, np.zeros(cls.component_shape(grid) + grid.n), bc)

    @property
    def boundary(self) -> BoundarySpec:
        """Effective ghost rule: wrap on periodic grids, extrapolate when nothing is set."""
        if self.grid.periodic:
            return BoundarySpec(GhostRule.PERIODIC)
        if self.bc is None:
            return BoundarySpec(GhostRule.EXTRAPOLATE)
        return self.bc

    def with_data(self, data: np.ndarray):
        return replace(self, data=data)

    def copy(self):
        return self.with_data(self.data.copy())

    def __add__(self, other: Field):
        return self.with_data(self.data + other.data)

    def __sub__(self, other: Field):
        return self.with_data(self.data - other.data)

    def __mul__(self, scalar: float):
        return self.with_data(self.data * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float):
        return self.with_data(self.data / scalar)

    def __neg__(self):
        return self.with_data(-self.data)


@dataclass
class ScalarField(Field):
    kind: ClassVar[str] = 'scalar'

    @classmethod
    def component_shape(cls, grid: GridSpec) -> tuple[int, ...]:
        return (1,)

    @property
    def values(self) -> np.ndarray:
        return self.data[0]


@dataclass
class VectorField(Field):
    kind: ClassVar[str] = 'vector'

    @classmethod
    def component_shape(cls, grid: GridSpec) -> tuple[int, ...]:
        return (grid.dim,)


@dataclass
class QTensorField(Field):
    kind: ClassVar[str] = 'qtensor'

    @classmethod
    def component_shape(cls, grid: GridSpec) -> tuple[int, ...]:
        return (DOF[grid.dim],)

    @property
    def tensor(self) -> SymTracelessTensor:
        return SymTracelessTensor(self.data)


@dataclass
class MatrixField(Field):
    """Full d x d matrix per cell (stress, velocity gradient)."""

    kind: ClassVar[str] = 'matrix'

    @classmethod
    def component_shape(cls, grid: GridSpec) -> tuple[int, ...]:
        return (grid.dim, grid.dim)

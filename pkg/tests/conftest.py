import pytest
import numpy as np

from nematiq.grid.fields import (
    BoundaryKind,
    BoundarySpec,
    GhostRule,
    GridSpec,
    QTensorField,
    ScalarField,
    VectorField,
)
from nematiq.model.params import ModelParams


@pytest.fixture
def rng():
    """Seeded generator so random fields are reproducible."""
    return np.random.default_rng(20240601)


@pytest.fixture
def params():
    """Parameter set of the accuracy and defect experiments."""
    return ModelParams()


@pytest.fixture
def periodic_grid():
    """Small periodic 2D grid."""
    return GridSpec.uniform(16, dim=2)


@pytest.fixture
def wall_grid():
    """Small 2D grid with walls."""
    return GridSpec.uniform(16, dim=2, bc=BoundaryKind.WALL)


@pytest.fixture
def periodic_grid_3d():
    """Smallest useful periodic 3D grid."""
    return GridSpec.uniform(6, dim=3)


@pytest.fixture
def random_scalar(rng):
    """Factory for random scalar fields."""

    def _make(grid, bc=None):
        return ScalarField(grid, rng.normal(size=grid.n), bc)

    return _make


@pytest.fixture
def random_vector(rng):
    """Factory for random vector fields; no-slip ghosts by default."""

    def _make(grid, bc=BoundarySpec(GhostRule.NO_SLIP)):
        return VectorField(grid, rng.normal(size=(grid.dim,) + grid.n), bc)

    return _make


@pytest.fixture
def random_q(rng):
    """Factory for random Q-tensor fields of moderate size."""

    def _make(grid, scale=0.3, bc=None):
        shape = QTensorField.component_shape(grid) + grid.n
        return QTensorField(grid, scale * rng.normal(size=shape), bc)

    return _make


@pytest.fixture
def smooth_q():
    """Smooth periodic Q field (two Fourier modes)."""

    def _make(grid, amplitude=0.2):
        x, y = grid.cell_centers()[:2]
        data = np.zeros(QTensorField.component_shape(grid) + grid.n)
        data[0] = amplitude * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
        data[1] = amplitude * np.cos(2 * np.pi * x + 0.3)
        return QTensorField(grid, data)

    return _make

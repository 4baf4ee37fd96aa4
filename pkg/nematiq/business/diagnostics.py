"""Derived quantities: director fields, Cauchy errors, convergence tables, defect checks."""

from __future__ import annotations
from dataclasses import dataclass
from logging import getLogger
import math

import numpy as np

from nematiq.errors import FieldMismatchError
from nematiq.grid.fields import Field, QTensorField
from nematiq.grid.operators import norm_h
from nematiq.model.tensor import COMPONENT_NAMES, SymTracelessTensor

logger = getLogger(__name__)

ISOTROPIC_TOL = 1e-12
VELOCITY_NAMES = ('u', 'v', 'w')


@dataclass
class Director:
    """Principal axis n (unit, or zero where isotropic), order parameter s, isotropic mask."""

    n: np.ndarray
    s: np.ndarray
    isotropic: np.ndarray


def _fix_sign(n: np.ndarray) -> np.ndarray:
    """Flip each vector so that its first nonzero component is positive."""
    flat = n.reshape(n.shape[0], -1)
    nonzero = np.abs(flat) > ISOTROPIC_TOL
    first = np.argmax(nonzero, axis=0)
    lead = flat[first, np.arange(flat.shape[1])]
    sign = np.where(lead < 0, -1.0, 1.0)
    return (flat * sign).reshape(n.shape)


def director(q: SymTracelessTensor) -> Director:
    """
    Leading eigenpair of Q, pointwise.

    In 2D the eigenvalues are +-sqrt(q11^2 + q12^2) and n = (cos t, sin t) with
    t = atan2(q12, q11) / 2. In 3D numpy's symmetric eigensolver is used. s is
    d/(d-1) times the largest eigenvalue, which recovers s0 for Q = s0 (n n^T - I/d).
    """
    if q.dim == 2:
        q11, q12 = q.comps
        lam = np.hypot(q11, q12)
        theta = 0.5 * np.arctan2(q12, q11)
        n = np.array([np.cos(theta), np.sin(theta)])
    else:
        m = q.matrix()
        batch = m.shape[2:]
        stacked = np.moveaxis(m.reshape(3, 3, -1), -1, 0)
        values, vectors = np.linalg.eigh(stacked)
        lam = values[:, -1].reshape(batch)
        n = vectors[:, :, -1].T.reshape((3,) + batch)
    isotropic = np.asarray(lam < ISOTROPIC_TOL)
    n = np.where(isotropic, 0.0, _fix_sign(np.asarray(n, dtype=float)))
    s = q.dim / (q.dim - 1.0) * lam
    return Director(n=n, s=np.asarray(s), isotropic=isotropic)


def cauchy_error(coarse: Field | float, fine: Field | float) -> float:
    """||f_dt - f_dt/2||: the L2_h norm for fields, the absolute difference for scalars."""
    if isinstance(coarse, Field) or isinstance(fine, Field):
        if type(coarse) is not type(fine):
            raise FieldMismatchError("Cauchy error needs two fields of the same kind")
        if coarse.grid != fine.grid:
            raise FieldMismatchError(f"Grids differ: {coarse.grid} vs {fine.grid}")
        return norm_h(coarse - fine)
    return abs(float(coarse) - float(fine))


def component_errors(coarse, fine) -> dict[str, float]:
    """
    Per-variable Cauchy errors between two end states (anything with Q, u and r):
    each independent Q component, each velocity component, and r.
    """
    grid = coarse.Q.grid
    if grid != fine.Q.grid:
        raise FieldMismatchError(f"Grids differ: {grid} vs {fine.Q.grid}")
    errors = {}
    for i, name in enumerate(COMPONENT_NAMES[grid.dim]):
        diff = coarse.Q.data[i] - fine.Q.data[i]
        errors[name] = math.sqrt(grid.cell_volume * float(np.sum(diff * diff)))
    for k in range(grid.dim):
        diff = coarse.u.data[k] - fine.u.data[k]
        errors[VELOCITY_NAMES[k]] = math.sqrt(grid.cell_volume * float(np.sum(diff * diff)))
    errors['r'] = cauchy_error(coarse.r, fine.r)
    return errors


@dataclass
class ConvergenceRow:
    dt: float
    errors: dict[str, float]
    orders: dict[str, float | None]


def _order(previous: float, current: float) -> float | None:
    if previous > 0 and current > 0:
        return math.log2(previous / current)
    return None


def convergence_table(runs: list[tuple[float, object]], ratio_rtol: float = 1e-9) -> list[ConvergenceRow]:
    """
    Rows of Cauchy errors e_k = ||f_{dt_k} - f_{dt_k/2}|| and orders log2(e_{k-1}/e_k).

    `runs` holds (dt, end state) pairs sorted by decreasing dt with ratio 2; n runs
    give n - 1 rows, the first without orders.
    """
    if len(runs) < 3:
        raise ValueError(f"Need at least 3 runs to compute a convergence order, got {len(runs)}")
    for (dt_a, _), (dt_b, _) in zip(runs, runs[1:]):
        if not math.isclose(dt_a / dt_b, 2.0, rel_tol=ratio_rtol):
            raise ValueError(f"Time steps must halve between runs: {dt_a} -> {dt_b}")

    rows = []
    previous = None
    for (dt, coarse), (_, fine) in zip(runs, runs[1:]):
        errors = component_errors(coarse, fine)
        orders = {
            name: (None if previous is None else _order(previous[name], value))
            for name, value in errors.items()
        }
        rows.append(ConvergenceRow(dt=dt, errors=errors, orders=orders))
        previous = errors
    return rows


def _bilinear_periodic(values: np.ndarray, grid, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Sample cell-centred periodic data at arbitrary points."""
    hx, hy = grid.h[:2]
    fx = x / hx - 0.5
    fy = y / hy - 0.5
    i0 = np.floor(fx).astype(int)
    j0 = np.floor(fy).astype(int)
    tx = fx - i0
    ty = fy - j0
    nx, ny = grid.n[:2]
    i0, i1 = i0 % nx, (i0 + 1) % nx
    j0, j1 = j0 % ny, (j0 + 1) % ny
    return (
        (1 - tx) * (1 - ty) * values[..., i0, j0]
        + tx * (1 - ty) * values[..., i1, j0]
        + (1 - tx) * ty * values[..., i0, j1]
        + tx * ty * values[..., i1, j1]
    )


def winding_number(
    Q: QTensorField, center: tuple[float, float], radius: float, samples: int = 64
) -> float:
    """
    Topological charge of the director on a circle around `center` (2D, periodic).

    The director is headless, so each angle increment is wrapped into (-pi/2, pi/2]
    before summing; a +1 defect returns 1.0 and a +1/2 defect 0.5.
    """
    if Q.grid.dim != 2:
        raise ValueError("Winding numbers are defined for 2D fields only")
    phi = np.linspace(0.0, 2.0 * np.pi, samples, endpoint=False)
    x = center[0] + radius * np.cos(phi)
    y = center[1] + radius * np.sin(phi)
    q = _bilinear_periodic(Q.data, Q.grid, x, y)
    angle = 0.5 * np.arctan2(q[1], q[0])
    steps = np.diff(np.append(angle, angle[0]))
    steps = (steps + np.pi / 2) % np.pi - np.pi / 2
    steps = np.where(steps == -np.pi / 2, np.pi / 2, steps)
    return float(np.sum(steps) / (2.0 * np.pi))


def plateau_ratio(times, energies) -> float:
    """|E(T) - E(T/2)| / |E(0) - E(T)|; small once the energy has levelled off."""
    times = np.asarray(times, dtype=float)
    energies = np.asarray(energies, dtype=float)
    if times.size < 2:
        raise ValueError("Need at least two samples for a plateau ratio")
    half = energies[np.argmin(np.abs(times - 0.5 * times[-1]))]
    drop = abs(energies[0] - energies[-1])
    if drop == 0:
        return 0.0
    return abs(energies[-1] - half) / drop


@dataclass
class LinfMonitor:
    """Running maximum of ||Q^n||_inf against the bound ||Q^0||_inf + margin."""

    initial: float
    margin: float = 2.0
    peak: float = 0.0

    def __post_init__(self):
        self.peak = max(self.peak, self.initial)

    @property
    def bound(self) -> float:
        return self.initial + self.margin

    @property
    def within_bound(self) -> bool:
        return self.peak <= self.bound

    def record(self, value: float) -> None:
        self.peak = max(self.peak, value)
        if value > self.bound:
            logger.warning(f"linf(Q) = {value:.4f} exceeds the monitor bound {self.bound:.4f}")

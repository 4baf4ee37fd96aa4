# operators.py
"""
Second-order finite-difference operators on cell-centred fields.

On periodic grids the operators satisfy the discrete summation-by-parts identities
the energy law relies on:
    (div_c v, f)_h = -(v, grad_c f)_h
    (laplace5 f, f)_h = -||grad+ f||_h^2
    (advect_skew(u, f), f)_h = 0 for any u.
The central gradient drives advection, stresses and projection; the forward gradient
appears only in energy reporting.
"""
from __future__ import annotations

import numpy as np

from nematiq.errors import FieldMismatchError
from nematiq.grid.boundary import fill_ghosts
from nematiq.grid.fields import (
    Field,
    MatrixField,
    QTensorField,
    ScalarField,
    VectorField,
)
from nematiq.model.tensor import metric_dot


def _interior(padded: np.ndarray, dim: int, axis: int | None = None, offset: int = 0) -> np.ndarray:
    """View of the interior cells, shifted by `offset` along grid axis `axis`."""
    lead = padded.ndim - dim
    key = [slice(None)] * lead
    for k in range(dim):
        size = padded.shape[lead + k] - 2
        shift = offset if k == axis else 0
        key.append(slice(1 + shift, 1 + shift + size))
    return padded[tuple(key)]


def _central(padded: np.ndarray, dim: int, axis: int, h: float) -> np.ndarray:
    return (_interior(padded, dim, axis, 1) - _interior(padded, dim, axis, -1)) / (2.0 * h)


def grad_c(field: Field) -> np.ndarray:
    """
    Central gradient of every component: shape (*component_shape, d, *n).

    Entry [..., k, ...] is the derivative along axis k.
    """
    grid = field.grid
    padded = fill_ghosts(field)
    parts = [_central(padded, grid.dim, k, grid.h[k]) for k in range(grid.dim)]
    lead = field.data.ndim - grid.dim
    return np.stack(parts, axis=lead)


def gradient(f: ScalarField) -> VectorField:
    return VectorField(f.grid, grad_c(f)[0])


def velocity_gradient(u: VectorField) -> MatrixField:
    """gu[i, j] = du_i / dx_j."""
    return MatrixField(u.grid, grad_c(u))


def div_c(v: VectorField | MatrixField) -> ScalarField | VectorField:
    """
    Central divergence. Vector -> scalar; matrix -> vector taken row-wise,
    (div sigma)_i = sum_j d_j sigma_ij.
    """
    grid = v.grid
    padded = fill_ghosts(v)
    if isinstance(v, MatrixField):
        out = sum(_central(padded[:, k], grid.dim, k, grid.h[k]) for k in range(grid.dim))
        return VectorField(grid, out)
    if isinstance(v, VectorField):
        out = sum(_central(padded[k], grid.dim, k, grid.h[k]) for k in range(grid.dim))
        return ScalarField(grid, out)
    raise TypeError(f"div_c needs a vector or matrix field, got {type(v).__name__}")


def laplace5(f: Field) -> Field:
    """Compact (2d+1)-point Laplacian applied componentwise."""
    grid = f.grid
    padded = fill_ghosts(f)
    centre = _interior(padded, grid.dim)
    out = np.zeros_like(centre)
    for k in range(grid.dim):
        out += (
            _interior(padded, grid.dim, k, 1) - 2.0 * centre + _interior(padded, grid.dim, k, -1)
        ) / grid.h[k] ** 2
    return f.with_data(out)


def advect(u: VectorField, f: Field) -> Field:
    """Convective form sum_k u_k d_k f with central differences."""
    if u.grid != f.grid:
        raise FieldMismatchError("advect needs u and f on the same grid")
    grad = grad_c(f)
    lead = f.data.ndim - f.grid.dim
    comps = int(np.prod(f.data.shape[:lead]))
    flat = grad.reshape((comps, f.grid.dim) + f.grid.n)
    out = np.einsum('k...,ck...->c...', u.data, flat)
    return f.with_data(out.reshape(f.data.shape))


def advect_skew(u: VectorField, f: Field) -> Field:
    """
    Skew-symmetric transport 1/2 (u . grad_c f + div_c(u f)).

    On periodic grids (advect_skew(u, f), f)_h = 0 for every u. The convective form alone
    only has this property when u is constant along each axis.
    """
    if u.grid != f.grid:
        raise FieldMismatchError("advect_skew needs u and f on the same grid")
    grid = f.grid
    pu = fill_ghosts(u)
    pf = fill_ghosts(f)
    flux_div = sum(_central(pu[k] * pf, grid.dim, k, grid.h[k]) for k in range(grid.dim))
    return f.with_data(0.5 * (advect(u, f).data + flux_div))


def _pointwise_dot(a: Field, b: Field) -> np.ndarray:
    if isinstance(a, QTensorField):
        return metric_dot(a.data, b.data)
    lead = a.data.ndim - a.grid.dim
    return np.sum(a.data * b.data, axis=tuple(range(lead)))


def _check_compatible(a: Field, b: Field) -> None:
    if type(a) is not type(b):
        raise FieldMismatchError(f"Field kinds differ: {a.kind} vs {b.kind}")
    if a.grid != b.grid:
        raise FieldMismatchError(f"Grids differ: {a.grid} vs {b.grid}")


def inner_product_h(a: Field, b: Field) -> float:
    """
    Cell-volume weighted L2 inner product. Q-tensor fields pair their full matrices,
    sum_ij A_ij B_ij; every other kind sums over stored components.
    """
    _check_compatible(a, b)
    return float(a.grid.cell_volume * np.sum(_pointwise_dot(a, b)))


def norm_h(a: Field) -> float:
    return float(np.sqrt(inner_product_h(a, a)))


def linf_norm(a: Field) -> float:
    """Max over cells of the Frobenius (or Euclidean) magnitude."""
    return float(np.sqrt(np.max(_pointwise_dot(a, a))))


def forward_gradient_norm2(f: Field) -> float:
    """
    ||grad+ f||_h^2 with forward differences across cell faces.

    Periodic grids count the n faces per axis including the wrap. Wall grids count all
    n + 1 faces with the two ghost faces at half weight, which keeps
    (laplace5 f, f)_h = -||grad+ f||_h^2 exact for homogeneous ghost rules.
    """
    grid = f.grid
    padded = fill_ghosts(f)
    lead = padded.ndim - grid.dim
    total = 0.0
    for k in range(grid.dim):
        axis = lead + k
        diffs = np.diff(padded, axis=axis) / grid.h[k]
        # restrict the other grid axes to interior cells
        key = [slice(None)] * padded.ndim
        for j in range(grid.dim):
            if j != k:
                key[lead + j] = slice(1, -1)
        if grid.periodic:
            key[axis] = slice(1, grid.n[k] + 1)
            weights = np.ones(grid.n[k])
        else:
            weights = np.ones(grid.n[k] + 1)
            weights[0] = weights[-1] = 0.5
        faces = diffs[tuple(key)]
        if isinstance(f, QTensorField):
            per_face = metric_dot(faces, faces)
        else:
            per_face = np.sum(faces * faces, axis=tuple(range(lead)))
        shape = [1] * grid.dim
        shape[k] = weights.size
        total += float(np.sum(per_face * weights.reshape(shape)))
    return total * grid.cell_volume

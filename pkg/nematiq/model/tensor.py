# tensor.py
"""
Pointwise Q-tensor algebra and the constitutive terms of the flow model.

Every function is vectorised: a tensor carries its independent components on the
leading axis and any number of trailing (grid) axes, so the same code evaluates a
single point or a whole field. Full d x d matrices are laid out as (d, d, ...).

Component order:
    d = 2: (q11, q12)                  q22 = -q11
    d = 3: (q11, q12, q13, q22, q23)   q33 = -q11 - q22

The identity terms use I/d (not I/3) so that f_B, S and sigma map trace-free inputs
to trace-free outputs in both dimensions.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from nematiq.model.params import ModelParams

DOF = {2: 2, 3: 5}
_DIM_FROM_DOF = {2: 2, 5: 3}

# Sum_ij A_ij B_ij expressed on independent components: A:B = a^T W b
FROBENIUS_METRIC = {
    2: np.diag([2.0, 2.0]),
    3: np.array(
        [
            [2.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 2.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 2.0, 0.0, 0.0],
            [1.0, 0.0, 0.0, 2.0, 0.0],
            [0.0, 0.0, 0.0, 0.0, 2.0],
        ]
    ),
}

COMPONENT_NAMES = {
    2: ('Q11', 'Q12'),
    3: ('Q11', 'Q12', 'Q13', 'Q22', 'Q23'),
}


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Batched matrix product of (d, d, ...) arrays."""
    return np.einsum('ik...,kj...->ij...', a, b)


def double_contract(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A:B = sum_ij A_ij B_ij for batched (d, d, ...) matrices."""
    return np.einsum('ij...,ij...->...', a, b)


def trace(a: np.ndarray) -> np.ndarray:
    return np.einsum('ii...->...', a)


def identity_like(a: np.ndarray) -> np.ndarray:
    """Identity with the trailing shape of the (d, d, ...) array a, ready to broadcast."""
    dim = a.shape[0]
    return np.eye(dim).reshape((dim, dim) + (1,) * (a.ndim - 2))


def metric_dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Frobenius pairing of two component arrays of shape (dof, ...)."""
    dim = _DIM_FROM_DOF[a.shape[0]]
    return np.einsum('a...,ab,b...->...', a, FROBENIUS_METRIC[dim], b)


@dataclass(frozen=True)
class SymTracelessTensor:
    """
    Symmetric trace-free d x d tensor stored by its independent components.

    Symmetry and zero trace are structural: the full matrix is rebuilt from the
    components, so neither can drift.
    """

    comps: np.ndarray

    def __post_init__(self):
        comps = np.asarray(self.comps, dtype=float)
        if comps.ndim == 0 or comps.shape[0] not in _DIM_FROM_DOF:
            raise ValueError(
                f"Expected 2 (d=2) or 5 (d=3) leading components, got shape {comps.shape}"
            )
        object.__setattr__(self, 'comps', comps)

    @property
    def dim(self) -> int:
        return _DIM_FROM_DOF[self.comps.shape[0]]

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.comps.shape[1:]

    def matrix(self) -> np.ndarray:
        c = self.comps
        if self.dim == 2:
            q11, q12 = c
            return np.array([[q11, q12], [q12, -q11]])
        q11, q12, q13, q22, q23 = c
        q33 = -q11 - q22
        return np.array([[q11, q12, q13], [q12, q22, q23], [q13, q23, q33]])

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> SymTracelessTensor:
        """
        Independent components of the symmetric trace-free part of m.

        For an m that is already symmetric and trace-free this is exact; otherwise it is
        the Frobenius-orthogonal projection onto that subspace.
        """
        m = np.asarray(m, dtype=float)
        dim = m.shape[0]
        sym = 0.5 * (m + np.swapaxes(m, 0, 1))
        if dim == 2:
            return cls(np.array([0.5 * (sym[0, 0] - sym[1, 1]), sym[0, 1]]))
        if dim == 3:
            tr3 = trace(sym) / 3.0
            return cls(
                np.array(
                    [sym[0, 0] - tr3, sym[0, 1], sym[0, 2], sym[1, 1] - tr3, sym[1, 2]]
                )
            )
        raise ValueError(f"Unsupported dimension {dim}")

    @classmethod
    def zeros(cls, dim: int, batch_shape: tuple[int, ...] = ()) -> SymTracelessTensor:
        return cls(np.zeros((DOF[dim],) + tuple(batch_shape)))

    def contract(self, other: SymTracelessTensor) -> np.ndarray:
        """Q:G, pointwise."""
        return metric_dot(self.comps, other.comps)

    def trace_sq(self) -> np.ndarray:
        """tr(Q^2) = Q:Q."""
        return self.contract(self)


@dataclass(frozen=True)
class VelocityGradient:
    """Full d x d matrix of du_i/dx_j (first axis i, second axis j), possibly batched."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim < 2 or m.shape[0] != m.shape[1] or m.shape[0] not in DOF:
            raise ValueError(f"Velocity gradient must be (d, d, ...) with d in 2, 3; got {m.shape}")
        object.__setattr__(self, 'matrix', m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def divergence(self) -> np.ndarray:
        return trace(self.matrix)


def bulk_energy_density(q: SymTracelessTensor, p: ModelParams) -> np.ndarray:
    """F_B = alpha/2 tr(Q^2) + beta/3 tr(Q^3) + gamma/4 tr(Q^2)^2."""
    m = q.matrix()
    tr2 = q.trace_sq()
    tr3 = np.einsum('ij...,jk...,ki...->...', m, m, m)
    return 0.5 * p.alpha * tr2 + p.beta / 3.0 * tr3 + 0.25 * p.gamma * tr2**2


def bulk_force(q: SymTracelessTensor, p: ModelParams) -> SymTracelessTensor:
    """f_B = alpha Q + beta (Q^2 - tr(Q^2)/d I) + gamma tr(Q^2) Q."""
    m = q.matrix()
    tr2 = q.trace_sq()
    eye = identity_like(m)
    force = p.alpha * m + p.beta * (matmul(m, m) - tr2 / q.dim * eye) + p.gamma * tr2 * m
    return SymTracelessTensor.from_matrix(force)


def stabilized_force(q: SymTracelessTensor, p: ModelParams) -> SymTracelessTensor:
    """g(Q) = f_B(Q) - S_Q Q, the numerator of the SAV field V."""
    return SymTracelessTensor(bulk_force(q, p).comps - p.S_Q * q.comps)


def strain_and_vorticity(gu: VelocityGradient) -> tuple[np.ndarray, np.ndarray]:
    """Rate of strain D and vorticity W; D + W reproduces the gradient exactly."""
    transposed = np.swapaxes(gu.matrix, 0, 1)
    return 0.5 * (gu.matrix + transposed), 0.5 * (gu.matrix - transposed)


def s_term(gu: VelocityGradient, q: SymTracelessTensor, p: ModelParams) -> SymTracelessTensor:
    """
    S(grad u, Q) = WQ - QW + a(QD + DQ) + (2a/d)(D - div(u)/d I) - 2a (D:Q)(Q + I/d).

    Symmetric and trace-free for any gradient, so it is returned in component form.
    """
    if gu.dim != q.dim:
        raise ValueError(f"Dimension mismatch: grad u is {gu.dim}D, Q is {q.dim}D")
    d = q.dim
    strain, vort = strain_and_vorticity(gu)
    m = q.matrix()
    eye = identity_like(m)
    div = gu.divergence()
    dq = double_contract(strain, m)
    s = (
        matmul(vort, m)
        - matmul(m, vort)
        + p.a * (matmul(m, strain) + matmul(strain, m))
        + (2.0 * p.a / d) * (strain - div / d * eye)
        - 2.0 * p.a * dq * (m + eye / d)
    )
    return SymTracelessTensor.from_matrix(s)


def sigma_term(q: SymTracelessTensor, g: SymTracelessTensor, p: ModelParams) -> np.ndarray:
    """
    sigma(Q, G) = QG - GQ - a(GQ + QG) - (2a/d) G + 2a (Q:G)(Q + I/d).

    Returned as a full (d, d, ...) matrix; QG - GQ makes it non-symmetric in general.
    """
    if g.dim != q.dim:
        raise ValueError(f"Dimension mismatch: Q is {q.dim}D, G is {g.dim}D")
    d = q.dim
    mq = q.matrix()
    mg = g.matrix()
    eye = identity_like(mq)
    qg = matmul(mq, mg)
    gq = matmul(mg, mq)
    return qg - gq - p.a * (gq + qg) - (2.0 * p.a / d) * mg + 2.0 * p.a * q.contract(g) * (mq + eye / d)

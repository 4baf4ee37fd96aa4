"""
First-order SAV / stabilisation / projection time stepping.

One step advances (Q, u, p, r) in two stages:
    1. a coupled linear solve for (Q^{n+1}, u_tilde) with r^{n+1} eliminated through
       r^{n+1} = r^n + 1/2 (V^n, Q^{n+1} - Q^n)_h,
    2. a pressure projection of u_tilde onto discretely divergence-free fields.
Every step reports the modified energy before and after together with the dissipation
it must at least account for.
"""

from __future__ import annotations
from dataclasses import dataclass, field
from enum import Enum
from logging import getLogger
import math

import numpy as np

from nematiq.config import AUDIT_MODE, KRYLOV_MAX_ITER, KRYLOV_RESTART, KRYLOV_TOL
from nematiq.errors import AuditViolationError, EnergyFunctionalError, SolverConvergenceError
from nematiq.grid.fields import (
    BoundarySpec,
    GhostRule,
    GridSpec,
    MatrixField,
    QTensorField,
    ScalarField,
    VectorField,
)
from nematiq.grid.operators import (
    advect,
    advect_skew,
    div_c,
    forward_gradient_norm2,
    grad_c,
    gradient,
    inner_product_h,
    laplace5,
    linf_norm,
    norm_h,
    velocity_gradient,
)
from nematiq.model.params import ModelParams
from nematiq.model.tensor import (
    VelocityGradient,
    bulk_energy_density,
    metric_dot,
    s_term,
    sigma_term,
    stabilized_force,
)
from nematiq.solver.krylov import LinOp, SolveReport, krylov_solve
from nematiq.solver.poisson import PRESSURE_BC, pressure_poisson_solve
from nematiq.solver.spectral import dft_diag_solve, laplace5_symbol

logger = getLogger(__name__)

VELOCITY_BC = BoundarySpec(GhostRule.NO_SLIP)
AUDIT_FLOOR = 1e-10


class AuditMode(str, Enum):
    WARN = 'warn'
    ABORT = 'abort'


@dataclass
class SchemeState:
    Q: QTensorField
    u: VectorField
    p: ScalarField
    r: float
    t: float = 0.0
    step: int = 0


@dataclass
class Step1Result:
    Q: QTensorField
    r: float
    u_tilde: VectorField
    G: QTensorField
    solver: SolveReport


@dataclass
class StepReport:
    solver: SolveReport
    energy_before: float
    energy_after: float
    dissipation_residual: float
    trace_work: float
    grad_u_norm2: float
    G_norm2: float
    r_consistency: float
    linf_Q: float
    divergence_max: float
    audit_tol: float

    @property
    def passed(self) -> bool:
        return self.dissipation_residual <= self.audit_tol


@dataclass
class StepperSettings:
    krylov_tol: float = KRYLOV_TOL
    krylov_max_iter: int = KRYLOV_MAX_ITER
    krylov_restart: int = KRYLOV_RESTART
    audit_mode: AuditMode = field(default_factory=lambda: AuditMode(AUDIT_MODE))
    audit_factor: float = 100.0

    def audit_tol(self, energy_before: float) -> float:
        return max(AUDIT_FLOOR, self.audit_factor * self.krylov_tol * max(abs(energy_before), 1.0))


def compute_E1(Q: QTensorField, params: ModelParams) -> float:
    """Cell-sum quadrature of F_B(Q) - S_Q/2 tr(Q^2), plus C0. Must be positive."""
    q = Q.tensor
    integrand = bulk_energy_density(q, params) - 0.5 * params.S_Q * q.trace_sq()
    e1 = float(Q.grid.cell_volume * np.sum(integrand) + params.C0)
    if not e1 > 0:
        raise EnergyFunctionalError(f"C0 insufficient for stabilization split (E1 = {e1:.6e})")
    return e1


def compute_V(Q: QTensorField, params: ModelParams, e1: float | None = None) -> QTensorField:
    """V = (f_B(Q) - S_Q Q) / sqrt(E1(Q))."""
    e1 = compute_E1(Q, params) if e1 is None else e1
    g = stabilized_force(Q.tensor, params)
    return QTensorField(Q.grid, g.comps / math.sqrt(e1))


def divergence_max(u: VectorField) -> float:
    return float(np.max(np.abs(div_c(u).values)))


class SavStepper:
    """
    Advances SchemeStates on one grid with fixed model parameters.

    On wall grids u carries no-slip ghosts and Q carries `q_boundary` (homogeneous
    Neumann when omitted). The stepper itself holds no trajectory state.
    """

    def __init__(
        self,
        grid: GridSpec,
        params: ModelParams,
        settings: StepperSettings | None = None,
        q_boundary: BoundarySpec | None = None,
    ):
        self.grid = grid
        self.params = params
        self.settings = settings or StepperSettings()
        self.q_boundary = q_boundary or BoundarySpec(GhostRule.NEUMANN)
        self._nq = QTensorField.component_shape(grid)[0] * int(np.prod(grid.n))
        self._nu = grid.dim * int(np.prod(grid.n))
        if not grid.periodic:
            logger.warning(
                "Wall grid: the discrete energy law is approximate near walls; audit failures only warn"
            )

    def q_field(self, data: np.ndarray) -> QTensorField:
        return QTensorField(self.grid, data, self.q_boundary)

    def u_field(self, data: np.ndarray) -> VectorField:
        return VectorField(self.grid, data, VELOCITY_BC)

    def init_state(self, Q0: QTensorField, u0: VectorField) -> SchemeState:
        """p = 0, r = sqrt(E1(Q0)); a periodic u0 is projected onto divergence-free fields."""
        Q = self.q_field(Q0.data)
        r = math.sqrt(compute_E1(Q, self.params))
        u = self.u_field(u0.data)
        if self.grid.periodic:
            psi = pressure_poisson_solve(div_c(u), tol=self.settings.krylov_tol)
            u = u - gradient(psi)
        p = ScalarField.zeros(self.grid, PRESSURE_BC)
        logger.info(f"Initial state: r = {r:.6e}, linf(Q) = {linf_norm(Q):.4f}")
        return SchemeState(Q=Q, u=u, p=p, r=r)

    def modified_energy(self, state: SchemeState, dt: float) -> float:
        """
        K/2 ||grad+ Q||^2 + S_Q/2 ||Q||^2 + 1/2 ||u||^2 + dt^2/2 ||grad_c p||^2 + r^2 - C0.
        """
        p = self.params
        return (
            0.5 * p.K * forward_gradient_norm2(state.Q)
            + 0.5 * p.S_Q * norm_h(state.Q) ** 2
            + 0.5 * norm_h(state.u) ** 2
            + 0.5 * dt**2 * norm_h(gradient(state.p)) ** 2
            + state.r**2
            - p.C0
        )

    def r_consistency(self, state: SchemeState) -> float:
        """|r - sqrt(E1(Q))|: drift of the auxiliary variable away from its definition."""
        return abs(state.r - math.sqrt(compute_E1(state.Q, self.params)))

    def chemical_potential(self, Q: QTensorField, r: float, V: QTensorField) -> QTensorField:
        """G = K laplace5 Q - S_Q Q - r V, on extrapolated ghosts."""
        p = self.params
        return QTensorField(self.grid, p.K * laplace5(Q).data - p.S_Q * Q.data - r * V.data)

    def _split(self, x: np.ndarray) -> tuple[QTensorField, VectorField]:
        q_shape = QTensorField.component_shape(self.grid) + self.grid.n
        u_shape = VectorField.component_shape(self.grid) + self.grid.n
        return self.q_field(x[: self._nq].reshape(q_shape)), self.u_field(x[self._nq :].reshape(u_shape))

    def _preconditioner(self, dt: float) -> LinOp | None:
        """Block-diagonal constant-coefficient inverse; periodic grids only."""
        if not self.grid.periodic:
            return None
        p = self.params
        lam = laplace5_symbol(self.grid)
        q_symbol = 1.0 / dt + p.M * p.S_Q - p.M * p.K * lam
        u_symbol = 1.0 / dt - p.eta * lam
        q_shape = QTensorField.component_shape(self.grid) + self.grid.n
        u_shape = VectorField.component_shape(self.grid) + self.grid.n

        def apply(y):
            yq = dft_diag_solve(q_symbol, y[: self._nq].reshape(q_shape))
            yu = dft_diag_solve(u_symbol, y[self._nq :].reshape(u_shape))
            return np.concatenate([yq.ravel(), yu.ravel()])

        return LinOp(apply, self._nq + self._nu)

    def step1_solve(self, state: SchemeState, dt: float) -> Step1Result:
        """
        Coupled solve for (Q^{n+1}, u_tilde), G^{n+1} and r^{n+1}.

        The residual is affine in the unknowns (Dirichlet data enters through the ghosts),
        so the linear operator is F(x) - F(0) and the right-hand side is -F(0).
        """
        if dt <= 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        p = self.params
        Qn, un = state.Q, state.u
        e1 = compute_E1(Qn, p)
        Vn = compute_V(Qn, p, e1)
        qn_tensor = Qn.tensor
        grad_qn = grad_c(Qn)
        grad_pn = gradient(state.p).data

        def residual(x: np.ndarray) -> np.ndarray:
            Q, ut = self._split(x)
            r = state.r + 0.5 * inner_product_h(Vn, Q - Qn)
            G = self.chemical_potential(Q, r, Vn)
            gu = VelocityGradient(velocity_gradient(ut).data)
            f_q = (
                (Q.data - Qn.data) / dt
                + advect(ut, Qn).data
                - s_term(gu, qn_tensor, p).comps
                - p.M * G.data
            )
            stress = MatrixField(self.grid, sigma_term(qn_tensor, G.tensor, p))
            elastic = np.stack([metric_dot(grad_qn[:, k], G.data) for k in range(self.grid.dim)])
            f_u = (
                (ut.data - un.data) / dt
                + advect_skew(un, ut).data
                - p.eta * laplace5(ut).data
                + grad_pn
                - div_c(stress).data
                + elastic
            )
            return np.concatenate([f_q.ravel(), f_u.ravel()])

        size = self._nq + self._nu
        f0 = residual(np.zeros(size))
        op = LinOp(lambda x: residual(x) - f0, size)
        x0 = np.concatenate([Qn.data.ravel(), un.data.ravel()])
        settings = self.settings
        x, report = krylov_solve(
            op,
            -f0,
            precond=self._preconditioner(dt),
            tol=settings.krylov_tol,
            max_iter=settings.krylov_max_iter,
            restart=settings.krylov_restart,
            x0=x0,
        )
        if not report.converged:
            raise SolverConvergenceError(
                f"Step {state.step + 1}: coupled solve stalled at relative residual "
                f"{report.relative_residual:.3e} after {report.iterations} iterations",
                report,
            )

        Q_new, u_tilde = self._split(x)
        r_new = state.r + 0.5 * inner_product_h(Vn, Q_new - Qn)
        G_new = self.chemical_potential(Q_new, r_new, Vn)
        return Step1Result(Q=Q_new, r=r_new, u_tilde=u_tilde, G=G_new, solver=report)

    def step2_project(
        self, u_tilde: VectorField, p_n: ScalarField, dt: float
    ) -> tuple[VectorField, ScalarField]:
        """u = u_tilde - dt grad_c psi, p = p_n + psi, with div_c grad_c psi = div_c u_tilde / dt."""
        if dt <= 0:
            raise ValueError(f"Time step must be positive, got {dt}")
        psi = pressure_poisson_solve(div_c(u_tilde) / dt, tol=self.settings.krylov_tol)
        u_new = self.u_field(u_tilde.data - dt * gradient(psi).data)
        p_new = ScalarField(self.grid, p_n.data + psi.data, PRESSURE_BC)
        return u_new, p_new

    def advance(self, state: SchemeState, dt: float) -> tuple[SchemeState, StepReport]:
        p = self.params
        energy_before = self.modified_energy(state, dt)
        s1 = self.step1_solve(state, dt)
        u_new, p_new = self.step2_project(s1.u_tilde, state.p, dt)
        new_state = SchemeState(
            Q=s1.Q, u=u_new, p=p_new, r=s1.r, t=state.t + dt, step=state.step + 1
        )
        energy_after = self.modified_energy(new_state, dt)

        grad_u_norm2 = norm_h(velocity_gradient(s1.u_tilde)) ** 2
        G_norm2 = norm_h(s1.G) ** 2
        alignment = ScalarField(self.grid, metric_dot(state.Q.data, s1.G.data))
        trace_work = -dt * (2.0 * p.a / self.grid.dim) * inner_product_h(alignment, div_c(s1.u_tilde))
        residual = energy_after - energy_before + p.eta * dt * grad_u_norm2 + p.M * dt * G_norm2

        report = StepReport(
            solver=s1.solver,
            energy_before=energy_before,
            energy_after=energy_after,
            dissipation_residual=residual,
            trace_work=trace_work,
            grad_u_norm2=grad_u_norm2,
            G_norm2=G_norm2,
            r_consistency=self.r_consistency(new_state),
            linf_Q=linf_norm(new_state.Q),
            divergence_max=divergence_max(u_new),
            audit_tol=self.settings.audit_tol(energy_before),
        )
        logger.debug(
            f"step {new_state.step} t={new_state.t:.6g}: E={energy_after:.10e}, "
            f"residual={residual:.3e}, iterations={report.solver.iterations}"
        )
        if not report.passed:
            self._audit_failure(new_state, report)
        return new_state, report

    def _audit_failure(self, state: SchemeState, report: StepReport) -> None:
        message = (
            f"Energy law violated at step {state.step} (t={state.t:.6g}): dissipation residual "
            f"{report.dissipation_residual:.3e} > tolerance {report.audit_tol:.3e}"
        )
        if self.grid.periodic and self.settings.audit_mode is AuditMode.ABORT:
            raise AuditViolationError(message, report)
        logger.warning(message)

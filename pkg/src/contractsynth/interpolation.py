"""Collocation-based system interpolation.

For a continuous system ``(A_c, B_c)``, a degree ``N`` and a sampling time
``tau``, one segment of an interpolating trajectory is written as

    u(t) = u_k phi_0(t) + U Phi(t),    x(t) = x_k phi_0(t) + X Phi(t)

and ``(vec X, vec U)`` solves the linear system ``Q [vec X; vec U] = rhs`` whose
block rows enforce, in order: the dynamics at node 0, the dynamics at nodes
1..N, ``x(tau) = A_d x_k + B_d u_k`` and ``u(tau) = u_{k+1}``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bernstein import BernsteinData, build_bernstein
from .errors import InfeasibleOrder, PipelineError
from .linalg_core import (DEFAULT_RTOL, MinNormSolver, expm, image_contained_with, kron, kron_sum, unvec,
                          vec)
from .poly_basis import InterpolationBasis, build_basis
from .systems import LtiSystem


@dataclass(frozen=True)
class InterpolationOperator:
    sys_c: LtiSystem
    basis: InterpolationBasis
    bernstein: BernsteinData
    Q: np.ndarray
    R: np.ndarray
    T1: np.ndarray
    T2: np.ndarray
    Q_solver: MinNormSolver = field(repr=False)
    tol: float = DEFAULT_RTOL

    @property
    def n(self) -> int:
        return self.sys_c.n

    @property
    def m(self) -> int:
        return self.sys_c.m

    @property
    def N(self) -> int:
        return self.basis.N

    @property
    def tau(self) -> float:
        return self.basis.tau


def build_operator(sys_c: LtiSystem, N: int, tau: float, tol: float = DEFAULT_RTOL) -> InterpolationOperator:
    basis = build_basis(N, tau)
    n, m = sys_c.n, sys_c.m
    A, B = sys_c.A, sys_c.B
    In, Im = np.eye(n), np.eye(m)

    Q = np.block([
        [kron(basis.Phi_dot_at_0.reshape(1, N), In), np.zeros((n, m * N))],
        [kron_sum(basis.Psi.T, -A), -kron(np.eye(N), B)],
        [kron(basis.Phi_at_tau.reshape(1, N), In), np.zeros((n, m * N))],
        [np.zeros((m, n * N)), kron(basis.Phi_at_tau.reshape(1, N), Im)],
    ])
    R = np.block([
        [A - basis.phi0_dot_at_0 * In, B, np.zeros((n, m))],
        [-kron(basis.sigma.reshape(N, 1), In), np.zeros((n * N, m)), np.zeros((n * N, m))],
        [-basis.phi0_at_tau * In, np.zeros((n, m)), np.zeros((n, m))],
        [np.zeros((m, n)), -basis.phi0_at_tau * Im, Im],
    ])
    rows = Q.shape[0]
    T1 = np.zeros((rows, n))
    T1[n + n * N:2 * n + n * N, :] = In
    T2 = np.hstack([np.eye(n + m), np.zeros((n + m, m))])
    return InterpolationOperator(
        sys_c=sys_c, basis=basis, bernstein=build_bernstein(basis),
        Q=Q, R=R, T1=T1, T2=T2, Q_solver=MinNormSolver(Q), tol=tol,
    )


def _interp_matrix(op: InterpolationOperator, sys_d: LtiSystem) -> np.ndarray:
    if sys_d.n != op.n or sys_d.m != op.m:
        raise ValueError("discrete system dimensions do not match the operator")
    K = np.hstack([sys_d.A, sys_d.B])
    return op.R + op.T1 @ K @ op.T2


def check_interpolator(op: InterpolationOperator, sys_d: LtiSystem, tol: Optional[float] = None) -> bool:
    """Whether ``sys_c`` is an order-N interpolator of ``sys_d`` (image inclusion test)."""
    return image_contained_with(op.Q_solver, _interp_matrix(op, sys_d), op.tol if tol is None else tol)


def zoh_discretization(sys_c: LtiSystem, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Zero-order-hold pair ``(e^{A tau}, int_0^tau e^{A s} ds B)``."""
    n, m = sys_c.n, sys_c.m
    M = np.zeros((n + m, n + m))
    M[:n, :n] = sys_c.A
    M[:n, n:] = sys_c.B
    E = expm(M * tau)
    return E[:n, :n], E[:n, n:]


def design_discrete(op: InterpolationOperator, selection: str = "zoh") -> LtiSystem:
    """Find ``(A_d, B_d)`` such that the continuous system interpolates it.

    Feasibility is decided on ``Q Y - T1 [A_d B_d] T2 = R``, solved for
    ``(Y, [A_d B_d])`` in the minimum-norm sense; :class:`InfeasibleOrder` is
    raised when no exact solution exists for this degree.

    The solution is rarely unique.  ``selection="min_norm"`` keeps the
    ``[A_d B_d]`` block of that minimum-norm solution.  ``selection="zoh"``
    (default) instead returns the admissible ``[A_d B_d]`` closest in
    Frobenius norm to the zero-order-hold discretization: the admissible set
    is ``{K : L^T (R + T1 K T2) = 0}`` with ``L`` spanning the left null
    space of ``Q``.
    """
    if selection not in ("zoh", "min_norm"):
        raise ValueError(f"unknown selection {selection!r}")
    n, m = op.n, op.m
    cols = op.R.shape[1]
    lhs = np.hstack([kron(np.eye(cols), op.Q), -kron(op.T2.T, op.T1)])
    rhs = vec(op.R)
    report = MinNormSolver(lhs).solve(rhs)
    rel = report.residual_norm / max(1.0, float(np.linalg.norm(rhs)))
    if rel > op.tol:
        raise InfeasibleOrder(
            f"no discrete system admits an order-{op.N} interpolation (relative residual {rel:.3e}); "
            "increase N",
            N=op.N, tau=op.tau, residual=rel)
    if selection == "min_norm":
        K = unvec(report.solution[op.Q.shape[1] * cols:], n, n + m)
    else:
        A_ref, B_ref = zoh_discretization(op.sys_c, op.tau)
        k_ref = vec(np.hstack([A_ref, B_ref]))
        L = op.Q_solver.left_null_space()
        if L.shape[1] == 0:
            K = unvec(k_ref, n, n + m)
        else:
            C = kron(op.T2.T, L.T @ op.T1)
            d = -vec(L.T @ op.R) - C @ k_ref
            K = unvec(k_ref + MinNormSolver(C).solve(d).solution, n, n + m)
    sys_d = LtiSystem(K[:, :n], K[:, n:], kind="discrete")
    if not check_interpolator(op, sys_d):
        raise InfeasibleOrder(
            f"designed discrete system fails the interpolator check at order {op.N}",
            N=op.N, tau=op.tau, residual=rel)
    return sys_d


@dataclass(frozen=True)
class SegmentSolution:
    k: int
    U: np.ndarray
    X: np.ndarray
    residual: float


def segment_map(op: InterpolationOperator, sys_d: LtiSystem) -> np.ndarray:
    """Matrix ``S`` with ``[vec X; vec U] = S @ (x_k, u_k, u_{k+1})``."""
    return op.Q_solver.pinv @ _interp_matrix(op, sys_d)


def solve_segment(op: InterpolationOperator, sys_d: LtiSystem, x_k, u_k, u_k1, k: int = 0) -> SegmentSolution:
    n, m, N = op.n, op.m, op.N
    z = np.concatenate([np.ravel(x_k), np.ravel(u_k), np.ravel(u_k1)]).astype(float)
    rhs = _interp_matrix(op, sys_d) @ z
    report = op.Q_solver.solve(rhs)
    scale = max(1.0, float(np.linalg.norm(rhs)))
    if report.residual_norm > op.tol * scale:
        raise PipelineError(
            f"segment {k}: collocation system is inconsistent (residual {report.residual_norm:.3e}); "
            "the interpolator property does not hold", k=k, residual=report.residual_norm)
    sol = report.solution
    X = unvec(sol[:n * N], n, N)
    U = unvec(sol[n * N:], m, N)
    return SegmentSolution(k=k, U=U, X=X, residual=report.residual_norm)


class PiecewisePolynomial:
    """Signal on ``[0, ell * tau]`` made of degree-N segments in Lagrange form."""

    def __init__(self, basis: InterpolationBasis, starts: Sequence, coeffs: Sequence):
        self.basis = basis
        self.starts = [np.atleast_1d(np.asarray(s, dtype=float)) for s in starts]
        self.coeffs = [np.asarray(C, dtype=float) for C in coeffs]
        if len(self.starts) != len(self.coeffs) or not self.starts:
            raise ValueError("need one (start value, coefficient matrix) pair per segment")

    @property
    def tau(self) -> float:
        return self.basis.tau

    @property
    def num_segments(self) -> int:
        return len(self.starts)

    @property
    def horizon(self) -> float:
        return self.num_segments * self.tau

    @property
    def dim(self) -> int:
        return self.starts[0].size

    def nodal(self, k: int) -> np.ndarray:
        """``[p_k | C_k]``: values at the N+1 nodes of segment ``k``."""
        return np.column_stack([self.starts[k], self.coeffs[k]])

    def _locate(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        eps = 1e-12 * max(1.0, self.horizon)
        if np.any(t < -eps) or np.any(t > self.horizon + eps):
            raise ValueError(f"time outside [0, {self.horizon}]")
        k = np.floor(t / self.tau + 1e-12).astype(int)
        k = np.clip(k, 0, self.num_segments - 1)
        local = np.clip(t - k * self.tau, 0.0, self.tau)
        return k, local

    def __call__(self, t) -> np.ndarray:
        """Values at ``t``: a vector for scalar ``t``, else shape ``(dim, len(t))``."""
        k, local = self._locate(t)
        out = np.empty((self.dim, k.size))
        for seg in np.unique(k):
            sel = k == seg
            out[:, sel] = self.nodal(seg) @ self.basis.values(local[sel]).T
        return out[:, 0] if np.ndim(t) == 0 else out

    def derivative(self, t) -> np.ndarray:
        k, local = self._locate(t)
        out = np.empty((self.dim, k.size))
        for seg in np.unique(k):
            sel = k == seg
            out[:, sel] = self.nodal(seg) @ self.basis.derivatives(local[sel]).T
        return out[:, 0] if np.ndim(t) == 0 else out

    def segment(self, k: int, local_t) -> np.ndarray:
        """Evaluate segment ``k`` at local time(s) in ``[0, tau]``."""
        self.basis.check_interval(local_t)
        vals = self.basis.values(local_t)
        return self.nodal(k) @ (vals.T if np.ndim(local_t) else vals)


@dataclass
class Trajectory:
    u_c: PiecewisePolynomial
    x_c: PiecewisePolynomial
    x_d: np.ndarray          # (ell + 1, n)
    segments: list


def assemble_trajectory(op: InterpolationOperator, sys_d: LtiSystem, x0, u_d) -> Trajectory:
    """Roll the discrete system forward and lift every step to a polynomial segment."""
    u_d = np.atleast_2d(np.asarray(u_d, dtype=float))
    if u_d.shape[1] != op.m and u_d.shape[0] == op.m:
        u_d = u_d.T
    ell = u_d.shape[0] - 1
    if ell < 1:
        raise ValueError("need at least two input samples (one segment)")
    x_d = sys_d.rollout(x0, u_d[:ell])
    segments = [solve_segment(op, sys_d, x_d[k], u_d[k], u_d[k + 1], k=k) for k in range(ell)]
    u_c = PiecewisePolynomial(op.basis, [u_d[k] for k in range(ell)], [s.U for s in segments])
    x_c = PiecewisePolynomial(op.basis, [x_d[k] for k in range(ell)], [s.X for s in segments])
    return Trajectory(u_c=u_c, x_c=x_c, x_d=x_d, segments=segments)


def collocation_residual(sys_c: LtiSystem, u_c: PiecewisePolynomial, x_c: PiecewisePolynomial, t) -> np.ndarray:
    """``x_c' - A x_c - B u_c`` at the given times, shape ``(n, len(t))``."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    return x_c.derivative(t) - sys_c.A @ x_c(t) - sys_c.B @ u_c(t)

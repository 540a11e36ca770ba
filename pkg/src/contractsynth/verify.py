"""Independent certification of synthesized controllers.

The state under a piecewise-polynomial input is computed exactly (up to
matrix-exponential accuracy) by augmenting the state with the monomials
``z = (1, s, s^2, ..., s^N)`` of the normalized segment time ``s = t / tau``.
Their dynamics are a nilpotent shift, so ``d/dt (x, z) = M (x, z)`` is linear
and time invariant on each segment and ``(x, z)(t) = expm(M t) (x_k, e_0)``.
Nothing here reuses the collocation solution, so agreement with the
polynomial state is a genuine cross-check.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .contracts import PiecewiseContract
from .interpolation import PiecewisePolynomial
from .linalg_core import expm
from .systems import LtiSystem

MEMBERSHIP_TOL = 1e-7
MISMATCH_TOL = 1e-6
DEFAULT_GRID = 200


def monomial_coefficients(u_c: PiecewisePolynomial, k: int) -> np.ndarray:
    """``C`` with ``u_c(k tau + s tau) = C @ (1, s, ..., s^N)`` on segment ``k``."""
    s_nodes = u_c.basis.nodes / u_c.tau
    V = np.vander(s_nodes, u_c.basis.N + 1, increasing=True)
    return np.linalg.solve(V, u_c.nodal(k).T).T


def _augmented(sys_c: LtiSystem, C: np.ndarray, tau: float) -> np.ndarray:
    n = sys_c.n
    d = C.shape[1]
    M = np.zeros((n + d, n + d))
    M[:n, :n] = sys_c.A
    M[:n, n:] = sys_c.B @ C
    for i in range(1, d):
        M[n + i, n + i - 1] = i / tau
    return M


def exact_simulate(sys_c: LtiSystem, x0, u_c: PiecewisePolynomial, grid) -> np.ndarray:
    """States at the (sorted) ``grid`` times, shape ``(n, len(grid))``."""
    grid = np.asarray(grid, dtype=float)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be sorted")
    tau = u_c.tau
    eps = 1e-12 * max(1.0, u_c.horizon)
    if grid.size and (grid[0] < -eps or grid[-1] > u_c.horizon + eps):
        raise ValueError("grid leaves the horizon of the input signal")
    n = sys_c.n
    out = np.empty((n, grid.size))
    x_start = np.asarray(x0, dtype=float).copy()
    seg_of = np.clip(np.floor(grid / tau + 1e-12).astype(int), 0, u_c.num_segments - 1)
    for k in range(u_c.num_segments):
        C = monomial_coefficients(u_c, k)
        M = _augmented(sys_c, C, tau)
        w0 = np.zeros(n + C.shape[1])
        w0[:n] = x_start
        w0[n] = 1.0
        for idx in np.flatnonzero(seg_of == k):
            local = min(max(grid[idx] - k * tau, 0.0), tau)
            out[:, idx] = (expm(M * local) @ w0)[:n]
        x_start = (expm(M * tau) @ w0)[:n]
    return out


@dataclass
class VerificationReport:
    implements: bool
    max_input_violation: float
    max_state_violation: float
    max_trajectory_mismatch: float
    grid_points_per_segment: int
    worst_time: float
    worst_kind: str = ""
    certified_input_violation: float = float("nan")
    certified_state_violation: float = float("nan")
    max_collocation_residual: float = float("nan")
    tolerance: float = MEMBERSHIP_TOL

    def to_dict(self) -> dict:
        return asdict(self)


def certification_grid(contract: PiecewiseContract, u_c: PiecewisePolynomial,
                       points_per_segment: int = DEFAULT_GRID) -> np.ndarray:
    """Uniform points per segment plus every breakpoint and every collocation node."""
    tau = u_c.tau
    pts = [np.linspace(k * tau, (k + 1) * tau, points_per_segment) for k in range(u_c.num_segments)]
    pts.append(contract.starts)
    pts.append([contract.T])
    pts.append((np.arange(u_c.num_segments)[:, None] * tau + u_c.basis.nodes[None, :]).ravel())
    grid = np.unique(np.concatenate([np.ravel(p) for p in pts]))
    return grid[(grid >= 0.0) & (grid <= u_c.horizon * (1 + 1e-15))]


def _violations(contract: PiecewiseContract, t: float, u, x) -> tuple[float, float]:
    vin = vst = 0.0
    for j in contract.pieces_at(t, closed=True):
        piece = contract.pieces[j]
        vin = max(vin, piece.inputs.violation(u))
        vst = max(vst, piece.states.violation(x))
    return vin, vst


def certify(result, contract: PiecewiseContract, sys_c: LtiSystem, x0,
            points_per_segment: int = DEFAULT_GRID, tol: float = MEMBERSHIP_TOL) -> VerificationReport:
    """Dense-grid check that ``u_c`` and the resulting state satisfy the contract.

    At breakpoints a sample must satisfy both neighbouring pieces.  The state
    is checked in both representations: the polynomial ``x_c`` carried by the
    result and the exact simulation of ``sys_c`` under ``u_c``.
    """
    u_c: PiecewisePolynomial = result.u_c
    x_c: Optional[PiecewisePolynomial] = getattr(result, "x_c", None)
    grid = certification_grid(contract, u_c, points_per_segment)
    u_vals = u_c(grid)
    x_exact = exact_simulate(sys_c, x0, u_c, grid)
    x_poly = x_c(grid) if x_c is not None else x_exact
    mismatch = float(np.max(np.abs(x_poly - x_exact))) if x_c is not None else 0.0

    max_in = max_st = 0.0
    worst_t, worst_kind, worst = 0.0, "", -1.0
    for i, t in enumerate(grid):
        vin, vst_e = _violations(contract, t, u_vals[:, i], x_exact[:, i])
        _, vst_p = _violations(contract, t, u_vals[:, i], x_poly[:, i])
        vst = max(vst_e, vst_p)
        max_in = max(max_in, vin)
        max_st = max(max_st, vst)
        if max(vin, vst) > worst:
            worst = max(vin, vst)
            worst_t = float(t)
            worst_kind = "input" if vin >= vst else "state"

    residual = float("nan")
    if x_c is not None:
        residual = float(np.max(np.abs(x_c.derivative(grid) - sys_c.A @ x_poly - sys_c.B @ u_vals)))

    return VerificationReport(
        implements=bool(max_in <= tol and max_st <= tol),
        max_input_violation=max_in,
        max_state_violation=max_st,
        max_trajectory_mismatch=mismatch,
        grid_points_per_segment=int(points_per_segment),
        worst_time=worst_t,
        worst_kind=worst_kind if worst > 0 else "",
        certified_input_violation=float(getattr(result, "certified_input_violation", float("nan"))),
        certified_state_violation=float(getattr(result, "certified_state_violation", float("nan"))),
        max_collocation_residual=residual,
        tolerance=tol,
    )

"""Bernstein basis and conversion from nodal (Lagrange) data to control points."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .poly_basis import InterpolationBasis

MAX_CONDITION = 1e12


def bernstein_vector(N: int, s: float) -> np.ndarray:
    """``(b_{0,N}(s), ..., b_{N,N}(s))`` on ``[0, 1]``.

    Built by repeated convex blending (de Casteljau), so every entry is a sum
    of nonnegative products.
    """
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")
    b = np.zeros(N + 1)
    b[0] = 1.0
    r = 1.0 - s
    for d in range(1, N + 1):
        # Sweep right to left so b[j - 1] still holds the degree d-1 value.
        b[d] = s * b[d - 1]
        for j in range(d - 1, 0, -1):
            b[j] = r * b[j] + s * b[j - 1]
        b[0] = r * b[0]
    return b


def bernstein_matrix(N: int, s) -> np.ndarray:
    """Bernstein vectors for many parameters, one row per entry of ``s``."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.vstack([bernstein_vector(N, float(si)) for si in s])


@dataclass(frozen=True)
class BernsteinData:
    N: int
    M_matrix: np.ndarray
    M_inverse: np.ndarray
    condition_estimate: float


def build_bernstein(basis: InterpolationBasis) -> BernsteinData:
    """Assemble ``M = [B(t_0/tau) ... B(t_N/tau)]`` and its inverse.

    ``M`` is invertible whenever the nodes are distinct; a huge condition
    number therefore means the basis itself is corrupt.
    """
    s = basis.nodes / basis.tau
    M = bernstein_matrix(basis.N, s).T
    cond = float(np.linalg.cond(M))
    if not np.isfinite(cond) or cond > MAX_CONDITION:
        raise np.linalg.LinAlgError(f"Bernstein conversion matrix is numerically singular (cond={cond:.3e})")
    # LU with partial pivoting
    M_inv = np.linalg.solve(M, np.eye(basis.N + 1))
    return BernsteinData(N=basis.N, M_matrix=M, M_inverse=M_inv, condition_estimate=max(1.0, cond))


def control_points(data: BernsteinData, value_at_0, C) -> np.ndarray:
    """Control points ``[value_at_0 | C] @ M^-1`` of one segment polynomial."""
    value_at_0 = np.atleast_1d(np.asarray(value_at_0, dtype=float))
    C = np.asarray(C, dtype=float)
    if C.ndim == 1:
        C = C.reshape(1, -1)
    if C.shape != (value_at_0.size, data.N):
        raise ValueError(f"expected C of shape ({value_at_0.size}, {data.N}), got {C.shape}")
    P = np.column_stack([value_at_0, C]) @ data.M_inverse
    # Column 0 of M^-1 is e_0 exactly because the first node maps to B(0) = e_0.
    P[:, 0] = value_at_0
    return P


def eval_bernstein(points, tau: float, t) -> np.ndarray:
    """Evaluate ``points @ B(t / tau)`` at a scalar ``t`` in ``[0, tau]``."""
    points = np.asarray(points, dtype=float)
    return points @ bernstein_vector(points.shape[1] - 1, t / tau)
